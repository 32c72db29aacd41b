//! Layered configuration: flags over environment over config file over
//! built-in defaults, resolved field by field.

use std::path::{Path, PathBuf};

use quest_core::runner::DEFAULT_REPETITIONS;
use serde::{Deserialize, Serialize};

pub const ENV_REPO: &str = "QUEST_REPO";
pub const ENV_SERVICE: &str = "QUEST_SERVICE";
pub const ENV_TOKEN: &str = "QUEST_TOKEN";
pub const ENV_CONFIG: &str = "QUEST_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliConfig {
    pub repository_path: PathBuf,
    pub service_url: Option<String>,
    #[serde(skip_serializing)]
    pub token: Option<String>,
    pub default_repetitions: u32,
}

/// One source of settings; unset fields fall through to the next layer.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub repository_path: Option<PathBuf>,
    pub service_url: Option<String>,
    pub token: Option<String>,
    pub default_repetitions: Option<u32>,
}

impl ConfigLayer {
    /// Reads `QUEST_REPO`, `QUEST_SERVICE` and `QUEST_TOKEN`; empty values count as unset.
    pub fn from_env(env: &dyn Fn(&str) -> Option<String>) -> Self {
        let get = |key| env(key).filter(|v: &String| !v.is_empty());
        ConfigLayer {
            repository_path: get(ENV_REPO).map(PathBuf::from),
            service_url: get(ENV_SERVICE),
            token: get(ENV_TOKEN),
            default_repetitions: None,
        }
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config file {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("config file {}: {e}", path.display()))
    }

    /// Fields set here win; the rest come from `lower`.
    pub fn over(self, lower: ConfigLayer) -> ConfigLayer {
        ConfigLayer {
            repository_path: self.repository_path.or(lower.repository_path),
            service_url: self.service_url.or(lower.service_url),
            token: self.token.or(lower.token),
            default_repetitions: self.default_repetitions.or(lower.default_repetitions),
        }
    }
}

impl CliConfig {
    pub fn default_file() -> Option<PathBuf> {
        dirs::config_dir().map(|d| d.join("quest").join("config.json"))
    }

    pub fn default_repository() -> PathBuf {
        dirs::data_dir()
            .map(|d| d.join("quest").join("repository"))
            .unwrap_or_else(|| PathBuf::from(".quest-repository"))
    }

    pub fn resolve(flags: ConfigLayer, env: ConfigLayer, file: ConfigLayer) -> Result<CliConfig, String> {
        let merged = flags.over(env).over(file);
        let default_repetitions = merged.default_repetitions.unwrap_or(DEFAULT_REPETITIONS);
        if default_repetitions == 0 {
            return Err("default_repetitions must be at least 1".into());
        }
        Ok(CliConfig {
            repository_path: merged.repository_path.unwrap_or_else(Self::default_repository),
            service_url: merged.service_url.map(|u| u.trim_end_matches('/').to_owned()),
            token: merged.token,
            default_repetitions,
        })
    }

    /// Loads the file layer: an explicit path must exist, the default path may not.
    pub fn load_file(explicit: Option<&Path>) -> Result<ConfigLayer, String> {
        match explicit {
            Some(path) => ConfigLayer::from_file(path),
            None => match Self::default_file() {
                Some(path) if path.exists() => ConfigLayer::from_file(&path),
                _ => Ok(ConfigLayer::default()),
            },
        }
    }
}
