use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::RegistryError;

/// Opaque 16-lowercase-hex identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Uid(String);

impl Uid {
    /// Fresh uid from the thread-local CSPRNG.
    pub fn generate() -> Self {
        Uid(format!("{:016x}", rand::random::<u64>()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_valid(s: &str) -> bool {
        s.len() == 16 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b))
    }
}

impl TryFrom<String> for Uid {
    type Error = RegistryError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if Uid::is_valid(&s) {
            Ok(Uid(s))
        } else {
            Err(RegistryError::InvalidUid(s))
        }
    }
}

impl FromStr for Uid {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Uid::try_from(s.to_string())
    }
}

impl From<Uid> for String {
    fn from(uid: Uid) -> String {
        uid.0
    }
}

impl fmt::Display for Uid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Program,
    Model,
    Dataset,
    Library,
    Platform,
}

impl Kind {
    pub const ALL: [Kind; 5] = [Kind::Program, Kind::Model, Kind::Dataset, Kind::Library, Kind::Platform];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Program => "program",
            Kind::Model => "model",
            Kind::Dataset => "dataset",
            Kind::Library => "library",
            Kind::Platform => "platform",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Kind {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| RegistryError::InvalidSelector(format!("unknown kind `{s}`")))
    }
}

/// Exact (`1.1`) or prefix (`1.`, `1.1.`) version match.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VersionRange(pub String);

impl VersionRange {
    pub fn matches(&self, version: &str) -> bool {
        if self.0.ends_with('.') {
            version.starts_with(&self.0)
        } else {
            version == self.0
        }
    }
}

/// Orders dotted versions segment by segment, numerically where both
/// segments are integers.
pub fn compare_versions(a: &str, b: &str) -> Ordering {
    let mut left = a.split('.');
    let mut right = b.split('.');
    loop {
        match (left.next(), right.next()) {
            (None, None) => return Ordering::Equal,
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) => {
                let ord = match (x.parse::<u64>(), y.parse::<u64>()) {
                    (Ok(n), Ok(m)) => n.cmp(&m),
                    _ => x.cmp(y),
                };
                if ord.is_ne() {
                    return ord;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Uid(Uid),
    Tags {
        kind: Kind,
        tags: BTreeSet<String>,
        version: Option<VersionRange>,
    },
}

/// A reference to another package, either by uid or by kind + tags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawDependencyRef", into = "RawDependencyRef")]
pub struct DependencyRef {
    pub selector: Selector,
    pub optional: bool,
}

#[derive(Serialize, Deserialize)]
struct RawDependencyRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    uid: Option<Uid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<Kind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tags: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    version: Option<VersionRange>,
    #[serde(default)]
    optional: bool,
}

impl TryFrom<RawDependencyRef> for DependencyRef {
    type Error = RegistryError;

    fn try_from(raw: RawDependencyRef) -> Result<Self, Self::Error> {
        let tag_part = raw.kind.is_some() || raw.tags.is_some() || raw.version.is_some();
        let selector = match (raw.uid, tag_part) {
            (Some(uid), false) => Selector::Uid(uid),
            (None, true) => Selector::Tags {
                kind: raw
                    .kind
                    .ok_or_else(|| RegistryError::InvalidSelector("tag selector needs a kind".into()))?,
                tags: raw.tags.unwrap_or_default(),
                version: raw.version,
            },
            (Some(_), true) => {
                return Err(RegistryError::InvalidSelector(
                    "selector has both a uid and a tag selector".into(),
                ))
            }
            (None, false) => {
                return Err(RegistryError::InvalidSelector(
                    "selector needs either a uid or a kind".into(),
                ))
            }
        };
        Ok(DependencyRef {
            selector,
            optional: raw.optional,
        })
    }
}

impl From<DependencyRef> for RawDependencyRef {
    fn from(dep: DependencyRef) -> Self {
        match dep.selector {
            Selector::Uid(uid) => RawDependencyRef {
                uid: Some(uid),
                kind: None,
                tags: None,
                version: None,
                optional: dep.optional,
            },
            Selector::Tags { kind, tags, version } => RawDependencyRef {
                uid: None,
                kind: Some(kind),
                tags: Some(tags),
                version,
                optional: dep.optional,
            },
        }
    }
}

impl DependencyRef {
    pub fn uid(uid: Uid) -> Self {
        Self {
            selector: Selector::Uid(uid),
            optional: false,
        }
    }

    pub fn tags<I, S>(kind: Kind, tags: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            selector: Selector::Tags {
                kind,
                tags: tags.into_iter().map(|t| t.into().to_lowercase()).collect(),
                version: None,
            },
            optional: false,
        }
    }

    pub fn with_version(mut self, range: impl Into<String>) -> Self {
        if let Selector::Tags { version, .. } = &mut self.selector {
            *version = Some(VersionRange(range.into()));
        }
        self
    }

    pub fn optional(mut self) -> Self {
        self.optional = true;
        self
    }

    pub fn matches(&self, pkg: &ArtifactPackage) -> bool {
        match &self.selector {
            Selector::Uid(uid) => &pkg.uid == uid,
            Selector::Tags { kind, tags, version } => {
                pkg.kind == *kind
                    && tags.is_subset(&pkg.tags)
                    && version.as_ref().is_none_or(|r| r.matches(&pkg.version))
            }
        }
    }
}

/// Text form: `[?]<uid>` or `[?]<kind>[:tag,tag][@version]`; `?` marks the
/// reference optional.
impl FromStr for DependencyRef {
    type Err = RegistryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (optional, body) = match s.strip_prefix('?') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        if Uid::is_valid(body) {
            return Ok(DependencyRef {
                selector: Selector::Uid(body.parse()?),
                optional,
            });
        }
        let (rest, version) = match body.split_once('@') {
            Some((r, v)) if !v.is_empty() => (r, Some(VersionRange(v.to_string()))),
            Some(_) => return Err(RegistryError::InvalidSelector(format!("empty version in `{s}`"))),
            None => (body, None),
        };
        let (kind, tags) = match rest.split_once(':') {
            Some((k, t)) => (k, t),
            None => (rest, ""),
        };
        let kind: Kind = kind
            .parse()
            .map_err(|_| RegistryError::InvalidSelector(format!("`{s}` is neither a uid nor kind[:tags][@version]")))?;
        let tags = tags
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_lowercase)
            .collect();
        Ok(DependencyRef {
            selector: Selector::Tags { kind, tags, version },
            optional,
        })
    }
}

impl fmt::Display for DependencyRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.optional {
            f.write_str("?")?;
        }
        match &self.selector {
            Selector::Uid(uid) => write!(f, "{uid}"),
            Selector::Tags { kind, tags, version } => {
                write!(f, "{kind}")?;
                if !tags.is_empty() {
                    let joined: Vec<&str> = tags.iter().map(String::as_str).collect();
                    write!(f, ":{}", joined.join(","))?;
                }
                if let Some(v) = version {
                    write!(f, "@{}", v.0)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OsFamily {
    Linux,
    Windows,
    Macos,
    Android,
    Other,
}

impl OsFamily {
    pub const ALL: [OsFamily; 5] = [
        OsFamily::Linux,
        OsFamily::Windows,
        OsFamily::Macos,
        OsFamily::Android,
        OsFamily::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OsFamily::Linux => "linux",
            OsFamily::Windows => "windows",
            OsFamily::Macos => "macos",
            OsFamily::Android => "android",
            OsFamily::Other => "other",
        }
    }

    /// Family of the OS this binary was compiled for.
    pub fn current() -> Self {
        match std::env::consts::OS {
            "linux" => OsFamily::Linux,
            "windows" => OsFamily::Windows,
            "macos" => OsFamily::Macos,
            "android" => OsFamily::Android,
            _ => OsFamily::Other,
        }
    }
}

impl fmt::Display for OsFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OsFamily {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OsFamily::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| format!("unknown os_family `{s}`"))
    }
}

/// The hardware/OS a run executes on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlatformDescriptor {
    pub cpu: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accelerator: Option<String>,
    pub os_family: OsFamily,
    pub ram_bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_usd: Option<f64>,
    #[serde(default)]
    pub labels: BTreeSet<String>,
}

impl PlatformDescriptor {
    pub fn check(&self) -> Result<(), String> {
        match self.price_usd {
            Some(p) if !(p.is_finite() && p >= 0.0) => Err(format!("price_usd must be a non-negative number, got {p}")),
            _ => Ok(()),
        }
    }

    /// Reads a descriptor out of a platform package's meta document.
    pub fn from_meta(meta: &Map<String, Value>) -> Result<Self, RegistryError> {
        let desc: PlatformDescriptor = serde_json::from_value(Value::Object(meta.clone()))
            .map_err(|e| RegistryError::InvalidPlatform(e.to_string()))?;
        desc.check().map_err(RegistryError::InvalidPlatform)?;
        Ok(desc)
    }
}

/// A UID-addressed unit of the repository.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactPackage {
    pub uid: Uid,
    pub kind: Kind,
    pub name: String,
    pub version: String,
    #[serde(default)]
    pub tags: BTreeSet<String>,
    #[serde(default)]
    pub dependencies: Vec<DependencyRef>,
    pub payload_path: String,
    #[serde(default)]
    pub meta: Map<String, Value>,
    /// Top-level keys this version does not know about; written back verbatim.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl ArtifactPackage {
    pub fn check(&self) -> Result<(), RegistryError> {
        if self.name.trim().is_empty() {
            return Err(RegistryError::EmptyName);
        }
        if self
            .dependencies
            .iter()
            .any(|d| matches!(&d.selector, Selector::Uid(u) if *u == self.uid))
        {
            return Err(RegistryError::SelfDependency(self.uid.clone()));
        }
        Ok(())
    }
}
