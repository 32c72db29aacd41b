use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::process::Command;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::registry::{ArtifactPackage, OsFamily, PlatformDescriptor, Uid};

pub const UNKNOWN: &str = "unknown";

/// Software context of a run, recorded for reproducibility audits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSnapshot {
    pub os_name: String,
    pub os_version: String,
    pub kernel_version: String,
    /// First 8 bytes of SHA-256 of the hostname, hex encoded.
    pub hostname_hash: String,
    pub dependency_versions: BTreeMap<Uid, String>,
    pub timestamp_utc: String,
    pub platform: PlatformDescriptor,
}

fn command_output(program: &str, args: &[&str]) -> Option<String> {
    let out = Command::new(program).args(args).output().ok()?;
    if !out.status.success() {
        return None;
    }
    let text = String::from_utf8_lossy(&out.stdout).trim().to_string();
    (!text.is_empty()).then_some(text)
}

fn read_trimmed(path: &str) -> Option<String> {
    let text = fs::read_to_string(path).ok()?.trim().to_string();
    (!text.is_empty()).then_some(text)
}

fn os_release() -> (Option<String>, Option<String>) {
    let Some(text) = read_trimmed("/etc/os-release").or_else(|| read_trimmed("/usr/lib/os-release")) else {
        return (None, None);
    };
    let field = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(key)?.strip_prefix('='))
            .map(|v| v.trim_matches('"').to_string())
            .filter(|v| !v.is_empty())
    };
    (field("NAME"), field("VERSION_ID").or_else(|| field("VERSION")))
}

fn os_name_and_version() -> (String, String) {
    let (name, version) = match std::env::consts::OS {
        "macos" => (
            command_output("sw_vers", &["-productName"]),
            command_output("sw_vers", &["-productVersion"]),
        ),
        "windows" => (Some("Windows".to_string()), command_output("cmd", &["/C", "ver"])),
        "android" => (
            Some("Android".to_string()),
            command_output("getprop", &["ro.build.version.release"]),
        ),
        _ => os_release(),
    };
    (
        name.unwrap_or_else(|| std::env::consts::OS.to_string()),
        version.unwrap_or_else(|| UNKNOWN.to_string()),
    )
}

/// Kernel release string, as `uname -r` reports it.
pub fn kernel_version() -> String {
    read_trimmed("/proc/sys/kernel/osrelease")
        .or_else(|| command_output("uname", &["-r"]))
        .unwrap_or_else(|| UNKNOWN.to_string())
}

fn hostname() -> String {
    read_trimmed("/proc/sys/kernel/hostname")
        .or_else(|| command_output("hostname", &[]))
        .or_else(|| std::env::var("COMPUTERNAME").ok())
        .or_else(|| std::env::var("HOSTNAME").ok())
        .unwrap_or_else(|| UNKNOWN.to_string())
}

/// One-way 16-hex digest of a hostname.
pub fn hash_hostname(name: &str) -> String {
    hex::encode(&Sha256::digest(name.as_bytes())[..8])
}

/// Captures OS, kernel and dependency versions. Fields that cannot be
/// determined are recorded as `"unknown"`.
pub fn snapshot_environment(platform: &PlatformDescriptor, resolved: &[ArtifactPackage]) -> EnvironmentSnapshot {
    let (os_name, os_version) = os_name_and_version();
    EnvironmentSnapshot {
        os_name,
        os_version,
        kernel_version: kernel_version(),
        hostname_hash: hash_hostname(&hostname()),
        dependency_versions: resolved.iter().map(|p| (p.uid.clone(), p.version.clone())).collect(),
        timestamp_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true),
        platform: platform.clone(),
    }
}

fn cpu_model() -> Option<String> {
    if let Some(info) = read_trimmed("/proc/cpuinfo") {
        for key in ["model name", "Hardware", "Processor", "cpu model"] {
            let found = info.lines().find_map(|l| {
                let (k, v) = l.split_once(':')?;
                (k.trim() == key && !v.trim().is_empty()).then(|| v.trim().to_string())
            });
            if found.is_some() {
                return found;
            }
        }
    }
    command_output("sysctl", &["-n", "machdep.cpu.brand_string"])
}

fn total_ram_bytes() -> Option<u64> {
    let info = read_trimmed("/proc/meminfo")?;
    let line = info.lines().find(|l| l.starts_with("MemTotal:"))?;
    let kib: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kib * 1024)
}

/// Describes the machine this process runs on.
pub fn detect_platform() -> PlatformDescriptor {
    let os_family = OsFamily::current();
    let mut labels = BTreeSet::new();
    labels.insert(os_family.to_string());
    labels.insert(std::env::consts::ARCH.to_string());
    PlatformDescriptor {
        cpu: cpu_model().unwrap_or_else(|| std::env::consts::ARCH.to_string()),
        accelerator: None,
        os_family,
        ram_bytes: total_ram_bytes().unwrap_or(0),
        price_usd: None,
        labels,
    }
}
