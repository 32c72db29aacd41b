//! UID-addressed artifact packages: metadata schema, on-disk store,
//! search and dependency resolution.

mod catalog;
mod package;
mod schema;
mod store;

use std::path::PathBuf;

use thiserror::Error;

pub use catalog::{Catalog, Resolution, SearchQuery};
pub use package::{
    compare_versions, ArtifactPackage, DependencyRef, Kind, OsFamily, PlatformDescriptor, Selector, Uid, VersionRange,
};
pub use schema::{validate_meta, Issue, Severity, ValidationReport};
pub use store::{read_package, write_package, NewPackage, Repository};

#[derive(Debug, Error)]
pub enum RegistryError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("payload directory {} does not exist", .0.display())]
    PayloadMissing(PathBuf),
    #[error("package name must not be empty")]
    EmptyName,
    #[error("{kind} `{name}` version {version} already exists as {existing}")]
    Conflict {
        kind: Kind,
        name: String,
        version: String,
        existing: Uid,
    },
    #[error("invalid meta: {}", describe(.0))]
    InvalidMeta(ValidationReport),
    #[error("invalid platform descriptor: {0}")]
    InvalidPlatform(String),
    #[error("corrupt package at {}: {reason}", .path.display())]
    Corrupt { path: PathBuf, reason: String },
    #[error("unknown package {0}")]
    UnknownPackage(Uid),
    #[error("package {package}: no package satisfies `{selector}`")]
    Unsatisfiable { package: Uid, selector: String },
    #[error("dependency cycle: {}", join_cycle(.0))]
    Cycle(Vec<Uid>),
    #[error("uid {0} appears twice")]
    DuplicateUid(Uid),
    #[error("`{0}` is not a 16-character lowercase hex uid")]
    InvalidUid(String),
    #[error("package {0} depends on itself")]
    SelfDependency(Uid),
    #[error("invalid dependency selector: {0}")]
    InvalidSelector(String),
}

// Equality for tests; io errors compare by kind.
impl PartialEq for RegistryError {
    fn eq(&self, other: &Self) -> bool {
        use RegistryError::*;
        match (self, other) {
            (Io { path: a, source: x }, Io { path: b, source: y }) => a == b && x.kind() == y.kind(),
            (PayloadMissing(a), PayloadMissing(b)) => a == b,
            (EmptyName, EmptyName) => true,
            (
                Conflict {
                    kind: k1,
                    name: n1,
                    version: v1,
                    existing: e1,
                },
                Conflict {
                    kind: k2,
                    name: n2,
                    version: v2,
                    existing: e2,
                },
            ) => k1 == k2 && n1 == n2 && v1 == v2 && e1 == e2,
            (InvalidMeta(a), InvalidMeta(b)) => a == b,
            (InvalidPlatform(a), InvalidPlatform(b)) => a == b,
            (Corrupt { path: a, reason: x }, Corrupt { path: b, reason: y }) => a == b && x == y,
            (UnknownPackage(a), UnknownPackage(b)) => a == b,
            (
                Unsatisfiable {
                    package: a,
                    selector: x,
                },
                Unsatisfiable {
                    package: b,
                    selector: y,
                },
            ) => a == b && x == y,
            (Cycle(a), Cycle(b)) => a == b,
            (DuplicateUid(a), DuplicateUid(b)) => a == b,
            (InvalidUid(a), InvalidUid(b)) => a == b,
            (SelfDependency(a), SelfDependency(b)) => a == b,
            (InvalidSelector(a), InvalidSelector(b)) => a == b,
            _ => false,
        }
    }
}

fn describe(report: &ValidationReport) -> String {
    report
        .errors()
        .map(|i| format!("{}: {}", if i.path.is_empty() { "<root>" } else { &i.path }, i.message))
        .collect::<Vec<_>>()
        .join("; ")
}

fn join_cycle(uids: &[Uid]) -> String {
    let mut parts: Vec<&str> = uids.iter().map(Uid::as_str).collect();
    if let Some(first) = uids.first() {
        parts.push(first.as_str());
    }
    parts.join(" -> ")
}
