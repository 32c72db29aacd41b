//! Plans, executes and measures benchmark workflows on the local machine.

mod aggregate;
mod environment;
mod execute;
mod plan;
mod workflow;

use thiserror::Error;

pub use aggregate::{aggregate, AggregationPolicy, Dispersion, DispersionReport};
pub use environment::{
    detect_platform, hash_hostname, kernel_version, snapshot_environment, EnvironmentSnapshot, UNKNOWN,
};
pub use execute::{execute, RawRun, RESULT_FILE};
pub use plan::{plan_run, render_template, ExecutionPlan};
pub use workflow::{Scalar, WorkflowDescriptor, DEFAULT_REPETITIONS};

use crate::registry::{Kind, OsFamily, RegistryError, Uid};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error("no package satisfies the {role} reference `{selector}`")]
    Unresolvable { role: &'static str, selector: String },
    #[error("package {uid} is a {kind}, not a program")]
    NotAProgram { uid: Uid, kind: Kind },
    #[error("program {0} declares no entry_command")]
    MissingEntryCommand(Uid),
    #[error("placeholder `{{{0}}}` has no binding")]
    UnboundPlaceholder(String),
    #[error("malformed entry command `{template}`: {reason}")]
    MalformedTemplate { template: String, reason: String },
    #[error("program {program} supports {supported:?}, platform is {actual}")]
    PlatformIncompatible {
        program: Uid,
        supported: Vec<OsFamily>,
        actual: OsFamily,
    },
    #[error("repetitions must be at least 1")]
    InvalidRepetitions,
    #[error("cannot launch `{command}`: {source}")]
    NotLaunchable {
        command: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("none of {total} runs succeeded")]
    NoSuccessfulRuns { total: usize },
    #[error("strict policy: repetitions {failed:?} failed")]
    StrictFailure { failed: Vec<u32> },
    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),
}
