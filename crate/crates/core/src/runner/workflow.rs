use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::registry::{DependencyRef, Uid};

pub const DEFAULT_REPETITIONS: u32 = 5;

fn default_repetitions() -> u32 {
    DEFAULT_REPETITIONS
}

/// A workflow parameter value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Bool(bool),
    Int(i64),
    Float(f64),
    Str(String),
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Bool(b) => write!(f, "{b}"),
            Scalar::Int(i) => write!(f, "{i}"),
            Scalar::Float(x) => write!(f, "{x}"),
            Scalar::Str(s) => f.write_str(s),
        }
    }
}

impl Scalar {
    /// Parses command-line text: integers, then floats, then booleans,
    /// otherwise a string.
    pub fn parse_loose(s: &str) -> Scalar {
        if let Ok(i) = s.parse() {
            Scalar::Int(i)
        } else if let Ok(x) = s
            .parse::<f64>()
            .map_err(|_| ())
            .and_then(|x| if x.is_finite() { Ok(x) } else { Err(()) })
        {
            Scalar::Float(x)
        } else if let Ok(b) = s.parse() {
            Scalar::Bool(b)
        } else {
            Scalar::Str(s.to_string())
        }
    }
}

/// One benchmarkable pipeline: a program plus optional model and dataset,
/// with parameters for the program's entry command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkflowDescriptor {
    pub uid: Uid,
    pub program_ref: DependencyRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_ref: Option<DependencyRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset_ref: Option<DependencyRef>,
    #[serde(default)]
    pub parameters: BTreeMap<String, Scalar>,
    #[serde(default = "default_repetitions")]
    pub repetitions: u32,
}

impl WorkflowDescriptor {
    pub fn new(program_ref: DependencyRef) -> Self {
        Self {
            uid: Uid::generate(),
            program_ref,
            model_ref: None,
            dataset_ref: None,
            parameters: BTreeMap::new(),
            repetitions: DEFAULT_REPETITIONS,
        }
    }

    pub fn check(&self) -> Result<(), RunnerError> {
        if self.repetitions == 0 {
            return Err(RunnerError::InvalidRepetitions);
        }
        Ok(())
    }
}
