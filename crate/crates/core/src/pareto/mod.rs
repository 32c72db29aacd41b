//! Multi-objective metric spaces, Pareto dominance and frontier maintenance.
//!
//! All operations are pure; callers that share a frontier across threads
//! serialize updates themselves.

mod frontier;
mod space;

use thiserror::Error;

pub use frontier::{
    compute_frontier, distance_to_frontier, dominates, insert_incremental, project, projection_space, FrontierEvent,
    FrontierEventKind, ParetoFrontier, PointId,
};
pub use space::{metric, Dimension, Direction, MetricSpace, MetricVector};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("metric space must declare at least one dimension")]
    EmptySpace,
    #[error("metric `{0}` declared twice")]
    DuplicateDimension(String),
    #[error("unknown metric `{0}`")]
    UnknownMetric(String),
    #[error("metric `{metric}` is not a finite number")]
    NonFinite { metric: String },
    #[error("metric `{metric}` = {value}: {reason}")]
    OutOfRange {
        metric: String,
        value: f64,
        reason: &'static str,
    },
    #[error("metric sets differ: {left:?} vs {right:?}")]
    MismatchedMetrics { left: Vec<String>, right: Vec<String> },
    #[error("duplicate point id `{0}`")]
    DuplicatePoint(String),
    #[error("projection axes must differ (both are `{0}`)")]
    SameAxis(String),
    #[error("frontier has no members")]
    EmptyFrontier,
}
