//! Core of the quest tournament platform: artifact registry, benchmark
//! runner, Pareto engine and the scoreboard's event-sourced state.

pub mod pareto;
pub mod registry;
pub mod runner;
pub mod scoreboard;

pub use pareto::{
    compute_frontier, distance_to_frontier, dominates, insert_incremental, project, Dimension, Direction,
    FrontierEvent, FrontierEventKind, MetricSpace, MetricVector, ParetoError, ParetoFrontier,
};
pub use registry::{
    validate_meta, ArtifactPackage, Catalog, DependencyRef, Kind, OsFamily, PlatformDescriptor, RegistryError,
    Repository, Uid, ValidationReport,
};
