//! Offline table of effective and critical nodal inertia and the online
//! assessment that interpolates it.

mod case;
mod online;
mod table;

pub use case::{derive_seed, CaseDescriptor, FeatureScales, LocatedScenario, FEATURE_NAMES};
pub use online::{
    assess, interpolate_online, select_neighbors, Assessment, Neighbor, NeighborSummary, OnlineInertia,
    DEFAULT_NEIGHBORS,
};
pub use table::{
    build_offline_table, measurement, NodeRecord, OfflineRecord, OfflineTable, TableConfig,
    TABLE_FORMAT_VERSION,
};

use crate::fitting::FitError;
use crate::security::SecurityError;
use crate::sim::SimError;

#[derive(Debug, thiserror::Error)]
pub enum AssessmentError {
    #[error("no scenarios to build a table from")]
    NoScenarios,
    #[error("scenario `{scenario}`, node `{node}`: simulation failed: {source}")]
    Simulation {
        scenario: String,
        node: String,
        #[source]
        source: SimError,
    },
    #[error("scenario `{scenario}`, node `{node}`: fit failed: {source}")]
    Fit {
        scenario: String,
        node: String,
        #[source]
        source: FitError,
    },
    #[error("scenario `{scenario}`, node `{node}`: {source}")]
    Security {
        scenario: String,
        node: String,
        #[source]
        source: SecurityError,
    },
    #[error("no offline case with disturbance type {kind} at node `{node}`")]
    NoComparableCase { kind: String, node: String },
    #[error("neighbour set is empty")]
    EmptyNeighborSet,
    #[error("neighbour count must be at least 1")]
    InvalidNeighborCount,
    #[error("invalid offline table: {0}")]
    InvalidTable(String),
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error(transparent)]
    Index(#[from] SecurityError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}
