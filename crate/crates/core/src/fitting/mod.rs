//! Identification of effective nodal parameters from frequency trajectories.

mod filter;
mod fit;
mod interpolate;
mod loss;
mod simplex;

pub use filter::filter_trajectory;
pub use fit::{fit_error_percent, fit_node, fit_node_with, FitConfig, FitReport, FitResult};
pub use interpolate::interpolate_params;
pub use loss::{loss, LossEvaluator, LossWeights, INFEASIBLE_LOSS};
pub use simplex::{nelder_mead, SimplexOptions, SimplexOutcome};

use crate::enf::{EffectiveParams, EnfError};

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("window mismatch: {0}")]
    WindowMismatch(String),
    #[error("invalid loss weights: {0}")]
    InvalidWeights(String),
    #[error("start point {0:?} is not positive and underdamped")]
    NoFeasibleStart(EffectiveParams),
    #[error("observed frequency never leaves nominal")]
    ZeroDeviation,
    #[error("node `{0}` has no fitted neighbour")]
    NoFittedNeighbor(String),
    #[error(transparent)]
    Enf(#[from] EnfError),
}
