//! Steady-state Gaussian approximation of agent status and the error bounds built on it.

mod bounds;
mod gaussian;

pub use bounds::{
    bound_error_ia, bound_error_pia, quantile, quantile_sorted, BoundKind, Estimate, PiaBound,
    MIN_MC_COUNT, TIE_TOLERANCE,
};
pub use gaussian::{
    lambda_matrix, mean_vector, sample_steady_state, steady_state_distribution, GaussianSampler,
    GaussianSummary, StatisticModel, SteadyStateKind, EIGEN_CLAMP, PSD_TOLERANCE,
};
