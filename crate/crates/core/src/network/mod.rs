//! Agent graphs, combination matrices and the variance-reduction factor.

mod beta;
mod combination;
mod graph;

pub use beta::{
    beta_at_step_size, beta_factor, BetaFactors, BETA_STEP_SIZES, CONVERGENCE_TOLERANCE,
    SERIES_CUTOFF,
};
pub use combination::{
    combination_from_sets, matrix_power_rows, CombinationMatrix, NeighborSets,
    STOCHASTIC_TOLERANCE,
};
pub use graph::{build_graph, BuiltGraph, GeometricClusters, Graph, GraphSpec, GraphWarning};
