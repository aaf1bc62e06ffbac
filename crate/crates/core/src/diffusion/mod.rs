//! ATC diffusion engine for informed and partially informed agents.

mod clustering;
mod config;
mod decide;
mod engine;
mod rounds;
mod schedule;

pub use clustering::{estimate_effective_ia, estimate_effective_pia, static_sets};
pub use config::{
    ClusteringRule, EngineConfig, DEFAULT_DELTA, DEFAULT_SELF_WEIGHT, DEFAULT_STEP_SIZE,
};
pub use decide::{argmax_tie_break, ia_decide, pia_decide, Decision, PiaDecision};
pub use engine::{run_ia, run_pia, Engine, ObservationModel, Scenario, Snapshot, Trajectory};
pub use rounds::{atc_round, cta_round, isolated_round, lms_step, AgentState};
pub use schedule::{IaSchedule, NatureState, PiaSchedule, Segment, Timeline};
