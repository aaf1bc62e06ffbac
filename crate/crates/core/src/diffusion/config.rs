use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::StatMode;

pub const DEFAULT_STEP_SIZE: f64 = 0.05;
pub const DEFAULT_SELF_WEIGHT: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 0.2;

/// How each agent estimates which neighbors share its cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusteringRule {
    /// Compare the isolated iterates `z` (argmax agreement for IA, distance below `delta` for PIA).
    Paper,
    /// Same comparison on the combined status `w`.
    Naive,
    /// True same-cluster neighbors.
    Oracle,
    /// Every neighbor.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    pub mode: StatMode,
    pub mu: f64,
    pub self_weights: Vec<f64>,
    /// PIA clustering distance threshold; `f64::INFINITY` admits every neighbor.
    pub delta: f64,
    /// PIA decision threshold in nats.
    pub gamma: f64,
    pub clustering: ClusteringRule,
    /// Snapshot `w`/`z` every this many steps in recorded runs; 0 disables snapshots.
    pub record_stride: usize,
}

impl EngineConfig {
    pub fn new(mode: StatMode, agents: usize) -> Self {
        EngineConfig {
            mode,
            mu: DEFAULT_STEP_SIZE,
            self_weights: vec![DEFAULT_SELF_WEIGHT; agents],
            delta: DEFAULT_DELTA,
            gamma: 0.0,
            clustering: ClusteringRule::Paper,
            record_stride: 0,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_clustering(mut self, rule: ClusteringRule) -> Self {
        self.clustering = rule;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_self_weight(mut self, a: f64) -> Self {
        self.self_weights.iter_mut().for_each(|w| *w = a);
        self
    }

    pub fn validate(&self, agents: usize) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::Config(format!("mu = {} outside (0, 1)", self.mu)));
        }
        if self.self_weights.len() != agents {
            return Err(Error::Config(format!(
                "{} self weights for {agents} agents",
                self.self_weights.len()
            )));
        }
        if let Some((k, a)) = self
            .self_weights
            .iter()
            .enumerate()
            .find(|(_, a)| !(**a > 0.0 && **a <= 1.0))
        {
            return Err(Error::Config(format!(
                "self weight {a} of agent {} outside (0, 1]",
                k + 1
            )));
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return Err(Error::Config(format!("delta = {} is negative", self.delta)));
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return Err(Error::Config(format!("gamma = {} is not a finite nonnegative value", self.gamma)));
        }
        Ok(())
    }
}
