//! Piecewise-constant state-of-nature timelines.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::Pmf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment<T> {
    pub steps: usize,
    pub state: T,
}

/// Contiguous run of segments starting at time 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline<T> {
    segments: Vec<Segment<T>>,
    ends: Vec<usize>,
}

impl<T> Timeline<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::Schedule("timeline has no segments".into()));
        }
        let mut ends = Vec::with_capacity(segments.len());
        let mut total = 0usize;
        for (i, s) in segments.iter().enumerate() {
            if s.steps == 0 {
                return Err(Error::Schedule(format!("segment {} has zero length", i + 1)));
            }
            total += s.steps;
            ends.push(total);
        }
        Ok(Timeline { segments, ends })
    }

    pub fn constant(state: T, steps: usize) -> Result<Self> {
        Self::new(vec![Segment { steps, state }])
    }

    /// Number of time steps covered.
    pub fn len(&self) -> usize {
        *self.ends.last().expect("nonempty timeline")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// State in force at 1-based time `i`, or `None` past the end.
    pub fn at(&self, i: usize) -> Option<&T> {
        if i == 0 {
            return None;
        }
        let idx = self.ends.partition_point(|&e| e < i);
        self.segments.get(idx).map(|s| &s.state)
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Timeline<U> {
        Timeline {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    steps: s.steps,
                    state: f(&s.state),
                })
                .collect(),
            ends: self.ends.clone(),
        }
    }
}

/// Per-cluster hypothesis timelines for informed agents (0-based hypothesis indices).
#[derive(Debug, Clone, PartialEq)]
pub struct IaSchedule {
    clusters: BTreeMap<u32, Timeline<usize>>,
}

impl IaSchedule {
    pub fn new(clusters: BTreeMap<u32, Timeline<usize>>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::Schedule("no cluster timelines".into()));
        }
        Ok(IaSchedule { clusters })
    }

    /// Every listed cluster stays under its hypothesis for `steps` steps.
    pub fn constant(assignment: &[(u32, usize)], steps: usize) -> Result<Self> {
        let mut clusters = BTreeMap::new();
        for &(c, h) in assignment {
            clusters.insert(c, Timeline::constant(h, steps)?);
        }
        Self::new(clusters)
    }

    pub fn timeline(&self, cluster: u32) -> Option<&Timeline<usize>> {
        self.clusters.get(&cluster)
    }

    pub fn clusters(&self) -> impl Iterator<Item = (u32, &Timeline<usize>)> {
        self.clusters.iter().map(|(&c, t)| (c, t))
    }

    /// Horizon covered by every cluster.
    pub fn len(&self) -> usize {
        self.clusters.values().map(Timeline::len).min().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hypothesis(&self, cluster: u32, i: usize) -> Option<usize> {
        self.clusters.get(&cluster)?.at(i).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NatureState {
    H0,
    /// Alternative in force, indexing the epoch table of the schedule.
    H1(usize),
}

/// Network-wide H0/H1 timeline plus the per-cluster alternative of each H1 epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct PiaSchedule {
    nature: Timeline<NatureState>,
    epochs: Vec<BTreeMap<u32, Pmf>>,
}

impl PiaSchedule {
    pub fn new(nature: Timeline<NatureState>, epochs: Vec<BTreeMap<u32, Pmf>>) -> Result<Self> {
        for s in nature.segments() {
            if let NatureState::H1(e) = s.state {
                if e >= epochs.len() {
                    return Err(Error::Schedule(format!(
                        "H1 epoch {} referenced but only {} defined",
                        e + 1,
                        epochs.len()
                    )));
                }
            }
        }
        if let Some(e) = epochs.iter().position(BTreeMap::is_empty) {
            return Err(Error::Schedule(format!("H1 epoch {} has no alternatives", e + 1)));
        }
        Ok(PiaSchedule { nature, epochs })
    }

    pub fn constant_h0(steps: usize) -> Result<Self> {
        Self::new(Timeline::constant(NatureState::H0, steps)?, Vec::new())
    }

    pub fn constant_h1(alternatives: BTreeMap<u32, Pmf>, steps: usize) -> Result<Self> {
        Self::new(Timeline::constant(NatureState::H1(0), steps)?, vec![alternatives])
    }

    pub fn nature(&self) -> &Timeline<NatureState> {
        &self.nature
    }

    pub fn epochs(&self) -> &[BTreeMap<u32, Pmf>] {
        &self.epochs
    }

    pub fn len(&self) -> usize {
        self.nature.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn state(&self, i: usize) -> Option<NatureState> {
        self.nature.at(i).copied()
    }

    pub fn alternative(&self, epoch: usize, cluster: u32) -> Option<&Pmf> {
        self.epochs.get(epoch)?.get(&cluster)
    }
}
