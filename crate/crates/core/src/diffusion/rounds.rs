use super::decide::Decision;
use crate::error::{Error, Result};
use crate::network::CombinationMatrix;

/// One LMS-for-decision update: the convex combination `mu d + (1 - mu) prev`.
#[inline]
pub fn lms_step(prev: f64, d: f64, mu: f64) -> f64 {
    prev + mu * (d - prev)
}

/// Status of one agent: combined iterate `w`, isolated iterate `z`, scratch `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentState {
    pub w: Vec<f64>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    pub last_decision: Option<Decision>,
}

impl AgentState {
    pub fn new(dim: usize, init: f64) -> Self {
        AgentState {
            w: vec![init; dim],
            z: vec![init; dim],
            v: vec![init; dim],
            last_decision: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }
}

fn check_dims(states: &[AgentState], stats: &[&[f64]], a: Option<&CombinationMatrix>) -> Result<()> {
    if stats.len() != states.len() {
        return Err(Error::Dimension(format!(
            "{} statistic vectors for {} agents",
            stats.len(),
            states.len()
        )));
    }
    if let Some(a) = a {
        if a.size() != states.len() {
            return Err(Error::Dimension(format!(
                "combination matrix of size {} for {} agents",
                a.size(),
                states.len()
            )));
        }
    }
    for (k, (s, d)) in states.iter().zip(stats).enumerate() {
        if s.w.len() != d.len() || s.z.len() != d.len() || s.v.len() != d.len() {
            return Err(Error::Dimension(format!(
                "agent {} has status length {} but statistic length {}",
                k + 1,
                s.w.len(),
                d.len()
            )));
        }
    }
    Ok(())
}

/// Isolated update of every `z`, ignoring the network.
pub fn isolated_round(states: &mut [AgentState], stats: &[&[f64]], mu: f64) -> Result<()> {
    check_dims(states, stats, None)?;
    for (s, d) in states.iter_mut().zip(stats) {
        for (z, &x) in s.z.iter_mut().zip(d.iter()) {
            *z = lms_step(*z, x, mu);
        }
    }
    Ok(())
}

/// Synchronous adapt-then-combine round on `w`.
///
/// Every agent adapts into `v` before any agent combines, so the combination
/// reads only values produced in this round.
pub fn atc_round(
    states: &mut [AgentState],
    stats: &[&[f64]],
    a: &CombinationMatrix,
    mu: f64,
) -> Result<()> {
    check_dims(states, stats, Some(a))?;
    for (s, d) in states.iter_mut().zip(stats) {
        for ((v, &w), &x) in s.v.iter_mut().zip(&s.w).zip(d.iter()) {
            *v = lms_step(w, x, mu);
        }
    }
    let dim = states.first().map_or(0, AgentState::dim);
    let mut combined = vec![0.0; dim];
    for k in 0..states.len() {
        combined.iter_mut().for_each(|c| *c = 0.0);
        let (cols, weights) = a.row(k);
        for (&l, &weight) in cols.iter().zip(weights) {
            for (c, &v) in combined.iter_mut().zip(&states[l].v) {
                *c += weight * v;
            }
        }
        states[k].w.copy_from_slice(&combined);
    }
    Ok(())
}

/// Synchronous combine-then-adapt round on `w`.
pub fn cta_round(
    states: &mut [AgentState],
    stats: &[&[f64]],
    a: &CombinationMatrix,
    mu: f64,
) -> Result<()> {
    check_dims(states, stats, Some(a))?;
    let dim = states.first().map_or(0, AgentState::dim);
    let mut combined = vec![0.0; dim];
    for k in 0..states.len() {
        combined.iter_mut().for_each(|c| *c = 0.0);
        let (cols, weights) = a.row(k);
        for (&l, &weight) in cols.iter().zip(weights) {
            for (c, &w) in combined.iter_mut().zip(&states[l].w) {
                *c += weight * w;
            }
        }
        states[k].v.copy_from_slice(&combined);
    }
    for (s, d) in states.iter_mut().zip(stats) {
        for ((w, &v), &x) in s.w.iter_mut().zip(&s.v).zip(d.iter()) {
            *w = lms_step(v, x, mu);
        }
    }
    Ok(())
}
