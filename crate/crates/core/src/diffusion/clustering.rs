//! Online estimation of effective neighbors from the previous round's iterates.

use rand::Rng;

use super::config::ClusteringRule;
use super::decide::argmax_tie_break;
use super::rounds::AgentState;
use crate::network::{Graph, NeighborSets};

/// Neighbor sets for rules that ignore the iterates, `None` otherwise.
pub fn static_sets(graph: &Graph, rule: ClusteringRule) -> Option<NeighborSets> {
    match rule {
        ClusteringRule::Oracle => Some(NeighborSets::from_sets(
            (0..graph.len()).map(|k| graph.effective_neighbors(k)),
        )),
        ClusteringRule::None => Some(NeighborSets::from_sets(
            (0..graph.len()).map(|k| graph.neighbors(k).iter().copied()),
        )),
        ClusteringRule::Paper | ClusteringRule::Naive => None,
    }
}

/// Informed agents: neighbors whose argmax agrees with the agent's own.
///
/// `Paper` compares `z`, `Naive` compares `w`. Ties in the argmax are broken
/// with `rng`, once per agent.
pub fn estimate_effective_ia<R: Rng + ?Sized>(
    states: &[AgentState],
    graph: &Graph,
    rule: ClusteringRule,
    rng: &mut R,
) -> NeighborSets {
    let mut out = NeighborSets::new();
    let mut buf = Vec::new();
    estimate_effective_ia_into(states, graph, rule, rng, &mut buf, &mut out);
    out
}

pub(crate) fn estimate_effective_ia_into<R: Rng + ?Sized>(
    states: &[AgentState],
    graph: &Graph,
    rule: ClusteringRule,
    rng: &mut R,
    argmax: &mut Vec<usize>,
    out: &mut NeighborSets,
) {
    out.clear();
    let use_z = match rule {
        ClusteringRule::Paper => true,
        ClusteringRule::Naive => false,
        ClusteringRule::Oracle | ClusteringRule::None => {
            *out = static_sets(graph, rule).expect("static rule");
            return;
        }
    };
    argmax.clear();
    argmax.extend(states.iter().map(|s| {
        let values = if use_z { &s.z } else { &s.w };
        argmax_tie_break(values, rng)
    }));
    for k in 0..graph.len() {
        let mine = argmax[k];
        out.push_set(
            graph
                .neighbors(k)
                .iter()
                .copied()
                .filter(|&l| l == k || argmax[l] == mine),
        );
    }
}

/// Partially informed agents: neighbors whose `z` lies within Euclidean
/// distance `delta` of the agent's `z`. The agent itself is always included.
pub fn estimate_effective_pia(states: &[AgentState], graph: &Graph, delta: f64) -> NeighborSets {
    let mut out = NeighborSets::new();
    estimate_effective_pia_into(states, graph, ClusteringRule::Paper, delta, &mut out);
    out
}

pub(crate) fn estimate_effective_pia_into(
    states: &[AgentState],
    graph: &Graph,
    rule: ClusteringRule,
    delta: f64,
    out: &mut NeighborSets,
) {
    out.clear();
    let use_z = match rule {
        ClusteringRule::Paper => true,
        ClusteringRule::Naive => false,
        ClusteringRule::Oracle | ClusteringRule::None => {
            *out = static_sets(graph, rule).expect("static rule");
            return;
        }
    };
    fn pick(s: &AgentState, use_z: bool) -> &[f64] {
        if use_z {
            &s.z
        } else {
            &s.w
        }
    }
    let delta_sq = delta * delta;
    for k in 0..graph.len() {
        let mine = pick(&states[k], use_z);
        out.push_set(graph.neighbors(k).iter().copied().filter(|&l| {
            if l == k {
                return true;
            }
            let dist_sq: f64 = mine
                .iter()
                .zip(pick(&states[l], use_z))
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist_sq < delta_sq
        }));
    }
}
