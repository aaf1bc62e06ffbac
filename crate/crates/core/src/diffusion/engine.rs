use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::clustering::{estimate_effective_ia_into, estimate_effective_pia_into, static_sets};
use super::config::EngineConfig;
use super::decide::{ia_decide, pia_decide, Decision, PiaDecision};
use super::rounds::{atc_round, isolated_round, AgentState};
use super::schedule::{IaSchedule, NatureState, PiaSchedule, Timeline};
use crate::error::{Error, Result};
use crate::network::{CombinationMatrix, Graph, NeighborSets};
use crate::simplex::{kl_divergence, Pmf, StatMode};

const CLUSTERING_STREAM: u64 = 0;
const DECISION_STREAM: u64 = 1;
const FIRST_AGENT_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum ObservationModel {
    Ia {
        hypotheses: Vec<Pmf>,
        schedule: IaSchedule,
    },
    Pia {
        null: Pmf,
        schedule: PiaSchedule,
    },
}

impl ObservationModel {
    pub fn mode(&self) -> StatMode {
        match self {
            ObservationModel::Ia { .. } => StatMode::Ia,
            ObservationModel::Pia { .. } => StatMode::Pia,
        }
    }

    /// Number of time steps the schedule covers.
    pub fn horizon(&self) -> usize {
        match self {
            ObservationModel::Ia { schedule, .. } => schedule.len(),
            ObservationModel::Pia { schedule, .. } => schedule.len(),
        }
    }
}

/// A validated graph, observation model and engine configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    graph: Graph,
    model: ObservationModel,
    config: EngineConfig,
}

impl Scenario {
    pub fn new(graph: Graph, model: ObservationModel, config: EngineConfig) -> Result<Self> {
        config.validate(graph.len())?;
        if config.mode != model.mode() {
            return Err(Error::Config(format!(
                "engine mode {:?} does not match observation model {:?}",
                config.mode,
                model.mode()
            )));
        }
        let labels = graph.cluster_labels();
        match &model {
            ObservationModel::Ia {
                hypotheses,
                schedule,
            } => {
                let first = hypotheses
                    .first()
                    .ok_or_else(|| Error::Config("no hypotheses".into()))?;
                if let Some(h) = hypotheses.iter().find(|h| h.len() != first.len()) {
                    return Err(Error::AlphabetMismatch {
                        expected: first.len(),
                        found: h.len(),
                    });
                }
                for (c, timeline) in schedule.clusters() {
                    if !labels.contains(&c) {
                        return Err(Error::Schedule(format!(
                            "schedule references cluster {c}, which is not in the graph"
                        )));
                    }
                    if let Some(s) = timeline
                        .segments()
                        .iter()
                        .find(|s| s.state >= hypotheses.len())
                    {
                        return Err(Error::Schedule(format!(
                            "cluster {c} scheduled under hypothesis {} of {}",
                            s.state + 1,
                            hypotheses.len()
                        )));
                    }
                }
                check_covered(&labels, schedule.clusters().map(|(c, _)| c))?;
            }
            ObservationModel::Pia { null, schedule } => {
                for (e, alts) in schedule.epochs().iter().enumerate() {
                    for (&c, p) in alts {
                        if !labels.contains(&c) {
                            return Err(Error::Schedule(format!(
                                "H1 epoch {} references cluster {c}, which is not in the graph",
                                e + 1
                            )));
                        }
                        if p.len() != null.len() {
                            return Err(Error::AlphabetMismatch {
                                expected: null.len(),
                                found: p.len(),
                            });
                        }
                    }
                    check_covered(&labels, alts.keys().copied())?;
                }
            }
        }
        Ok(Scenario {
            graph,
            model,
            config,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn model(&self) -> &ObservationModel {
        &self.model
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn horizon(&self) -> usize {
        self.model.horizon()
    }

    /// Copy with a different engine configuration (validated again).
    pub fn with_config(&self, config: EngineConfig) -> Result<Self> {
        Scenario::new(self.graph.clone(), self.model.clone(), config)
    }

    /// Copy with a different observation model (validated again).
    pub fn with_model(&self, model: ObservationModel) -> Result<Self> {
        Scenario::new(self.graph.clone(), model, self.config.clone())
    }

    /// Length of the status vectors: H for informed agents, M otherwise.
    pub fn status_dim(&self) -> usize {
        match &self.model {
            ObservationModel::Ia { hypotheses, .. } => hypotheses.len(),
            ObservationModel::Pia { null, .. } => null.len(),
        }
    }
}

fn check_covered(labels: &BTreeSet<u32>, present: impl Iterator<Item = u32>) -> Result<()> {
    let present: BTreeSet<u32> = present.collect();
    if let Some(c) = labels.iter().find(|c| !present.contains(c)) {
        return Err(Error::Schedule(format!("no observation model for cluster {c}")));
    }
    Ok(())
}

/// Snapshot of every agent's iterates at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: usize,
    pub w: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `decisions[i - 1][k]` is agent `k`'s decision after step `i`.
    pub decisions: Vec<Vec<Decision>>,
    pub snapshots: Vec<Snapshot>,
    pub final_states: Vec<AgentState>,
}

/// Step-by-step simulator of the adaptive network for one seed.
pub struct Engine<'a> {
    scenario: &'a Scenario,
    states: Vec<AgentState>,
    time: usize,
    agent_rngs: Vec<ChaCha8Rng>,
    clustering_rng: ChaCha8Rng,
    decision_rng: ChaCha8Rng,
    /// Statistic vector for each observed symbol.
    stat_table: Vec<Vec<f64>>,
    sources: Vec<Pmf>,
    /// Per cluster slot, the timeline of indices into `sources`.
    timelines: Vec<Timeline<usize>>,
    cluster_slot: Vec<usize>,
    symbols: Vec<usize>,
    sets: NeighborSets,
    matrix: CombinationMatrix,
    static_matrix: bool,
    argmax: Vec<usize>,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl<'a> Engine<'a> {
    pub fn new(scenario: &'a Scenario, seed: u64) -> Result<Self> {
        let graph = &scenario.graph;
        let labels: Vec<u32> = graph.cluster_labels().into_iter().collect();
        let cluster_slot = (0..graph.len())
            .map(|k| labels.binary_search(&graph.cluster(k)).expect("label present"))
            .collect();

        let (stat_table, sources, timelines, init) = match &scenario.model {
            ObservationModel::Ia {
                hypotheses,
                schedule,
            } => {
                let m = hypotheses[0].len();
                let table = (0..m)
                    .map(|x| hypotheses.iter().map(|h| h.probs()[x].ln()).collect())
                    .collect();
                let timelines = labels
                    .iter()
                    .map(|&c| schedule.timeline(c).expect("validated").clone())
                    .collect();
                (table, hypotheses.clone(), timelines, 0.0)
            }
            ObservationModel::Pia { null, schedule } => {
                let m = null.len();
                let table = (0..m)
                    .map(|x| (0..m).map(|y| if x == y { 1.0 } else { 0.0 }).collect())
                    .collect();
                // Source 0 is the null; alternatives follow in (epoch, cluster) order.
                let mut sources = vec![null.clone()];
                let mut ids = Vec::new();
                for alts in schedule.epochs() {
                    let row: Vec<usize> = labels
                        .iter()
                        .map(|c| {
                            sources.push(alts[c].clone());
                            sources.len() - 1
                        })
                        .collect();
                    ids.push(row);
                }
                let timelines = (0..labels.len())
                    .map(|slot| {
                        schedule.nature().map(|s| match s {
                            NatureState::H0 => 0,
                            NatureState::H1(e) => ids[*e][slot],
                        })
                    })
                    .collect();
                (table, sources, timelines, 1.0 / m as f64)
            }
        };

        let dim = scenario.status_dim();
        let states = (0..graph.len()).map(|_| AgentState::new(dim, init)).collect();
        let agent_rngs = (0..graph.len() as u64)
            .map(|k| stream(seed, FIRST_AGENT_STREAM + k))
            .collect();

        let rule = scenario.config.clustering;
        let (sets, static_matrix) = match static_sets(graph, rule) {
            Some(sets) => (sets, true),
            None => (NeighborSets::new(), false),
        };
        let mut matrix = CombinationMatrix::identity(graph.len());
        if static_matrix {
            matrix.rebuild_from_sets(graph, &sets, &scenario.config.self_weights)?;
        }

        Ok(Engine {
            scenario,
            states,
            time: 0,
            agent_rngs,
            clustering_rng: stream(seed, CLUSTERING_STREAM),
            decision_rng: stream(seed, DECISION_STREAM),
            stat_table,
            sources,
            timelines,
            cluster_slot,
            symbols: vec![0; graph.len()],
            sets,
            matrix,
            static_matrix,
            argmax: Vec::new(),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        self.scenario
    }

    /// Number of completed steps.
    pub fn time(&self) -> usize {
        self.time
    }

    pub fn states(&self) -> &[AgentState] {
        &self.states
    }

    /// Symbols observed at the latest step (0-based).
    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// Neighbor sets used at the latest step.
    pub fn effective_sets(&self) -> &NeighborSets {
        &self.sets
    }

    pub fn combination(&self) -> &CombinationMatrix {
        &self.matrix
    }

    /// Advances one synchronous round.
    pub fn step(&mut self) -> Result<()> {
        let next = self.time + 1;
        let graph = &self.scenario.graph;
        let config = &self.scenario.config;

        let mut source_now = Vec::with_capacity(self.timelines.len());
        for t in &self.timelines {
            source_now.push(*t.at(next).ok_or_else(|| {
                Error::Schedule(format!(
                    "schedule shorter than horizon: no state of nature at step {next}"
                ))
            })?);
        }

        if !self.static_matrix {
            match config.mode {
                StatMode::Ia => estimate_effective_ia_into(
                    &self.states,
                    graph,
                    config.clustering,
                    &mut self.clustering_rng,
                    &mut self.argmax,
                    &mut self.sets,
                ),
                StatMode::Pia => estimate_effective_pia_into(
                    &self.states,
                    graph,
                    config.clustering,
                    config.delta,
                    &mut self.sets,
                ),
            }
            self.matrix
                .rebuild_from_sets(graph, &self.sets, &config.self_weights)?;
        }

        for (k, rng) in self.agent_rngs.iter_mut().enumerate() {
            let src = source_now[self.cluster_slot[k]];
            self.symbols[k] = self.sources[src].sample(rng);
        }
        let stats: Vec<&[f64]> = self
            .symbols
            .iter()
            .map(|&x| self.stat_table[x].as_slice())
            .collect();
        isolated_round(&mut self.states, &stats, config.mu)?;
        atc_round(&mut self.states, &stats, &self.matrix, config.mu)?;
        self.time = next;
        Ok(())
    }

    pub fn run(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Current decision of agent `k`; also stored as its `last_decision`.
    pub fn decide(&mut self, k: usize) -> Result<Decision> {
        let decision = match &self.scenario.model {
            ObservationModel::Ia { .. } => {
                Decision::Hypothesis(ia_decide(&self.states[k].w, &mut self.decision_rng))
            }
            ObservationModel::Pia { null, .. } => Decision::Binary(pia_decide(
                &self.states[k].w,
                null,
                self.scenario.config.gamma,
            )?),
        };
        self.states[k].last_decision = Some(decision);
        Ok(decision)
    }

    pub fn decide_all(&mut self) -> Result<Vec<Decision>> {
        (0..self.states.len()).map(|k| self.decide(k)).collect()
    }

    /// `D(w_k || p0)` for partially informed agents.
    pub fn divergence_from_null(&self, k: usize) -> Result<f64> {
        match &self.scenario.model {
            ObservationModel::Pia { null, .. } => kl_divergence(&self.states[k].w, null),
            ObservationModel::Ia { .. } => Err(Error::InvalidArgument(
                "divergence from the null is only defined for PIA scenarios".into(),
            )),
        }
    }

    /// Correct decision for agent `k` at 1-based time `i`.
    pub fn truth(&self, k: usize, i: usize) -> Option<Decision> {
        let cluster = self.scenario.graph.cluster(k);
        match &self.scenario.model {
            ObservationModel::Ia { schedule, .. } => {
                schedule.hypothesis(cluster, i).map(Decision::Hypothesis)
            }
            ObservationModel::Pia { schedule, .. } => schedule.state(i).map(|s| {
                Decision::Binary(match s {
                    NatureState::H0 => PiaDecision::H0,
                    NatureState::H1(_) => PiaDecision::H1,
                })
            }),
        }
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.time,
            w: self.states.iter().map(|s| s.w.clone()).collect(),
            z: self.states.iter().map(|s| s.z.clone()).collect(),
        }
    }

    /// Runs `n` steps recording every decision and, if configured, periodic snapshots.
    pub fn record(mut self, n: usize) -> Result<Trajectory> {
        let stride = self.scenario.config.record_stride;
        let mut decisions = Vec::with_capacity(n);
        let mut snapshots = Vec::new();
        if stride > 0 {
            snapshots.push(self.snapshot());
        }
        for _ in 0..n {
            self.step()?;
            decisions.push(self.decide_all()?);
            if stride > 0 && self.time.is_multiple_of(stride) {
                snapshots.push(self.snapshot());
            }
        }
        Ok(Trajectory {
            decisions,
            snapshots,
            final_states: self.states,
        })
    }
}

fn run_mode(scenario: &Scenario, n: usize, seed: u64, mode: StatMode) -> Result<Trajectory> {
    if scenario.config.mode != mode {
        return Err(Error::Config(format!(
            "expected a {mode:?} scenario, got {:?}",
            scenario.config.mode
        )));
    }
    if scenario.horizon() < n {
        return Err(Error::Schedule(format!(
            "schedule shorter than horizon: covers {} of {n} steps",
            scenario.horizon()
        )));
    }
    Engine::new(scenario, seed)?.record(n)
}

/// Informed-agent algorithm for `n` steps with per-step decisions.
pub fn run_ia(scenario: &Scenario, n: usize, seed: u64) -> Result<Trajectory> {
    run_mode(scenario, n, seed, StatMode::Ia)
}

/// Partially-informed-agent algorithm for `n` steps with per-step decisions.
pub fn run_pia(scenario: &Scenario, n: usize, seed: u64) -> Result<Trajectory> {
    run_mode(scenario, n, seed, StatMode::Pia)
}
