//! JSON scenario files.
//!
//! A scenario names a graph, a PMF family parameterized by `alpha`, an
//! observation schedule and engine parameters. Everything except `alpha` and
//! the horizon is fixed by the file; `ScenarioSpec::scenario_at` produces a
//! runnable [`Scenario`] for one `alpha`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diffusion::{
    ClusteringRule, EngineConfig, IaSchedule, NatureState, ObservationModel, PiaSchedule, Scenario,
    Segment, Timeline, DEFAULT_DELTA, DEFAULT_SELF_WEIGHT, DEFAULT_STEP_SIZE,
};
use crate::error::{Error, Result};
use crate::network::{build_graph, Graph, GraphSpec, GraphWarning};
use crate::simplex::{Pmf, StatMode};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    File { file: PathBuf },
    Inline(GraphSpec),
}

/// PMFs as functions of `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PmfFamily {
    /// Four PMFs over three symbols, moving apart from `base` as `alpha` grows:
    /// `base`, `base + [a, 0, -a]`, `base + [-a, 0, a]`, `base + [-a/2, a, -a/2]`.
    AlphaShift { base: [f64; 3], names: [String; 4] },
    /// Named PMFs that do not depend on `alpha`.
    Explicit { pmfs: BTreeMap<String, Vec<f64>> },
}

impl PmfFamily {
    pub fn names(&self) -> Vec<String> {
        match self {
            PmfFamily::AlphaShift { names, .. } => names.to_vec(),
            PmfFamily::Explicit { pmfs } => pmfs.keys().cloned().collect(),
        }
    }

    /// Raw (unvalidated) probability vectors at `alpha`.
    pub fn raw_at(&self, alpha: f64) -> BTreeMap<String, Vec<f64>> {
        match self {
            PmfFamily::AlphaShift { base: [b1, b2, b3], names } => {
                let a = alpha;
                let vectors = [
                    [*b1, *b2, *b3],
                    [b1 + a, *b2, b3 - a],
                    [b1 - a, *b2, b3 + a],
                    [b1 - a / 2.0, b2 + a, b3 - a / 2.0],
                ];
                names
                    .iter()
                    .cloned()
                    .zip(vectors.iter().map(|v| v.to_vec()))
                    .collect()
            }
            PmfFamily::Explicit { pmfs } => pmfs.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    /// Omitted on the last segment to extend it to the horizon.
    #[serde(default)]
    pub steps: Option<usize>,
    pub state: String,
    /// H1 epoch (1-based) for partially informed scenarios.
    #[serde(default)]
    pub epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Ia {
        hypotheses: Vec<String>,
        /// Cluster label to its segments; states name hypotheses.
        schedule: BTreeMap<String, Vec<SegmentSpec>>,
    },
    Pia {
        null: String,
        /// Network-wide segments with state `h0` or `h1`.
        segments: Vec<SegmentSpec>,
        /// For each H1 epoch, cluster label to the name of its alternative PMF.
        epochs: Vec<BTreeMap<String, String>>,
    },
}

impl ModelSpec {
    pub fn mode(&self) -> StatMode {
        match self {
            ModelSpec::Ia { .. } => StatMode::Ia,
            ModelSpec::Pia { .. } => StatMode::Pia,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Threshold {
    Value(f64),
    Named(Infinite),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Infinite {
    #[serde(rename = "inf")]
    Inf,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::Value(v) => v,
            Threshold::Named(Infinite::Inf) => f64::INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v.is_infinite() {
            Threshold::Named(Infinite::Inf)
        } else {
            Threshold::Value(v)
        }
    }
}

fn default_mu() -> f64 {
    DEFAULT_STEP_SIZE
}
fn default_self_weight() -> f64 {
    DEFAULT_SELF_WEIGHT
}
fn default_delta() -> Threshold {
    Threshold::Value(DEFAULT_DELTA)
}
fn default_rule() -> ClusteringRule {
    ClusteringRule::Paper
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSpec {
    #[serde(default = "default_mu")]
    pub mu: f64,
    #[serde(default = "default_self_weight")]
    pub self_weight: f64,
    #[serde(default = "default_delta")]
    pub delta: Threshold,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_rule")]
    pub clustering: ClusteringRule,
}

impl Default for EngineSpec {
    fn default() -> Self {
        EngineSpec {
            mu: DEFAULT_STEP_SIZE,
            self_weight: DEFAULT_SELF_WEIGHT,
            delta: default_delta(),
            gamma: 0.0,
            clustering: ClusteringRule::Paper,
        }
    }
}

/// On-disk layout of a scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub notes: String,
    pub graph: GraphSource,
    pub pmfs: PmfFamily,
    pub model: ModelSpec,
    #[serde(default)]
    pub engine: EngineSpec,
    #[serde(default)]
    pub alphas: Vec<f64>,
    pub horizon: usize,
    #[serde(default)]
    pub seed: u64,
    /// 1-based agents reported by default; all agents when absent.
    #[serde(default)]
    pub agents: Option<Vec<usize>>,
}

/// A loaded, validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    pub file: ScenarioFile,
    pub graph: Graph,
    pub graph_warnings: Vec<GraphWarning>,
    /// Hex SHA-256 of the scenario file bytes, when loaded from disk.
    pub sha256: Option<String>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Reads, parses and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioSpec> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::scenario(path.display().to_string(), "file is not valid UTF-8"))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut spec = ScenarioSpec::from_json(&text, base, &path.display().to_string())?;
    spec.sha256 = Some(sha256_hex(&bytes));
    Ok(spec)
}

impl ScenarioSpec {
    /// Parses scenario JSON; graph files resolve relative to `base_dir`.
    pub fn from_json(text: &str, base_dir: &Path, label: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| {
            Error::scenario(
                label,
                format!("line {} column {}: {e}", e.line(), e.column()),
            )
        })?;
        Self::from_file(file, base_dir, label)
    }

    pub fn from_file(file: ScenarioFile, base_dir: &Path, label: &str) -> Result<Self> {
        let (graph, graph_warnings) = match &file.graph {
            GraphSource::File { file: rel } => {
                let path = base_dir.join(rel);
                let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
                let graph = Graph::parse_file(&text).map_err(|e| {
                    Error::scenario(label, format!("graph file {}: {e}", path.display()))
                })?;
                let warnings = if graph.is_connected() {
                    Vec::new()
                } else {
                    vec![GraphWarning::Disconnected {
                        components: graph.components(),
                    }]
                };
                (graph, warnings)
            }
            GraphSource::Inline(spec) => {
                let built =
                    build_graph(spec).map_err(|e| Error::scenario(label, format!("graph: {e}")))?;
                (built.graph, built.warnings)
            }
        };
        let spec = ScenarioSpec {
            file,
            graph,
            graph_warnings,
            sha256: None,
        };
        spec.validate(label)?;
        Ok(spec)
    }

    fn validate(&self, label: &str) -> Result<()> {
        let f = &self.file;
        let err = |msg: String| Error::scenario(label, msg);
        if f.horizon == 0 {
            return Err(err("horizon: must be positive".into()));
        }
        let labels = self.graph.cluster_labels();
        if let Some(agents) = &f.agents {
            if agents.is_empty() {
                return Err(err("agents: empty list".into()));
            }
            if let Some(a) = agents.iter().find(|&&a| a == 0 || a > self.graph.len()) {
                return Err(err(format!(
                    "agents: agent {a} outside 1..={}",
                    self.graph.len()
                )));
            }
        }
        if let PmfFamily::AlphaShift { names, .. } = &f.pmfs {
            let mut sorted = names.to_vec();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != 4 {
                return Err(err("pmfs.names: names must be distinct".into()));
            }
        }
        let alphas: Vec<f64> = if f.alphas.is_empty() {
            vec![0.0]
        } else {
            f.alphas.clone()
        };
        for &alpha in &alphas {
            self.pmfs_at(alpha).map_err(|e| match e {
                Error::InvalidArgument(m) => err(m),
                other => other,
            })?;
        }
        let names = f.pmfs.names();
        let known = |n: &str, field: &str| -> Result<()> {
            if names.iter().any(|m| m == n) {
                Ok(())
            } else {
                Err(err(format!("{field}: unknown PMF '{n}'")))
            }
        };
        let cluster_of = |key: &str, field: &str| -> Result<u32> {
            let c: u32 = key
                .parse()
                .map_err(|_| err(format!("{field}: cluster key '{key}' is not a positive integer")))?;
            if !labels.contains(&c) {
                return Err(err(format!(
                    "{field}: cluster {c} does not exist in the graph (clusters {:?})",
                    labels
                )));
            }
            Ok(c)
        };
        let check_segments = |segs: &[SegmentSpec], field: &str| -> Result<()> {
            if segs.is_empty() {
                return Err(err(format!("{field}: no segments")));
            }
            for (i, s) in segs.iter().enumerate() {
                match s.steps {
                    Some(0) => {
                        return Err(err(format!("{field}[{i}].steps: must be positive")));
                    }
                    None if i + 1 != segs.len() => {
                        return Err(err(format!(
                            "{field}[{i}].steps: only the last segment may omit its length"
                        )));
                    }
                    _ => {}
                }
            }
            Ok(())
        };
        match &f.model {
            ModelSpec::Ia {
                hypotheses,
                schedule,
            } => {
                if hypotheses.is_empty() {
                    return Err(err("model.hypotheses: empty list".into()));
                }
                for h in hypotheses {
                    known(h, "model.hypotheses")?;
                }
                let mut covered = Vec::new();
                for (key, segs) in schedule {
                    let field = format!("model.schedule.{key}");
                    covered.push(cluster_of(key, &field)?);
                    check_segments(segs, &field)?;
                    for (i, s) in segs.iter().enumerate() {
                        if !hypotheses.contains(&s.state) {
                            return Err(err(format!(
                                "{field}[{i}].state: '{}' is not one of the hypotheses",
                                s.state
                            )));
                        }
                    }
                }
                if let Some(c) = labels.iter().find(|c| !covered.contains(c)) {
                    return Err(err(format!("model.schedule: no schedule for cluster {c}")));
                }
            }
            ModelSpec::Pia {
                null,
                segments,
                epochs,
            } => {
                known(null, "model.null")?;
                check_segments(segments, "model.segments")?;
                for (i, s) in segments.iter().enumerate() {
                    let field = format!("model.segments[{i}]");
                    match (s.state.as_str(), s.epoch) {
                        ("h0", None) => {}
                        ("h0", Some(_)) => {
                            return Err(err(format!("{field}.epoch: not allowed under h0")));
                        }
                        ("h1", Some(e)) if e >= 1 && e <= epochs.len() => {}
                        ("h1", _) => {
                            return Err(err(format!(
                                "{field}.epoch: h1 needs an epoch in 1..={}",
                                epochs.len()
                            )));
                        }
                        (other, _) => {
                            return Err(err(format!(
                                "{field}.state: '{other}' is neither h0 nor h1"
                            )));
                        }
                    }
                }
                for (e, alts) in epochs.iter().enumerate() {
                    let mut covered = Vec::new();
                    for (key, name) in alts {
                        let field = format!("model.epochs[{e}].{key}");
                        covered.push(cluster_of(key, &field)?);
                        known(name, &field)?;
                    }
                    if let Some(c) = labels.iter().find(|c| !covered.contains(c)) {
                        return Err(err(format!(
                            "model.epochs[{e}]: no alternative for cluster {c}"
                        )));
                    }
                }
            }
        }
        self.engine_config()
            .validate(self.graph.len())
            .map_err(|e| err(format!("engine: {e}")))?;
        // Build once so schedule errors surface at load time.
        self.scenario_at(alphas[0], f.horizon)
            .map_err(|e| err(e.to_string()))?;
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn mode(&self) -> StatMode {
        self.file.model.mode()
    }

    pub fn horizon(&self) -> usize {
        self.file.horizon
    }

    pub fn seed(&self) -> u64 {
        self.file.seed
    }

    pub fn alphas(&self) -> &[f64] {
        &self.file.alphas
    }

    /// Default 0-based agents to report.
    pub fn agents(&self) -> Vec<usize> {
        match &self.file.agents {
            Some(a) => a.iter().map(|k| k - 1).collect(),
            None => (0..self.graph.len()).collect(),
        }
    }

    /// Validated PMFs at `alpha`, keyed by name.
    pub fn pmfs_at(&self, alpha: f64) -> Result<BTreeMap<String, Pmf>> {
        self.file
            .pmfs
            .raw_at(alpha)
            .into_iter()
            .map(|(name, probs)| {
                if let Some((i, v)) = probs.iter().enumerate().find(|(_, &v)| v.is_nan() || v <= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "pmfs.{name}[{i}] = {v} at alpha = {alpha}: entries must be positive"
                    )));
                }
                let pmf = Pmf::new(probs.clone()).map_err(|e| {
                    Error::InvalidArgument(format!("pmfs.{name} at alpha = {alpha}: {e}"))
                })?;
                Ok((name, pmf))
            })
            .collect()
    }

    pub fn engine_config(&self) -> EngineConfig {
        let e = &self.file.engine;
        EngineConfig::new(self.mode(), self.graph.len())
            .with_mu(e.mu)
            .with_self_weight(e.self_weight)
            .with_delta(e.delta.value())
            .with_gamma(e.gamma)
            .with_clustering(e.clustering)
    }

    /// Runnable scenario at `alpha` whose schedule covers `horizon` steps.
    pub fn scenario_at(&self, alpha: f64, horizon: usize) -> Result<Scenario> {
        self.scenario_with(alpha, horizon, self.engine_config())
    }

    /// As [`ScenarioSpec::scenario_at`] with a replacement engine configuration.
    pub fn scenario_with(&self, alpha: f64, horizon: usize, config: EngineConfig) -> Result<Scenario> {
        let pmfs = self.pmfs_at(alpha)?;
        let model = match &self.file.model {
            ModelSpec::Ia {
                hypotheses,
                schedule,
            } => {
                let hyps = hypotheses.iter().map(|h| pmfs[h].clone()).collect();
                let mut clusters = BTreeMap::new();
                for (key, segs) in schedule {
                    let c: u32 = key.parse().expect("validated cluster key");
                    let timeline = timeline(segs, horizon, |s| {
                        hypotheses.iter().position(|h| *h == s.state).expect("validated")
                    })?;
                    clusters.insert(c, timeline);
                }
                ObservationModel::Ia {
                    hypotheses: hyps,
                    schedule: IaSchedule::new(clusters)?,
                }
            }
            ModelSpec::Pia {
                null,
                segments,
                epochs,
            } => {
                let nature = timeline(segments, horizon, |s| match s.epoch {
                    Some(e) => NatureState::H1(e - 1),
                    None => NatureState::H0,
                })?;
                let alts = epochs
                    .iter()
                    .map(|m| {
                        m.iter()
                            .map(|(k, n)| (k.parse().expect("validated cluster key"), pmfs[n].clone()))
                            .collect()
                    })
                    .collect();
                ObservationModel::Pia {
                    null: pmfs[null].clone(),
                    schedule: PiaSchedule::new(nature, alts)?,
                }
            }
        };
        Scenario::new(self.graph.clone(), model, config)
    }

    /// PIA variant with H0 in force for the whole horizon.
    pub fn null_scenario(&self, alpha: f64, horizon: usize, config: EngineConfig) -> Result<Scenario> {
        let base = self.scenario_with(alpha, horizon, config)?;
        match base.model() {
            ObservationModel::Pia { null, .. } => base.with_model(ObservationModel::Pia {
                null: null.clone(),
                schedule: PiaSchedule::constant_h0(horizon)?,
            }),
            ObservationModel::Ia { .. } => Err(Error::InvalidArgument(
                "null-hypothesis runs need a PIA scenario".into(),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.file).expect("scenario serializes")
    }
}

fn timeline<T>(
    segs: &[SegmentSpec],
    horizon: usize,
    mut state: impl FnMut(&SegmentSpec) -> T,
) -> Result<Timeline<T>> {
    let fixed: usize = segs.iter().filter_map(|s| s.steps).sum();
    let mut out = Vec::with_capacity(segs.len());
    for s in segs {
        let steps = match s.steps {
            Some(n) => n,
            None => {
                if horizon <= fixed {
                    // The open segment still needs one step; the horizon check below
                    // reports shortfalls when it matters.
                    1
                } else {
                    horizon - fixed
                }
            }
        };
        out.push(Segment {
            steps,
            state: state(s),
        });
    }
    let t = Timeline::new(out)?;
    if t.len() < horizon {
        return Err(Error::Schedule(format!(
            "schedule shorter than horizon: covers {} of {horizon} steps",
            t.len()
        )));
    }
    Ok(t)
}
