//! Replicated Monte Carlo experiments over a scenario file.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::pool::map_indexed;
use super::results::{format_g9, Metadata, ResultRow, ResultTable};
use super::scenario::ScenarioSpec;
use crate::diffusion::{
    static_sets, ClusteringRule, Decision, Engine, EngineConfig, NatureState, ObservationModel,
    Scenario,
};
use crate::error::{Error, Result};
use crate::network::{beta_factor, combination_from_sets, BetaFactors, Graph};
use crate::simplex::{Pmf, StatMode};
use crate::theory::{
    bound_error_ia, bound_error_pia, lambda_matrix, quantile, BoundKind, Estimate, StatisticModel,
};

/// Replica `r` of a sweep runs with seed `base + r`.
pub fn replica_seed(base: u64, r: usize) -> u64 {
    base.wrapping_add(r as u64)
}

/// Shared settings for a replicated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub alphas: Vec<f64>,
    pub horizon: usize,
    pub runs: usize,
    /// 0-based agents to report.
    pub agents: Vec<usize>,
    pub seed: u64,
    pub workers: usize,
}

impl Sweep {
    /// The scenario's own alphas, horizon, agents and seed.
    pub fn from_spec(spec: &ScenarioSpec, runs: usize) -> Self {
        Sweep {
            alphas: spec.alphas().to_vec(),
            horizon: spec.horizon(),
            runs,
            agents: spec.agents(),
            seed: spec.seed(),
            workers: 1,
        }
    }

    pub fn with_alphas(mut self, alphas: Vec<f64>) -> Self {
        self.alphas = alphas;
        self
    }

    pub fn with_horizon(mut self, horizon: usize) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_runs(mut self, runs: usize) -> Self {
        self.runs = runs;
        self
    }

    pub fn with_agents(mut self, agents: Vec<usize>) -> Self {
        self.agents = agents;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    fn check(&self, agents: usize) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::InvalidArgument("agent subset is empty".into()));
        }
        if let Some(&k) = self.agents.iter().find(|&&k| k >= agents) {
            return Err(Error::InvalidArgument(format!(
                "agent {} outside 1..={agents}",
                k + 1
            )));
        }
        if self.runs == 0 {
            return Err(Error::InvalidArgument("runs must be positive".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be positive".into()));
        }
        Ok(())
    }

    fn check_alphas(&self) -> Result<()> {
        if self.alphas.is_empty() {
            Err(Error::InvalidArgument("alpha list is empty".into()))
        } else {
            Ok(())
        }
    }
}

fn table(spec: &ScenarioSpec) -> ResultTable {
    ResultTable::new(Metadata {
        spec_sha256: spec.sha256.clone(),
        ..Metadata::default()
    })
}

fn estimate_row(
    experiment: &str,
    agent: usize,
    alpha: Option<f64>,
    metric: &str,
    est: Estimate,
    seed: u64,
) -> ResultRow {
    ResultRow {
        experiment: experiment.into(),
        agent: agent + 1,
        alpha,
        metric: metric.into(),
        value: est.value,
        stderr: Some(est.stderr),
        runs: est.count,
        seed,
    }
}

fn plain_row(
    experiment: &str,
    agent: usize,
    alpha: Option<f64>,
    metric: &str,
    value: f64,
    runs: usize,
    seed: u64,
) -> ResultRow {
    ResultRow {
        experiment: experiment.into(),
        agent: agent + 1,
        alpha,
        metric: metric.into(),
        value,
        stderr: None,
        runs,
        seed,
    }
}

/// Runs every replica to the horizon and evaluates `probe` on the final engine.
fn replicate<T: Send>(
    scenario: &Scenario,
    sweep: &Sweep,
    probe: impl Fn(&mut Engine) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    map_indexed(sweep.workers, sweep.runs, |r| {
        let mut engine = Engine::new(scenario, replica_seed(sweep.seed, r))?;
        engine.run(sweep.horizon)?;
        probe(&mut engine)
    })
}

fn count_hits(outcomes: &[Vec<bool>], column: usize) -> usize {
    outcomes.iter().filter(|o| o[column]).count()
}

fn require_mode(spec: &ScenarioSpec, mode: StatMode) -> Result<()> {
    if spec.mode() == mode {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "scenario '{}' is {:?}, this experiment needs {mode:?}",
            spec.name(),
            spec.mode()
        )))
    }
}

/// Probability that an informed agent's decision at the horizon misses its cluster's hypothesis.
pub fn run_steady_state_error(spec: &ScenarioSpec, sweep: &Sweep) -> Result<ResultTable> {
    require_mode(spec, StatMode::Ia)?;
    sweep.check(spec.graph.len())?;
    sweep.check_alphas()?;
    let mut out = table(spec);
    for &alpha in &sweep.alphas {
        let scenario = spec.scenario_at(alpha, sweep.horizon)?;
        let outcomes = replicate(&scenario, sweep, |engine| {
            sweep
                .agents
                .iter()
                .map(|&k| {
                    let decision = engine.decide(k)?;
                    Ok(Some(decision) != engine.truth(k, sweep.horizon))
                })
                .collect::<Result<Vec<bool>>>()
        })?;
        for (col, &k) in sweep.agents.iter().enumerate() {
            let est = Estimate::from_hits(count_hits(&outcomes, col), sweep.runs);
            out.push(estimate_row("sweep-ia", k, Some(alpha), "p_error", est, sweep.seed));
        }
    }
    Ok(out)
}

/// Per-agent decision thresholds, keyed by 0-based agent.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Gammas(pub BTreeMap<usize, f64>);

impl Gammas {
    pub fn get(&self, k: usize) -> Result<f64> {
        self.0
            .get(&k)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("no threshold for agent {}", k + 1)))
    }

    /// Reads `gamma` rows from a table.
    pub fn from_table(table: &ResultTable) -> Result<Self> {
        let map: BTreeMap<usize, f64> = table
            .rows
            .iter()
            .filter(|r| r.metric == "gamma")
            .map(|r| (r.agent - 1, r.value))
            .collect();
        if map.is_empty() {
            return Err(Error::InvalidArgument("table has no gamma rows".into()));
        }
        Ok(Gammas(map))
    }
}

/// Minimum replica count accepted for a type-I target.
pub fn min_calibration_runs(type1_target: f64) -> usize {
    (10.0 / type1_target).ceil() as usize
}

/// Thresholds whose H0 exceedance frequency is `type1_target`, one per agent.
///
/// Runs the scenario with H0 for the whole horizon and takes the empirical
/// `1 - type1_target` quantile of `D(w_k(n) || p0)` across replicas.
pub fn calibrate_gamma_empirical(
    spec: &ScenarioSpec,
    sweep: &Sweep,
    type1_target: f64,
) -> Result<(Gammas, ResultTable)> {
    require_mode(spec, StatMode::Pia)?;
    sweep.check(spec.graph.len())?;
    if !(type1_target > 0.0 && type1_target < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "type-I target {type1_target} outside (0, 1)"
        )));
    }
    let needed = min_calibration_runs(type1_target);
    if sweep.runs < needed {
        return Err(Error::InvalidArgument(format!(
            "{} runs are too few for a type-I target of {type1_target}; need at least {needed}",
            sweep.runs
        )));
    }
    let alpha = sweep.alphas.first().copied().unwrap_or(0.0);
    let scenario = spec.null_scenario(alpha, sweep.horizon, spec.engine_config())?;
    let stats = replicate(&scenario, sweep, |engine| {
        sweep
            .agents
            .iter()
            .map(|&k| engine.divergence_from_null(k))
            .collect::<Result<Vec<f64>>>()
    })?;
    let mut gammas = Gammas::default();
    let mut out = table(spec);
    for (col, &k) in sweep.agents.iter().enumerate() {
        let column: Vec<f64> = stats.iter().map(|s| s[col]).collect();
        let gamma = quantile(&column, 1.0 - type1_target)?;
        gammas.0.insert(k, gamma);
        out.push(plain_row("calibrate-gamma", k, None, "gamma", gamma, sweep.runs, sweep.seed));
    }
    Ok((gammas, out))
}

/// H0 false-alarm frequency at the given thresholds.
pub fn run_type1_error(spec: &ScenarioSpec, gammas: &Gammas, sweep: &Sweep) -> Result<ResultTable> {
    require_mode(spec, StatMode::Pia)?;
    sweep.check(spec.graph.len())?;
    let thresholds: Vec<f64> = sweep.agents.iter().map(|&k| gammas.get(k)).collect::<Result<_>>()?;
    let alpha = sweep.alphas.first().copied().unwrap_or(0.0);
    let scenario = spec.null_scenario(alpha, sweep.horizon, spec.engine_config())?;
    let outcomes = replicate(&scenario, sweep, |engine| {
        sweep
            .agents
            .iter()
            .zip(&thresholds)
            .map(|(&k, &g)| Ok(engine.divergence_from_null(k)? >= g))
            .collect::<Result<Vec<bool>>>()
    })?;
    let mut out = table(spec);
    for (col, &k) in sweep.agents.iter().enumerate() {
        let est = Estimate::from_hits(count_hits(&outcomes, col), sweep.runs);
        out.push(estimate_row("type1", k, None, "type1", est, sweep.seed));
    }
    Ok(out)
}

/// Missed-detection frequency under the scenario's H1 schedule, per alpha.
pub fn run_type2_error(spec: &ScenarioSpec, gammas: &Gammas, sweep: &Sweep) -> Result<ResultTable> {
    require_mode(spec, StatMode::Pia)?;
    sweep.check(spec.graph.len())?;
    sweep.check_alphas()?;
    let thresholds: Vec<f64> = sweep.agents.iter().map(|&k| gammas.get(k)).collect::<Result<_>>()?;
    let mut out = table(spec);
    for &alpha in &sweep.alphas {
        let scenario = spec.scenario_at(alpha, sweep.horizon)?;
        let outcomes = replicate(&scenario, sweep, |engine| {
            sweep
                .agents
                .iter()
                .zip(&thresholds)
                .map(|(&k, &g)| Ok(engine.divergence_from_null(k)? < g))
                .collect::<Result<Vec<bool>>>()
        })?;
        for (col, &k) in sweep.agents.iter().enumerate() {
            let est = Estimate::from_hits(count_hits(&outcomes, col), sweep.runs);
            out.push(estimate_row("sweep-pia", k, Some(alpha), "type2", est, sweep.seed));
        }
    }
    Ok(out)
}

/// β factors of the matrix built from the true same-cluster neighbors.
pub fn oracle_beta(graph: &Graph, config: &EngineConfig) -> Result<BetaFactors> {
    beta_for_rule(graph, config, ClusteringRule::Oracle)
}

/// β factors of the static matrix for `rule` (`oracle` or `none`).
pub fn beta_for_rule(graph: &Graph, config: &EngineConfig, rule: ClusteringRule) -> Result<BetaFactors> {
    let sets = static_sets(graph, rule).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "rule {rule:?} has no static combination matrix; use oracle or none"
        ))
    })?;
    let a = combination_from_sets(graph, &sets, &config.self_weights)?;
    beta_factor(&a)
}

/// Table of β factors and the step sizes behind the extrapolation.
pub fn beta_report(spec: &ScenarioSpec, rule: ClusteringRule, agents: &[usize]) -> Result<ResultTable> {
    let factors = beta_for_rule(&spec.graph, &spec.engine_config(), rule)?;
    let mut out = table(spec);
    for &k in agents {
        if k >= spec.graph.len() {
            return Err(Error::InvalidArgument(format!("agent {} out of range", k + 1)));
        }
        out.push(plain_row("beta", k, None, "beta", factors.beta[k], 1, 0));
        out.push(plain_row("beta", k, None, "degree", spec.graph.degree(k) as f64, 1, 0));
        let effective = static_sets(&spec.graph, rule).expect("static rule").get(k).len();
        out.push(plain_row("beta", k, None, "effective", effective as f64, 1, 0));
    }
    Ok(out)
}

/// Distribution generating agent `k`'s observations at 1-based time `i`.
pub fn source_pmf(scenario: &Scenario, k: usize, i: usize) -> Option<Pmf> {
    let cluster = scenario.graph().cluster(k);
    match scenario.model() {
        ObservationModel::Ia {
            hypotheses,
            schedule,
        } => schedule.hypothesis(cluster, i).map(|h| hypotheses[h].clone()),
        ObservationModel::Pia { null, schedule } => match schedule.state(i)? {
            NatureState::H0 => Some(null.clone()),
            NatureState::H1(e) => schedule.alternative(e, cluster).cloned(),
        },
    }
}

fn bound_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Settings for the Gaussian bound estimators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSettings {
    pub mc_count: usize,
    pub beta_override: Option<f64>,
    /// Type-I level for the PIA threshold.
    pub type1_target: f64,
}

impl Default for BoundSettings {
    fn default() -> Self {
        BoundSettings {
            mc_count: 5000,
            beta_override: None,
            type1_target: 0.1,
        }
    }
}

/// Upper and lower approximate error bounds for informed agents, per alpha.
///
/// Both bounds for one (alpha, agent) pair draw from the same random stream.
pub fn bounds_ia(spec: &ScenarioSpec, sweep: &Sweep, settings: BoundSettings) -> Result<ResultTable> {
    require_mode(spec, StatMode::Ia)?;
    sweep.check(spec.graph.len())?;
    sweep.check_alphas()?;
    let config = spec.engine_config();
    let betas = oracle_beta(&spec.graph, &config)?;
    let scenarios: Vec<Scenario> = sweep
        .alphas
        .iter()
        .map(|&a| spec.scenario_at(a, sweep.horizon))
        .collect::<Result<_>>()?;
    let n_agents = sweep.agents.len();
    let tasks = map_indexed(sweep.workers, sweep.alphas.len() * n_agents, |t| {
        let (ai, col) = (t / n_agents, t % n_agents);
        let k = sweep.agents[col];
        let scenario = &scenarios[ai];
        let (hyps, truth) = match scenario.model() {
            ObservationModel::Ia {
                hypotheses,
                schedule,
            } => (
                hypotheses,
                schedule
                    .hypothesis(scenario.graph().cluster(k), sweep.horizon)
                    .expect("schedule covers the horizon"),
            ),
            ObservationModel::Pia { .. } => unreachable!("mode checked"),
        };
        let estimate = |kind| {
            let mut rng = bound_rng(sweep.seed, t as u64);
            bound_error_ia(
                hyps,
                truth,
                config.mu,
                betas.beta[k],
                kind,
                settings.beta_override,
                settings.mc_count,
                &mut rng,
            )
        };
        Ok((estimate(BoundKind::Upper)?, estimate(BoundKind::Lower)?))
    })?;
    let mut out = table(spec);
    for (t, (upper, lower)) in tasks.into_iter().enumerate() {
        let alpha = sweep.alphas[t / n_agents];
        let k = sweep.agents[t % n_agents];
        out.push(estimate_row("bounds-ia", k, Some(alpha), "upper", upper, sweep.seed));
        out.push(estimate_row("bounds-ia", k, Some(alpha), "lower", lower, sweep.seed));
        let beta = settings.beta_override.unwrap_or(betas.beta[k]);
        out.push(plain_row("bounds-ia", k, Some(alpha), "beta", beta, settings.mc_count, sweep.seed));
    }
    Ok(out)
}

/// Upper and lower approximate type-II bounds for partially informed agents, per alpha.
pub fn bounds_pia(spec: &ScenarioSpec, sweep: &Sweep, settings: BoundSettings) -> Result<ResultTable> {
    require_mode(spec, StatMode::Pia)?;
    sweep.check(spec.graph.len())?;
    sweep.check_alphas()?;
    let config = spec.engine_config();
    let betas = oracle_beta(&spec.graph, &config)?;
    let scenarios: Vec<Scenario> = sweep
        .alphas
        .iter()
        .map(|&a| spec.scenario_at(a, sweep.horizon))
        .collect::<Result<_>>()?;
    let n_agents = sweep.agents.len();
    let tasks = map_indexed(sweep.workers, sweep.alphas.len() * n_agents, |t| {
        let (ai, col) = (t / n_agents, t % n_agents);
        let k = sweep.agents[col];
        let scenario = &scenarios[ai];
        let ObservationModel::Pia { null, .. } = scenario.model() else {
            unreachable!("mode checked")
        };
        let alternative = source_pmf(scenario, k, sweep.horizon).expect("schedule covers the horizon");
        let estimate = |kind| {
            let mut rng = bound_rng(sweep.seed, t as u64);
            bound_error_pia(
                null,
                &alternative,
                config.mu,
                betas.beta[k],
                kind,
                settings.beta_override,
                settings.type1_target,
                settings.mc_count,
                &mut rng,
            )
        };
        Ok((estimate(BoundKind::Upper)?, estimate(BoundKind::Lower)?))
    })?;
    let mut out = table(spec);
    for (t, (upper, lower)) in tasks.into_iter().enumerate() {
        let alpha = Some(sweep.alphas[t / n_agents]);
        let k = sweep.agents[t % n_agents];
        let (seed, mc) = (sweep.seed, settings.mc_count);
        out.push(estimate_row("bounds-pia", k, alpha, "upper", upper.type2, seed));
        out.push(estimate_row("bounds-pia", k, alpha, "lower", lower.type2, seed));
        out.push(plain_row("bounds-pia", k, alpha, "upper_gamma", upper.gamma, mc, seed));
        out.push(plain_row("bounds-pia", k, alpha, "lower_gamma", lower.gamma, mc, seed));
        let beta = settings.beta_override.unwrap_or(betas.beta[k]);
        out.push(plain_row("bounds-pia", k, alpha, "beta", beta, mc, seed));
    }
    Ok(out)
}

/// Grid value of the β override whose lower bound best fits `target` error values.
///
/// `target` holds (alpha, empirical error) pairs for one agent; the fit minimizes
/// the summed squared difference. Returns the best β and its squared error.
pub fn fit_beta_override(
    spec: &ScenarioSpec,
    agent: usize,
    target: &[(f64, f64)],
    grid: &[f64],
    settings: BoundSettings,
    seed: u64,
) -> Result<(f64, f64)> {
    if grid.is_empty() || target.is_empty() {
        return Err(Error::InvalidArgument("empty grid or target".into()));
    }
    let sweep = Sweep::from_spec(spec, 1)
        .with_agents(vec![agent])
        .with_alphas(target.iter().map(|t| t.0).collect())
        .with_seed(seed);
    let mut best = (f64::NAN, f64::INFINITY);
    for &beta in grid {
        let s = BoundSettings {
            beta_override: Some(beta),
            ..settings
        };
        let bounds = match spec.mode() {
            StatMode::Ia => bounds_ia(spec, &sweep, s)?,
            StatMode::Pia => bounds_pia(spec, &sweep, s)?,
        };
        let sse: f64 = target
            .iter()
            .map(|&(alpha, value)| {
                let lower = bounds.value(agent + 1, Some(alpha), "lower").expect("row present");
                (lower.value - value).powi(2)
            })
            .sum();
        if sse < best.1 {
            best = (beta, sse);
        }
    }
    Ok(best)
}

/// Empirical and predicted steady-state variance of one status component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCheck {
    /// 0-based agent.
    pub agent: usize,
    /// 0-based component.
    pub component: usize,
    pub w_empirical: f64,
    pub w_predicted: f64,
    pub z_empirical: f64,
    pub z_predicted: f64,
}

impl VarianceCheck {
    pub fn w_relative_error(&self) -> f64 {
        (self.w_empirical - self.w_predicted).abs() / self.w_predicted
    }

    pub fn z_relative_error(&self) -> f64 {
        (self.z_empirical - self.z_predicted).abs() / self.z_predicted
    }
}

fn sample_variance(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    xs.map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Compares replica variances of `w` and `z` at the horizon with `mu beta Lambda` and `mu Lambda / 2`.
///
/// β comes from the true-cluster combination matrix.
pub fn theory_check(spec: &ScenarioSpec, alpha: f64, sweep: &Sweep) -> Result<Vec<VarianceCheck>> {
    sweep.check(spec.graph.len())?;
    if sweep.runs < 2 {
        return Err(Error::InvalidArgument("variance needs at least 2 runs".into()));
    }
    let scenario = spec.scenario_at(alpha, sweep.horizon)?;
    let config = scenario.config();
    let betas = oracle_beta(&spec.graph, config)?;
    let finals = replicate(&scenario, sweep, |engine| {
        Ok(sweep
            .agents
            .iter()
            .map(|&k| {
                let s = &engine.states()[k];
                (s.w.clone(), s.z.clone())
            })
            .collect::<Vec<_>>())
    })?;
    let mut checks = Vec::new();
    for (col, &k) in sweep.agents.iter().enumerate() {
        let p_true = source_pmf(&scenario, k, sweep.horizon).expect("schedule covers the horizon");
        let lambda = match scenario.model() {
            ObservationModel::Ia { hypotheses, .. } => {
                lambda_matrix(&p_true, StatisticModel::Ia(hypotheses))?
            }
            ObservationModel::Pia { null, .. } => lambda_matrix(&p_true, StatisticModel::Pia(null.len()))?,
        };
        for m in 0..lambda.nrows() {
            let w = finals.iter().map(|f| f[col].0[m]);
            let z = finals.iter().map(|f| f[col].1[m]);
            checks.push(VarianceCheck {
                agent: k,
                component: m,
                w_empirical: sample_variance(w),
                w_predicted: config.mu * betas.beta[k] * lambda[(m, m)],
                z_empirical: sample_variance(z),
                z_predicted: config.mu * lambda[(m, m)] / 2.0,
            });
        }
    }
    Ok(checks)
}

/// Result rows for a theory check.
pub fn theory_table(spec: &ScenarioSpec, alpha: f64, sweep: &Sweep, checks: &[VarianceCheck]) -> ResultTable {
    let mut out = table(spec);
    for c in checks {
        let m = c.component + 1;
        let a = Some(alpha);
        let (runs, seed) = (sweep.runs, sweep.seed);
        out.push(plain_row("theory-check", c.agent, a, &format!("w_var_{m}"), c.w_empirical, runs, seed));
        out.push(plain_row("theory-check", c.agent, a, &format!("w_pred_{m}"), c.w_predicted, runs, seed));
        out.push(plain_row("theory-check", c.agent, a, &format!("z_var_{m}"), c.z_empirical, runs, seed));
        out.push(plain_row("theory-check", c.agent, a, &format!("z_pred_{m}"), c.z_predicted, runs, seed));
    }
    out
}

/// Fraction of steps in `from..=to` where agent `k` decides correctly, averaged over replicas.
pub fn run_tracking_accuracy(
    scenario: &Scenario,
    k: usize,
    from: usize,
    to: usize,
    runs: usize,
    seed: u64,
    workers: usize,
) -> Result<Estimate> {
    if from == 0 || from > to || to > scenario.horizon() {
        return Err(Error::InvalidArgument(format!(
            "window {from}..={to} outside 1..={}",
            scenario.horizon()
        )));
    }
    if runs == 0 {
        return Err(Error::InvalidArgument("runs must be positive".into()));
    }
    let fractions = map_indexed(workers, runs, |r| {
        let mut engine = Engine::new(scenario, replica_seed(seed, r))?;
        let mut correct = 0usize;
        for i in 1..=to {
            engine.step()?;
            if i >= from && Some(engine.decide(k)?) == engine.truth(k, i) {
                correct += 1;
            }
        }
        Ok(correct as f64 / (to - from + 1) as f64)
    })?;
    let n = runs as f64;
    let mean = fractions.iter().sum::<f64>() / n;
    let stderr = if runs > 1 {
        (fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    Ok(Estimate {
        value: mean,
        stderr,
        count: runs,
    })
}

fn decision_label(d: Option<Decision>) -> String {
    match d {
        Some(Decision::Hypothesis(h)) => format!("H{}", h + 1),
        Some(Decision::Binary(b)) => format!("{b:?}"),
        None => String::new(),
    }
}

/// One trajectory as CSV: a row per (recorded step, agent) with decision, truth, `w` and `z`.
pub fn simulate(scenario: &Scenario, horizon: usize, seed: u64, stride: usize) -> Result<String> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let mut engine = Engine::new(scenario, seed)?;
    let dim = scenario.status_dim();
    let mut out = String::from("time,agent,decision,truth");
    for prefix in ["w", "z"] {
        for m in 1..=dim {
            write!(out, ",{prefix}_{m}").expect("string write");
        }
    }
    out.push('\n');
    for i in 1..=horizon {
        engine.step()?;
        if i % stride != 0 && i != horizon {
            continue;
        }
        let decisions = engine.decide_all()?;
        for (k, d) in decisions.into_iter().enumerate() {
            let truth = engine.truth(k, i);
            write!(out, "{i},{},{},{}", k + 1, decision_label(Some(d)), decision_label(truth))
                .expect("string write");
            let s = &engine.states()[k];
            for v in s.w.iter().chain(&s.z) {
                write!(out, ",{}", format_g9(*v)).expect("string write");
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::Path;

    const CHAIN: &str =
        r#"{"kind": "edge_list", "agents": 4, "edges": [[1, 2], [2, 3], [3, 4]], "clusters": [1, 1, 2, 2]}"#;

    fn ia_spec(runs_alphas: &str) -> ScenarioSpec {
        ia_spec_on(CHAIN, runs_alphas)
    }

    fn ia_spec_on(graph: &str, runs_alphas: &str) -> ScenarioSpec {
        let json = format!(
            r#"{{
                "name": "t",
                "graph": {graph},
                "pmfs": {{"family": "alpha_shift", "base": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334],
                          "names": ["p1", "p2", "p3", "p4"]}},
                "model": {{"mode": "ia", "hypotheses": ["p1", "p2", "p3", "p4"],
                           "schedule": {{"1": [{{"state": "p4"}}], "2": [{{"state": "p1"}}]}}}},
                "alphas": [{runs_alphas}],
                "horizon": 200,
                "seed": 11
            }}"#
        );
        ScenarioSpec::from_json(&json, Path::new("."), "test").unwrap()
    }

    fn pia_spec() -> ScenarioSpec {
        let json = r#"{
            "name": "t",
            "graph": {"kind": "complete", "agents": 3},
            "pmfs": {"family": "explicit", "pmfs": {"p0": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334],
                                                      "p1": [0.6, 0.2, 0.2]}},
            "model": {"mode": "pia", "null": "p0", "segments": [{"state": "h1", "epoch": 1}],
                      "epochs": [{"1": "p1"}]},
            "alphas": [0.0],
            "horizon": 300,
            "seed": 5
        }"#;
        ScenarioSpec::from_json(json, Path::new("."), "test").unwrap()
    }

    #[test]
    fn identical_hypotheses_give_three_quarters() {
        let spec = ia_spec("0.0");
        let sweep = Sweep::from_spec(&spec, 2000);
        let t = run_steady_state_error(&spec, &sweep).unwrap();
        for row in &t.rows {
            assert!((row.value - 0.75).abs() < 0.03, "{row:?}");
        }
    }

    #[test]
    fn separated_hypotheses_give_no_errors() {
        let graph = r#"{"kind": "edge_list", "agents": 8,
            "edges": [[1, 2], [1, 3], [1, 4], [2, 3], [2, 4], [3, 4], [5, 6], [5, 7], [5, 8], [6, 7], [6, 8], [7, 8], [4, 5]],
            "clusters": [1, 1, 1, 1, 2, 2, 2, 2]}"#;
        let spec = ia_spec_on(graph, "0.3");
        let sweep = Sweep::from_spec(&spec, 200);
        let sweep = sweep.with_agents(vec![0, 1, 2, 5, 6, 7]);
        let t = run_steady_state_error(&spec, &sweep).unwrap();
        assert!(t.rows.iter().all(|r| r.value < 0.01), "{t:?}");
    }

    #[test]
    fn results_independent_of_workers() {
        let spec = ia_spec("0.1");
        let sweep = Sweep::from_spec(&spec, 60);
        let serial = run_steady_state_error(&spec, &sweep).unwrap();
        let parallel = run_steady_state_error(&spec, &sweep.clone().with_workers(4)).unwrap();
        assert_eq!(serial.to_csv(), parallel.to_csv());
    }

    #[test]
    fn empty_agent_subset_rejected() {
        let spec = ia_spec("0.1");
        let sweep = Sweep::from_spec(&spec, 10).with_agents(vec![]);
        assert!(run_steady_state_error(&spec, &sweep).is_err());
    }

    #[test]
    fn calibration_requires_enough_runs() {
        let spec = pia_spec();
        let sweep = Sweep::from_spec(&spec, 99);
        assert!(calibrate_gamma_empirical(&spec, &sweep, 0.1).is_err());
        assert_eq!(min_calibration_runs(0.1), 100);
    }

    #[test]
    fn calibrated_gamma_is_self_consistent() {
        let spec = pia_spec();
        let sweep = Sweep::from_spec(&spec, 400);
        let (gammas, rows) = calibrate_gamma_empirical(&spec, &sweep, 0.5).unwrap();
        assert_eq!(rows.rows.len(), 3);
        assert_eq!(Gammas::from_table(&rows).unwrap(), gammas);
        // Same replicas: exactly half sit at or above the median, up to interpolation.
        let t1 = run_type1_error(&spec, &gammas, &sweep).unwrap();
        for r in &t1.rows {
            assert!((r.value - 0.5).abs() <= 0.0026, "{r:?}");
        }
    }

    #[test]
    fn distinct_alternative_is_detected() {
        let spec = pia_spec();
        let sweep = Sweep::from_spec(&spec, 200);
        let (gammas, _) = calibrate_gamma_empirical(&spec, &sweep, 0.1).unwrap();
        let t2 = run_type2_error(&spec, &gammas, &sweep).unwrap();
        assert!(t2.rows.iter().all(|r| r.value == 0.0), "{t2:?}");
    }

    #[test]
    fn ia_bounds_are_paired_and_ordered() {
        let spec = ia_spec("0.0, 0.05");
        let sweep = Sweep::from_spec(&spec, 1);
        let t = bounds_ia(&spec, &sweep, BoundSettings::default()).unwrap();
        for k in 1..=4 {
            let up = t.value(k, Some(0.0), "upper").unwrap().value;
            let lo = t.value(k, Some(0.0), "lower").unwrap().value;
            assert!((up - 0.75).abs() < 0.03 && (lo - 0.75).abs() < 0.03);
            let up = t.value(k, Some(0.05), "upper").unwrap().value;
            let lo = t.value(k, Some(0.05), "lower").unwrap().value;
            assert!(up >= lo, "agent {k}: {up} < {lo}");
        }
    }

    #[test]
    fn pia_bounds_with_null_alternative() {
        let json = pia_spec().to_json().replace(r#""p1": ["#, r#""p1": [0.3333333333333333, 0.3333333333333333, 0.3333333333333334], "unused": ["#);
        let spec = ScenarioSpec::from_json(&json, Path::new("."), "test").unwrap();
        let t = bounds_pia(&spec, &Sweep::from_spec(&spec, 1), BoundSettings::default()).unwrap();
        for r in t.rows.iter().filter(|r| r.metric == "upper" || r.metric == "lower") {
            assert!((r.value - 0.9).abs() < 0.02, "{r:?}");
        }
    }

    #[test]
    fn beta_report_for_complete_graph() {
        let spec = pia_spec();
        let t = beta_report(&spec, ClusteringRule::Oracle, &[0, 1, 2]).unwrap();
        for r in t.rows.iter().filter(|r| r.metric == "beta") {
            assert!((r.value - 1.0 / 6.0).abs() < 1e-6, "{r:?}");
        }
        assert!(beta_report(&spec, ClusteringRule::Paper, &[0]).is_err());
    }

    #[test]
    fn variance_check_on_isolated_agents() {
        let json = pia_spec()
            .to_json()
            .replace(r#""kind": "complete",
    "agents": 3"#, r#""kind": "edge_list", "agents": 2, "edges": [], "clusters": [1, 1]"#);
        let spec = ScenarioSpec::from_json(&json, Path::new("."), "test").unwrap();
        let sweep = Sweep::from_spec(&spec, 1500);
        let checks = theory_check(&spec, 0.0, &sweep).unwrap();
        assert_eq!(checks.len(), 6);
        for c in &checks {
            // Isolated agents: w and z coincide, β = 1/2.
            assert_eq!(c.w_empirical, c.z_empirical);
            assert!((c.w_predicted - c.z_predicted).abs() < 1e-8);
            assert!(c.z_relative_error() < 0.15, "{c:?}");
        }
    }

    #[test]
    fn tracking_window_checked() {
        let spec = ia_spec("0.3");
        let scenario = spec.scenario_at(0.3, 200).unwrap();
        assert!(run_tracking_accuracy(&scenario, 0, 0, 10, 1, 0, 1).is_err());
        assert!(run_tracking_accuracy(&scenario, 0, 10, 201, 1, 0, 1).is_err());
        let acc = run_tracking_accuracy(&scenario, 0, 100, 200, 5, 0, 1).unwrap();
        assert!(acc.value > 0.9);
    }

    #[test]
    fn simulate_dump_shape() {
        let spec = ia_spec("0.2");
        let scenario = spec.scenario_at(0.2, 200).unwrap();
        let dump = simulate(&scenario, 25, 3, 10).unwrap();
        let lines: Vec<&str> = dump.lines().collect();
        assert_eq!(lines[0], "time,agent,decision,truth,w_1,w_2,w_3,w_4,z_1,z_2,z_3,z_4");
        // Steps 10, 20 and the final step 25, four agents each.
        assert_eq!(lines.len(), 1 + 3 * 4);
        assert!(lines[1].starts_with("10,1,H"));
        assert_eq!(dump, simulate(&scenario, 25, 3, 10).unwrap());
    }
}
