//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decision_diffusion::diffusion::{lms_step, ClusteringRule};
use decision_diffusion::harness::{
    bounds_ia, bounds_pia, calibrate_gamma_empirical, load_scenario, run_steady_state_error,
    run_tracking_accuracy, run_type1_error, run_type2_error, theory_check, BoundSettings, Gammas,
    Infinite, ResultTable, ScenarioSpec, Sweep, Threshold,
};
use decision_diffusion::network::{beta_factor, CombinationMatrix};
use decision_diffusion::Result;

/// Representative agents (1-based): well-connected and border agents of each cluster.
const AGENTS: [usize; 4] = [1, 13, 4, 18];

fn scenario(name: &str) -> ScenarioSpec {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "scenarios", &format!("{name}.scenario")]
        .iter()
        .collect();
    load_scenario(&path).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn zero_based(agents: &[usize]) -> Vec<usize> {
    agents.iter().map(|k| k - 1).collect()
}

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Outcome { pass, detail }
    }
}

fn row(table: &ResultTable, agent: usize, alpha: Option<f64>, metric: &str) -> (f64, f64) {
    let r = table
        .value(agent, alpha, metric)
        .unwrap_or_else(|| panic!("missing {metric} for agent {agent} at {alpha:?}"));
    (r.value, r.stderr.unwrap_or(0.0))
}

fn t1_lms_moments() -> Result<Outcome> {
    let (p, mu, steps, seeds) = (0.3, 0.05, 1000, 2000);
    let finals: Vec<f64> = (0..seeds)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            (0..steps).fold(0.0, |w, _| {
                let d = if rng.random_bool(p) { 1.0 } else { 0.0 };
                lms_step(w, d, mu)
            })
        })
        .collect();
    let n = seeds as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let var = finals.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mean_expected = (1.0 - (1.0 - mu).powi(steps)) * p;
    let var_expected = mu / (2.0 - mu) * p * (1.0 - p);
    let se = (var / n).sqrt();
    let mean_ok = (mean - mean_expected).abs() <= 3.0 * se;
    let var_ok = (var / var_expected - 1.0).abs() <= 0.10;
    Ok(Outcome::new(
        mean_ok && var_ok,
        format!(
            "mean {mean:.5} vs {mean_expected:.5} (3se {:.5}); variance {var:.6} vs {var_expected:.6} ({:+.2}%)",
            3.0 * se,
            100.0 * (var / var_expected - 1.0)
        ),
    ))
}

fn t2_beta() -> Result<Outcome> {
    let identity = beta_factor(&CombinationMatrix::identity(35))?;
    let id_err = identity.beta.iter().map(|b| (b - 0.5).abs()).fold(0.0, f64::max);
    let uniform = beta_factor(&CombinationMatrix::uniform(35))?;
    let un_err = uniform.beta.iter().map(|b| (b - 1.0 / 70.0).abs()).fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let s = rng.random_range(2..=20);
        let mut m = DMatrix::from_fn(s, s, |_, _| rng.random_range(0.01..1.0));
        for mut r in m.row_iter_mut() {
            let total: f64 = r.iter().sum();
            r /= total;
        }
        let beta = beta_factor(&CombinationMatrix::from_dense(&m)?)?.beta;
        let lo = 1.0 / (2.0 * s as f64);
        for b in beta {
            worst = worst.max(lo - b).max(b - 0.5);
        }
    }
    Ok(Outcome::new(
        id_err <= 1e-6 && un_err <= 1e-6 && worst <= 1e-6,
        format!("identity err {id_err:.1e}; uniform err {un_err:.1e}; worst bound violation {worst:.1e} over 200 matrices"),
    ))
}

fn t3_theorem() -> Result<Outcome> {
    let spec = scenario("steady_state_k10");
    let sweep = Sweep::from_spec(&spec, 2000);
    let checks = theory_check(&spec, 0.0, &sweep)?;
    let worst_w = checks.iter().map(|c| c.w_relative_error()).fold(0.0, f64::max);
    let worst_z = checks.iter().map(|c| c.z_relative_error()).fold(0.0, f64::max);
    Ok(Outcome::new(
        worst_w <= 0.10 && worst_z <= 0.10,
        format!(
            "{} agent-components; largest relative error w {:.2}%, z {:.2}%",
            checks.len(),
            100.0 * worst_w,
            100.0 * worst_z
        ),
    ))
}

fn t4_symmetry() -> Result<Outcome> {
    let spec = scenario("ia_35");
    let sweep = Sweep::from_spec(&spec, 5000)
        .with_alphas(vec![0.0])
        .with_agents((0..spec.graph.len()).collect());
    let table = run_steady_state_error(&spec, &sweep)?;
    let worst = table.rows.iter().map(|r| (r.value - 0.75).abs()).fold(0.0, f64::max);
    let (lo, hi) = table.rows.iter().fold((1.0f64, 0.0f64), |(lo, hi), r| (lo.min(r.value), hi.max(r.value)));
    Ok(Outcome::new(
        worst <= 0.02,
        format!("{} agents, P(e) in [{lo:.4}, {hi:.4}]", table.rows.len()),
    ))
}

fn t5_orderings(ia: &ResultTable) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for k in AGENTS {
        let (hi_alpha, _) = row(ia, k, Some(0.33), "p_error");
        let (lo_alpha, _) = row(ia, k, Some(0.1), "p_error");
        pass &= hi_alpha <= lo_alpha;
        parts.push(format!("a{k}: {hi_alpha:.4}<={lo_alpha:.4}"));
    }
    for (good, bad) in [(1, 13), (4, 18)] {
        let (g, gs) = row(ia, good, Some(0.3), "p_error");
        let (b, bs) = row(ia, bad, Some(0.3), "p_error");
        let slack = 3.0 * (gs * gs + bs * bs).sqrt();
        pass &= b - g > slack;
        parts.push(format!("alpha 0.3 a{good} {g:.4} < a{bad} {b:.4} (gap {:.4} > {slack:.4})", b - g));
    }
    Outcome::new(pass, format!("(a) alpha 0.33 vs 0.1 {}; (b) {}", parts[..4].join(", "), parts[4..].join("; ")))
}

fn t6_tracking() -> Result<Outcome> {
    let spec = scenario("ring_tracking");
    let horizon = spec.horizon();
    let accuracy = |rule| -> Result<f64> {
        let config = spec.engine_config().with_clustering(rule);
        let s = spec.scenario_with(0.0, horizon, config)?;
        Ok(run_tracking_accuracy(&s, 0, 500, 2400, 50, spec.seed(), 1)?.value)
    };
    let paper = accuracy(ClusteringRule::Paper)?;
    let naive = accuracy(ClusteringRule::Naive)?;
    Ok(Outcome::new(
        paper > naive && paper > 0.8,
        format!("hub correct fraction, steps 500-2400, 50 seeds: z-based rule {paper:.4}, w-based rule {naive:.4}"),
    ))
}

fn t7_calibration(gammas: &Gammas, spec: &ScenarioSpec, cal: &Sweep) -> Result<Outcome> {
    let fresh = cal.clone().with_seed(cal.seed + cal.runs as u64);
    let type1 = run_type1_error(spec, gammas, &fresh)?;
    let type2 = run_type2_error(
        spec,
        gammas,
        &fresh.clone().with_runs(500).with_alphas(vec![1e-3]).with_seed(fresh.seed + 5000),
    )?;
    let mut pass = true;
    let mut parts = Vec::new();
    for k in AGENTS {
        let (t1, _) = row(&type1, k, None, "type1");
        let (t2, _) = row(&type2, k, Some(1e-3), "type2");
        pass &= (t1 - 0.1).abs() <= 0.015 && (t2 - 0.9).abs() <= 0.04;
        parts.push(format!("a{k}: type-I {t1:.4}, type-II {t2:.3}"));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn t8_balancing() -> Result<Outcome> {
    let base = scenario("balance_hub");
    let type2_at = |delta: Threshold| -> Result<f64> {
        let mut spec = base.clone();
        spec.file.engine.delta = delta;
        let cal = Sweep::from_spec(&spec, 2000).with_agents(vec![0]);
        let (gammas, _) = calibrate_gamma_empirical(&spec, &cal, 0.1)?;
        let eval = cal.with_runs(500).with_alphas(vec![0.3]).with_seed(spec.seed() + 2000);
        let t = run_type2_error(&spec, &gammas, &eval)?;
        Ok(t.rows[0].value)
    };
    let open = type2_at(Threshold::Named(Infinite::Inf))?;
    let clustered = type2_at(Threshold::Value(0.2))?;
    Ok(Outcome::new(
        open - clustered >= 0.2,
        format!("hub type-II at alpha 0.3: delta=inf {open:.3}, delta=0.2 {clustered:.3}"),
    ))
}

fn t9_sandwich(ia: &ResultTable, pia_gammas: &Gammas, pia_cal: &Sweep) -> Result<Outcome> {
    let alphas = [0.1, 0.2, 0.3];
    let mut pass = true;
    let mut parts = Vec::new();
    let within = |lower: (f64, f64), emp: (f64, f64), upper: (f64, f64)| {
        let lo_ok = lower.0 - emp.0 <= 3.0 * (lower.1.powi(2) + emp.1.powi(2)).sqrt();
        let hi_ok = emp.0 - upper.0 <= 3.0 * (upper.1.powi(2) + emp.1.powi(2)).sqrt();
        lo_ok && hi_ok
    };

    let ia_35_bounds = scenario("ia_35_bounds");
    let sweep = Sweep::from_spec(&ia_35_bounds, 1).with_alphas(alphas.to_vec()).with_agents(vec![0]);
    let bounds = bounds_ia(&ia_35_bounds, &sweep, BoundSettings::default())?;
    for a in alphas {
        let (lo, emp, up) = (
            row(&bounds, 1, Some(a), "lower"),
            row(ia, 1, Some(a), "p_error"),
            row(&bounds, 1, Some(a), "upper"),
        );
        pass &= within(lo, emp, up);
        parts.push(format!("IA a1 alpha {a}: {:.4} <= {:.4} <= {:.4}", lo.0, emp.0, up.0));
    }

    let pia_35_bounds = scenario("pia_35_bounds");
    let pia_alphas = alphas;
    let sweep = Sweep::from_spec(&pia_35_bounds, 1).with_alphas(pia_alphas.to_vec()).with_agents(vec![0]);
    let bounds = bounds_pia(&pia_35_bounds, &sweep, BoundSettings::default())?;
    let eval = pia_cal
        .clone()
        .with_runs(2000)
        .with_alphas(pia_alphas.to_vec())
        .with_agents(vec![0])
        .with_seed(pia_cal.seed + 50_000);
    let emp = run_type2_error(&pia_35_bounds, pia_gammas, &eval)?;
    for a in pia_alphas {
        let (lo, e, up) = (
            row(&bounds, 1, Some(a), "lower"),
            row(&emp, 1, Some(a), "type2"),
            row(&bounds, 1, Some(a), "upper"),
        );
        pass &= within(lo, e, up);
        parts.push(format!("PIA a1 alpha {a}: {:.4} <= {:.4} <= {:.4}", lo.0, e.0, up.0));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn t10_determinism() -> Result<Outcome> {
    let dir = tempfile::tempdir().map_err(|e| decision_diffusion::Error::Io {
        path: std::env::temp_dir(),
        source: e,
    })?;
    let mut pass = true;
    let mut parts = Vec::new();
    for name in ["ia_35", "pia_35"] {
        let spec = scenario(name);
        let sweep = Sweep::from_spec(&spec, 64).with_alphas(spec.alphas()[..2].to_vec());
        let run = |workers: usize, file: &str| -> Result<Vec<u8>> {
            let s = sweep.clone().with_workers(workers);
            let table = match name {
                "ia_35" => run_steady_state_error(&spec, &s)?,
                _ => {
                    let (g, mut t) = calibrate_gamma_empirical(&spec, &s.clone().with_runs(100), 0.1)?;
                    t.extend(run_type2_error(&spec, &g, &s)?);
                    t
                }
            };
            let path = dir.path().join(file);
            table.write(&path)?;
            Ok(std::fs::read(&path).expect("written file"))
        };
        let serial = run(1, &format!("{name}_a.csv"))?;
        let again = run(1, &format!("{name}_b.csv"))?;
        let parallel = run(8, &format!("{name}_c.csv"))?;
        let same = serial == again && serial == parallel;
        pass &= same;
        parts.push(format!("{name}: {} bytes, identical={same}", serial.len()));
    }
    Ok(Outcome::new(pass, parts.join("; ")))
}

fn report(id: &str, start: Instant, outcome: Result<Outcome>, failures: &mut usize) {
    let secs = start.elapsed().as_secs_f64();
    match outcome {
        Ok(o) => {
            if !o.pass {
                *failures += 1;
            }
            println!("{id} {} [{secs:.1}s] {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        }
        Err(e) => {
            *failures += 1;
            println!("{id} FAIL [{secs:.1}s] error: {e}");
        }
    }
}

fn main() -> ExitCode {
    let mut failures = 0;

    let t = Instant::now();
    report("T1", t, t1_lms_moments(), &mut failures);
    let t = Instant::now();
    report("T2", t, t2_beta(), &mut failures);
    let t = Instant::now();
    report("T3", t, t3_theorem(), &mut failures);
    let t = Instant::now();
    report("T4", t, t4_symmetry(), &mut failures);

    // One informed-agent sweep serves T5 and the IA half of T9.
    let t = Instant::now();
    let ia_35 = scenario("ia_35");
    let ia_sweep = Sweep::from_spec(&ia_35, 5000)
        .with_alphas(vec![0.1, 0.2, 0.3, 0.33])
        .with_agents(zero_based(&AGENTS));
    let ia = run_steady_state_error(&ia_35, &ia_sweep);
    match &ia {
        Ok(table) => report("T5", t, Ok(t5_orderings(table)), &mut failures),
        Err(e) => report("T5", t, Err(decision_diffusion::Error::InvalidArgument(e.to_string())), &mut failures),
    }

    let t = Instant::now();
    report("T6", t, t6_tracking(), &mut failures);

    // Thresholds calibrated once on H0 runs serve T7 and the PIA half of T9.
    let t = Instant::now();
    let pia_35 = scenario("pia_35");
    let cal = Sweep::from_spec(&pia_35, 5000).with_agents(zero_based(&AGENTS));
    let calibrated = calibrate_gamma_empirical(&pia_35, &cal, 0.1).map(|(g, _)| g);
    match &calibrated {
        Ok(g) => report("T7", t, t7_calibration(g, &pia_35, &cal), &mut failures),
        Err(e) => report("T7", t, Err(decision_diffusion::Error::InvalidArgument(e.to_string())), &mut failures),
    }

    let t = Instant::now();
    report("T8", t, t8_balancing(), &mut failures);

    let t = Instant::now();
    let t9 = match (&ia, &calibrated) {
        (Ok(ia), Ok(g)) => t9_sandwich(ia, g, &cal),
        _ => Err(decision_diffusion::Error::InvalidArgument("prerequisite sweep failed".into())),
    };
    report("T9", t, t9, &mut failures);

    let t = Instant::now();
    report("T10", t, t10_determinism(), &mut failures);

    println!("acceptance: {} of 10 criteria passed", 10 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
