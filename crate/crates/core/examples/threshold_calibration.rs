//! Calibrating per-agent detection thresholds under H0, then measuring type-I and type-II errors.

use decision_diffusion::harness::{
    calibrate_gamma_empirical, load_scenario, run_type1_error, run_type2_error, Sweep,
};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let spec = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/pia_35.scenario"))?;
    let base = Sweep::from_spec(&spec, 200)
        .with_horizon(300)
        .with_alphas(vec![0.05])
        .with_agents(vec![0, 3, 12, 17]);

    let (gammas, _) = calibrate_gamma_empirical(&spec, &base, 0.1)?;
    for (k, g) in &gammas.0 {
        println!("agent {:>2}: gamma = {g:.5}", k + 1);
    }

    let fresh = base.clone().with_seed(base.seed + base.runs as u64);
    let type1 = run_type1_error(&spec, &gammas, &fresh)?;
    let type2 = run_type2_error(&spec, &gammas, &fresh.with_runs(100))?;
    for row in type1.rows.iter().chain(&type2.rows) {
        println!("agent {:>2} {}: {:.3}", row.agent, row.metric, row.value);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
