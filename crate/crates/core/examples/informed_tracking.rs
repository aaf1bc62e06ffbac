//! Informed agents tracking a changing hypothesis: clustering on `z` versus clustering on `w`.

use decision_diffusion::diffusion::ClusteringRule;
use decision_diffusion::harness::{load_scenario, run_tracking_accuracy};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ring_tracking.scenario");
    let spec = load_scenario(path)?;
    let horizon = spec.horizon();
    let runs = 4;
    for rule in [ClusteringRule::Paper, ClusteringRule::Naive] {
        let config = spec.engine_config().with_clustering(rule);
        let scenario = spec.scenario_with(0.0, horizon, config)?;
        let hub = run_tracking_accuracy(&scenario, 0, 500, horizon, runs, spec.seed(), 1)?;
        println!(
            "{rule:?}: hub correct on {:.1}% of steps 500..={horizon} ({runs} runs)",
            100.0 * hub.value
        );
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
