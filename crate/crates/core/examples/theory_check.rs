//! Replica variances of `w` and `z` against the steady-state Gaussian prediction.

use decision_diffusion::harness::{load_scenario, theory_check, Sweep};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let spec = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/steady_state_k10.scenario"))?;
    let sweep = Sweep::from_spec(&spec, 200).with_agents(vec![0, 5]);
    for c in theory_check(&spec, 0.0, &sweep)? {
        println!(
            "agent {} component {}: w {:.3e} vs {:.3e} ({:+.1}%), z {:.3e} vs {:.3e} ({:+.1}%)",
            c.agent + 1,
            c.component + 1,
            c.w_empirical,
            c.w_predicted,
            100.0 * (c.w_empirical / c.w_predicted - 1.0),
            c.z_empirical,
            c.z_predicted,
            100.0 * (c.z_empirical / c.z_predicted - 1.0),
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
