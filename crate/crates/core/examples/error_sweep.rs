//! Monte Carlo error probability of informed agents across alpha, written as CSV with a metadata sidecar.

use decision_diffusion::harness::{load_scenario, meta_path, run_steady_state_error, ResultTable, Sweep};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let spec = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/ia_35.scenario"))?;
    let sweep = Sweep::from_spec(&spec, 40)
        .with_alphas(vec![0.1, 0.2, 0.3])
        .with_horizon(400);
    let table = run_steady_state_error(&spec, &sweep)?;

    let dir = std::env::temp_dir().join(format!("mtd-error-sweep-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|source| decision_diffusion::Error::Io {
        path: dir.clone(),
        source,
    })?;
    let out = dir.join("sweep.csv");
    table.write(&out)?;
    let back = ResultTable::read(&out)?;
    print!("{}", back.to_csv());
    println!("metadata in {}", meta_path(&out).display());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
