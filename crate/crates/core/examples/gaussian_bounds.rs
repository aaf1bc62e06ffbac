//! Steady-state Gaussian approximations and the error estimates derived from them.

use decision_diffusion::simplex::Pmf;
use decision_diffusion::theory::{
    bound_error_ia, bound_error_pia, sample_steady_state, steady_state_distribution, BoundKind,
    StatisticModel, SteadyStateKind,
};
use decision_diffusion::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<()> {
    let mu = 0.05;
    let beta = 0.04;
    let hyps = vec![
        Pmf::new(vec![0.5, 0.25, 0.25])?,
        Pmf::new(vec![0.25, 0.5, 0.25])?,
        Pmf::new(vec![0.25, 0.25, 0.5])?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(5);

    let z = steady_state_distribution(&hyps[0], StatisticModel::Ia(&hyps), mu, SteadyStateKind::Isolated)?;
    println!("z mean {:?}", z.mean.as_slice());
    println!("z std  {:?}", z.std_devs());
    let draws = sample_steady_state(&z, 3, &mut rng)?;
    println!("three z draws: {draws:?}");

    for kind in [BoundKind::Upper, BoundKind::Lower] {
        let e = bound_error_ia(&hyps, 0, mu, beta, kind, None, 5000, &mut rng)?;
        println!("IA {kind:?}: error {:.4} +/- {:.4}", e.value, e.stderr);
    }

    let null = Pmf::uniform(3)?;
    for kind in [BoundKind::Upper, BoundKind::Lower] {
        let b = bound_error_pia(&null, &hyps[2], mu, beta, kind, None, 0.1, 5000, &mut rng)?;
        println!("PIA {kind:?}: gamma {:.5}, type II {:.4}", b.gamma, b.type2.value);
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
