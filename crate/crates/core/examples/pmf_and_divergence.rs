//! PMFs on a finite alphabet, KL divergence, empirical types and the two statistic modes.

use decision_diffusion::simplex::{
    clip_to_simplex, empirical_type, indicator_vector, kl_divergence, log_likelihoods, Pmf,
};
use decision_diffusion::Result;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run() -> Result<()> {
    let uniform = Pmf::uniform(3)?;
    let skewed = Pmf::new(vec![0.6, 0.3, 0.1])?;

    println!("H(uniform) = {:.4} nats", uniform.entropy());
    println!("D(skewed || uniform) = {:.5}", kl_divergence(skewed.probs(), &uniform)?);
    println!("D(uniform || skewed) = {:.5}", kl_divergence(uniform.probs(), &skewed)?);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let draws: Vec<usize> = (0..2000).map(|_| skewed.sample(&mut rng)).collect();
    let t = empirical_type(&draws, skewed.alphabet())?;
    println!("type of 2000 draws: {:?}", t.frequencies());
    println!("D(type || skewed) = {:.5}", kl_divergence(&t.frequencies(), &skewed)?);

    // Informed agents see log-likelihoods, partially informed agents see indicators.
    let hyps = [uniform.clone(), skewed.clone()];
    println!("log-likelihoods of symbol 2: {:?}", log_likelihoods(2, &hyps)?.values);
    println!("indicator of symbol 2: {:?}", indicator_vector(2, skewed.alphabet())?.values);

    // A Gaussian draw can leave the simplex; clipping maps it back before any divergence.
    println!("clip([0.7, 0.35, -0.05]) = {:?}", clip_to_simplex(&[0.7, 0.35, -0.05]));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
