//! Variance-reduction factors of combination matrices.

use decision_diffusion::diffusion::{static_sets, ClusteringRule};
use decision_diffusion::network::{beta_factor, combination_from_sets, CombinationMatrix, Graph};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let isolated = beta_factor(&CombinationMatrix::identity(4))?;
    let averaged = beta_factor(&CombinationMatrix::uniform(35))?;
    println!("identity: beta = {:.6} (steps {:?})", isolated.beta[0], isolated.mu_used);
    println!("uniform over 35: beta = {:.6}, 1/70 = {:.6}", averaged.beta[0], 1.0 / 70.0);

    let net = Graph::parse_file(include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/graphs/two_cluster_35.graph")))?;
    let weights = vec![0.5; net.len()];
    for rule in [ClusteringRule::Oracle, ClusteringRule::None] {
        let sets = static_sets(&net, rule).expect("static rule");
        let a = combination_from_sets(&net, &sets, &weights)?;
        let beta = beta_factor(&a)?.beta;
        let shown: Vec<String> = [1, 13, 4, 18].iter().map(|k| format!("{k}: {:.4}", beta[k - 1])).collect();
        println!("{rule:?} matrix: {}", shown.join(", "));
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
