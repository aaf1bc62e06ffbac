//! Building agent graphs: generators, the plain-text file format and cluster structure.

use decision_diffusion::network::{build_graph, GeometricClusters, Graph, GraphSpec};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let ring = build_graph(&GraphSpec::RingWithHub {
        ring_size: 29,
        hub_cluster: 1,
        ring_cluster: 2,
        ring_pattern: None,
        ring_edges: true,
    })?
    .graph;
    println!("ring with hub: {} agents, hub degree {}, ring degree {}", ring.len(), ring.degree(0), ring.degree(1));
    println!("hub's same-cluster neighbors: {:?}", ring.effective_neighbors(0));

    let text = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/graphs/two_cluster_35.graph"));
    let net = Graph::parse_file(text)?;
    for k in [1, 13, 4, 18] {
        println!(
            "agent {k:>2}: cluster {}, degree {}, effective {}",
            net.cluster(k - 1),
            net.degree(k - 1),
            net.effective_neighbors(k - 1).len()
        );
    }
    assert_eq!(Graph::parse_file(&net.to_file_string())?, net);

    let built = build_graph(&GraphSpec::RandomGeometric {
        agents: 40,
        radius: 0.15,
        seed: 4,
        clusters: GeometricClusters::SplitX { threshold: 0.5 },
    })?;
    println!(
        "random geometric: {} components, labels {:?}, warnings {:?}",
        built.graph.components(),
        built.graph.cluster_labels(),
        built.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
