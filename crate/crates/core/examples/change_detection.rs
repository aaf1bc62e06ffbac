//! Partially informed agents detecting a switch from the nominal distribution, built without a scenario file.

use std::collections::BTreeMap;

use decision_diffusion::diffusion::{
    ClusteringRule, Decision, EngineConfig, Engine, NatureState, ObservationModel, PiaDecision,
    PiaSchedule, Scenario, Segment, Timeline,
};
use decision_diffusion::network::{build_graph, GraphSpec};
use decision_diffusion::simplex::{Pmf, StatMode};
use decision_diffusion::Result;

pub fn run() -> Result<()> {
    let graph = build_graph(&GraphSpec::RingWithHub {
        ring_size: 12,
        hub_cluster: 1,
        ring_cluster: 2,
        ring_pattern: Some(vec![1, 2]),
        ring_edges: true,
    })?
    .graph;

    let null = Pmf::uniform(3)?;
    let alternatives = BTreeMap::from([
        (1, Pmf::new(vec![0.6, 0.2, 0.2])?),
        (2, Pmf::new(vec![0.2, 0.2, 0.6])?),
    ]);
    let nature = Timeline::new(vec![
        Segment { steps: 400, state: NatureState::H0 },
        Segment { steps: 400, state: NatureState::H1(0) },
    ])?;
    let model = ObservationModel::Pia {
        null,
        schedule: PiaSchedule::new(nature, vec![alternatives])?,
    };
    let config = EngineConfig::new(StatMode::Pia, graph.len())
        .with_mu(0.05)
        .with_delta(0.2)
        .with_gamma(0.02)
        .with_clustering(ClusteringRule::Paper);
    let scenario = Scenario::new(graph, model, config)?;

    let mut engine = Engine::new(&scenario, 11)?;
    for _ in 0..8 {
        engine.run(100)?;
        let alarms = engine
            .decide_all()?
            .iter()
            .filter(|d| **d == Decision::Binary(PiaDecision::H1))
            .count();
        println!(
            "step {:>3}: {:>2} of {} agents report a change, hub D(w || p0) = {:.4}",
            engine.time(),
            alarms,
            scenario.graph().len(),
            engine.divergence_from_null(0)?
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
