use std::path::{Path, PathBuf};

use decision_diffusion::harness::{
    calibrate_gamma_empirical, load_scenario, run_steady_state_error, run_type2_error, ScenarioSpec,
    Sweep,
};
use decision_diffusion::Error;

fn scenario_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn bundled(name: &str) -> ScenarioSpec {
    load_scenario(scenario_dir().join(format!("{name}.scenario"))).unwrap()
}

fn from_text(text: &str) -> Result<ScenarioSpec, Error> {
    ScenarioSpec::from_json(text, &scenario_dir(), "inline")
}

#[test]
fn bundled_scenarios_load_and_build() {
    let mut count = 0;
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "scenario") {
            let spec = load_scenario(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            for &alpha in spec.alphas() {
                spec.scenario_at(alpha, spec.horizon())
                    .unwrap_or_else(|e| panic!("{} at alpha {alpha}: {e}", path.display()));
            }
            count += 1;
        }
    }
    assert!(count >= 9);
}

#[test]
fn main_network_settings() {
    let spec = bundled("ia_35");
    assert_eq!(spec.graph.len(), 35);
    assert!(spec.graph.is_connected());
    let config = spec.engine_config();
    assert_eq!(config.mu, 0.05);
    assert!(config.self_weights.iter().all(|&a| a == 0.5));
    assert_eq!(spec.agents(), vec![0, 12, 3, 17]);
}

#[test]
fn round_trips_through_json() {
    let spec = bundled("pia_35");
    let again = from_text(&spec.to_json()).unwrap();
    assert_eq!(again.file, spec.file);
    assert_eq!(again.graph, spec.graph);
}

const SMALL: &str = r#"{
  "name": "small",
  "graph": {"kind": "edge_list", "agents": 3, "edges": [[1, 2], [2, 3]], "clusters": [1, 1, 2]},
  "pmfs": {"family": "explicit", "pmfs": {"a": [0.5, 0.3, 0.2], "b": PMF_B}},
  "model": {"mode": "ia", "hypotheses": ["a", "b"], "schedule": {"1": [{"state": "a"}], "CLUSTER": [{"state": "b"}]}},
  "engine": {"mu": 0.05, "self_weight": 0.5, "clustering": "paper"},
  "horizon": 100,
  "seed": 1
}"#;

fn small(pmf_b: &str, cluster: &str) -> String {
    SMALL.replace("PMF_B", pmf_b).replace("CLUSTER", cluster)
}

#[test]
fn small_scenario_is_valid() {
    let spec = from_text(&small("[0.2, 0.3, 0.5]", "2")).unwrap();
    spec.scenario_at(0.0, 100).unwrap();
}

#[test]
fn rejects_pmf_not_summing_to_one() {
    let err = from_text(&small("[0.2, 0.3, 0.4]", "2"))
        .and_then(|s| s.scenario_at(0.0, 100).map(|_| ()))
        .unwrap_err();
    let message = err.to_string();
    assert!(message.contains('b'), "{message}");
    assert!(message.contains("0.9"), "{message}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn rejects_unknown_cluster() {
    let err = from_text(&small("[0.2, 0.3, 0.5]", "3"))
        .and_then(|s| s.scenario_at(0.0, 100).map(|_| ()))
        .unwrap_err();
    assert!(err.to_string().contains('3'), "{err}");
}

#[test]
fn rejects_alpha_outside_family() {
    let spec = bundled("ia_35");
    assert!(spec.scenario_at(0.4, 10).is_err());
}

#[test]
fn well_separated_alternatives_are_detected() {
    let spec = bundled("pia_35_swapped");
    let all: Vec<usize> = (0..spec.graph.len()).collect();
    let cal = Sweep::from_spec(&spec, 400).with_agents(all);
    let (gammas, _) = calibrate_gamma_empirical(&spec, &cal, 0.1).unwrap();
    let eval = cal.clone().with_seed(cal.seed + 400).with_runs(300).with_alphas(vec![0.3]);
    let table = run_type2_error(&spec, &gammas, &eval).unwrap();
    assert_eq!(table.rows.len(), spec.graph.len());
    for row in &table.rows {
        assert!(row.value < 0.05, "agent {} type II {}", row.agent, row.value);
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let spec = bundled("ia_35");
    let sweep = Sweep::from_spec(&spec, 30).with_alphas(vec![0.2]).with_horizon(300);
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.csv"), dir.path().join("b.csv")];
    for p in &paths {
        run_steady_state_error(&spec, &sweep).unwrap().write(p).unwrap();
    }
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[1]).unwrap());
    let other = run_steady_state_error(&spec, &sweep.clone().with_seed(sweep.seed + 1000)).unwrap();
    assert_ne!(other.to_csv(), std::fs::read_to_string(&paths[0]).unwrap());
}
