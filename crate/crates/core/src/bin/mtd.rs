use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use decision_diffusion::diffusion::ClusteringRule;
use decision_diffusion::harness::{
    beta_report, bounds_ia, bounds_pia, calibrate_gamma_empirical, load_scenario,
    min_calibration_runs, run_steady_state_error, run_type1_error, run_type2_error, simulate,
    theory_check, theory_table, BoundSettings, Gammas, ResultTable, ScenarioSpec, Sweep,
};
use decision_diffusion::{Error, Result};

#[derive(Parser)]
#[command(name = "mtd", version, about = "Multi-task diffusion decision networks: simulation and Monte Carlo sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Base seed; replica r uses seed + r. Defaults to the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo replicas.
    #[arg(long)]
    runs: Option<usize>,
    /// Steps before the decision. Defaults to the scenario's horizon.
    #[arg(long)]
    horizon: Option<usize>,
    /// Comma-separated alpha values. Defaults to the scenario's list.
    #[arg(long)]
    alphas: Option<String>,
    /// Comma-separated 1-based agent ids, or `all`.
    #[arg(long)]
    agents: Option<String>,
    /// Output CSV path (a `.meta.json` sidecar is written next to it). Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replicas.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and dump w, z and decisions.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Record every this many steps (the final step is always recorded).
        #[arg(long, default_value_t = 100)]
        stride: usize,
    },
    /// Steady-state error probability of informed agents versus alpha.
    SweepIa {
        #[command(flatten)]
        common: Common,
        /// Also apply a 3-point moving average along alpha.
        #[arg(long)]
        smooth: bool,
    },
    /// Per-agent thresholds for a type-I target under H0.
    CalibrateGamma {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.1)]
        type1: f64,
        /// Re-estimate the type-I error at the calibrated thresholds on fresh seeds.
        #[arg(long)]
        validate: bool,
    },
    /// Type-II error of partially informed agents versus alpha.
    SweepPia {
        #[command(flatten)]
        common: Common,
        /// Threshold CSV from `calibrate-gamma`; calibrated on the fly when absent.
        #[arg(long)]
        gammas: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        type1: f64,
        /// H0 replicas for on-the-fly calibration.
        #[arg(long, default_value_t = 5000)]
        calibration_runs: usize,
        #[arg(long)]
        smooth: bool,
    },
    /// Gaussian upper and lower bounds on the informed-agent error.
    BoundsIa {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5000)]
        mc_count: usize,
        /// Variance factor replacing beta in the lower bound.
        #[arg(long)]
        beta_override: Option<f64>,
    },
    /// Gaussian upper and lower bounds on the partially-informed type-II error.
    BoundsPia {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 5000)]
        mc_count: usize,
        #[arg(long)]
        beta_override: Option<f64>,
        #[arg(long, default_value_t = 0.1)]
        type1: f64,
    },
    /// Variance-reduction factors of the static combination matrix.
    Beta {
        #[command(flatten)]
        common: Common,
        /// `oracle` (true clusters) or `none` (every neighbor).
        #[arg(long, default_value = "oracle", value_parser = parse_rule)]
        rule: ClusteringRule,
    },
    /// Compare replica variances of w and z with the steady-state prediction.
    TheoryCheck {
        #[command(flatten)]
        common: Common,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 0.1)]
        tolerance: f64,
    },
}

fn parse_rule(s: &str) -> std::result::Result<ClusteringRule, String> {
    match s {
        "oracle" => Ok(ClusteringRule::Oracle),
        "none" => Ok(ClusteringRule::None),
        "paper" => Ok(ClusteringRule::Paper),
        "naive" => Ok(ClusteringRule::Naive),
        _ => Err(format!("unknown rule `{s}`")),
    }
}

fn parse_alphas(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|a| {
            a.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad alpha `{a}`")))
        })
        .collect()
}

fn parse_agents(s: &str, count: usize) -> Result<Vec<usize>> {
    if s.trim() == "all" {
        return Ok((0..count).collect());
    }
    s.split(',')
        .map(|a| match a.trim().parse::<usize>() {
            Ok(k) if (1..=count).contains(&k) => Ok(k - 1),
            _ => Err(Error::InvalidArgument(format!("bad agent `{a}`; expected 1..={count}"))),
        })
        .collect()
}

struct Loaded {
    spec: ScenarioSpec,
    sweep: Sweep,
}

impl Common {
    fn load(&self, default_runs: usize) -> Result<Loaded> {
        let spec = load_scenario(&self.scenario)?;
        for w in &spec.graph_warnings {
            eprintln!("warning: {w}");
        }
        let mut sweep = Sweep::from_spec(&spec, self.runs.unwrap_or(default_runs)).with_workers(self.workers);
        if let Some(seed) = self.seed {
            sweep = sweep.with_seed(seed);
        }
        if let Some(h) = self.horizon {
            sweep = sweep.with_horizon(h);
        }
        if let Some(a) = &self.alphas {
            sweep = sweep.with_alphas(parse_alphas(a)?);
        }
        if let Some(a) = &self.agents {
            sweep = sweep.with_agents(parse_agents(a, spec.graph.len())?);
        }
        Ok(Loaded { spec, sweep })
    }

    fn emit_text(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| io_error(Path::new("<stdout>"), e)),
        }
    }

    fn emit(&self, table: &ResultTable) -> Result<()> {
        match &self.out {
            Some(path) => table.write(path),
            None => self.emit_text(&table.to_csv()),
        }
    }
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn first_alpha(sweep: &Sweep) -> f64 {
    sweep.alphas.first().copied().unwrap_or(0.0)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, stride } => {
            let Loaded { spec, sweep } = common.load(1)?;
            let scenario = spec.scenario_at(first_alpha(&sweep), sweep.horizon)?;
            common.emit_text(&simulate(&scenario, sweep.horizon, sweep.seed, stride)?)
        }
        Command::SweepIa { common, smooth } => {
            let Loaded { spec, sweep } = common.load(5000)?;
            let table = run_steady_state_error(&spec, &sweep)?;
            common.emit(&if smooth { table.smoothed() } else { table })
        }
        Command::CalibrateGamma {
            common,
            type1,
            validate,
        } => {
            let Loaded { spec, sweep } = common.load(5000)?;
            let (gammas, mut table) = calibrate_gamma_empirical(&spec, &sweep, type1)?;
            if validate {
                let fresh = sweep.clone().with_seed(sweep.seed.wrapping_add(sweep.runs as u64));
                table.extend(run_type1_error(&spec, &gammas, &fresh)?);
            }
            common.emit(&table)
        }
        Command::SweepPia {
            common,
            gammas,
            type1,
            calibration_runs,
            smooth,
        } => {
            let Loaded { spec, sweep } = common.load(500)?;
            let mut table = ResultTable::default();
            let gammas = match gammas {
                Some(path) => Gammas::from_table(&ResultTable::read(&path)?)?,
                None => {
                    let cal = sweep.clone().with_runs(calibration_runs.max(min_calibration_runs(type1)));
                    let (g, rows) = calibrate_gamma_empirical(&spec, &cal, type1)?;
                    table.extend(rows);
                    g
                }
            };
            // Type-II replicas start after the calibration seeds.
            let eval = sweep.clone().with_seed(sweep.seed.wrapping_add(calibration_runs as u64));
            let type2 = run_type2_error(&spec, &gammas, &eval)?;
            table.metadata = type2.metadata.clone();
            table.extend(if smooth { type2.smoothed() } else { type2 });
            common.emit(&table)
        }
        Command::BoundsIa {
            common,
            mc_count,
            beta_override,
        } => {
            let Loaded { spec, sweep } = common.load(1)?;
            let settings = BoundSettings {
                mc_count,
                beta_override,
                ..BoundSettings::default()
            };
            common.emit(&bounds_ia(&spec, &sweep, settings)?)
        }
        Command::BoundsPia {
            common,
            mc_count,
            beta_override,
            type1,
        } => {
            let Loaded { spec, sweep } = common.load(1)?;
            let settings = BoundSettings {
                mc_count,
                beta_override,
                type1_target: type1,
            };
            common.emit(&bounds_pia(&spec, &sweep, settings)?)
        }
        Command::Beta { common, rule } => {
            let Loaded { spec, sweep } = common.load(1)?;
            common.emit(&beta_report(&spec, rule, &sweep.agents)?)
        }
        Command::TheoryCheck { common, tolerance } => {
            let Loaded { spec, sweep } = common.load(2000)?;
            let alpha = first_alpha(&sweep);
            let checks = theory_check(&spec, alpha, &sweep)?;
            common.emit(&theory_table(&spec, alpha, &sweep, &checks))?;
            let worst_w = checks.iter().map(|c| c.w_relative_error()).fold(0.0, f64::max);
            let worst_z = checks.iter().map(|c| c.z_relative_error()).fold(0.0, f64::max);
            eprintln!("largest relative error: w {worst_w:.4}, z {worst_z:.4} (tolerance {tolerance})");
            if worst_w > tolerance || worst_z > tolerance {
                return Err(Error::CheckFailed(format!(
                    "steady-state variance outside relative tolerance {tolerance}"
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
