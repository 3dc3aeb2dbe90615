//! `purifier`: run the purification pipeline, replay schedules with
//! tomography, export unitaries, and validate result directories.
//!
//! Exit codes: 0 success, 1 error, 2 validation failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use purifier::experiment::{replay_schedule, run_experiment, ExperimentConfig};
use purifier::report::{
    export_unitaries, read_schedule, validate_results, write_experiment, write_tomography, ExportMode, CONFIG_FILE,
    SCHEDULE_FILE,
};

#[derive(Parser)]
#[command(name = "purifier", version, about = "Open-system dynamics by purification and unitary fitting")]
struct Cli {
    /// Log verbosity (-v info, -vv debug). `RUST_LOG` overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate, purify and fit unitaries on the time grid.
    Run(ConfigArgs),
    /// Replay a unitary schedule with shot-sampled tomography.
    Shots {
        /// Schedule JSON; defaults to `unitaries.json` in the output directory.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write the fitted unitaries as absolute or step-to-step JSON.
    ExportUnitaries {
        /// Results directory containing `unitaries.json`.
        results: PathBuf,
        #[arg(long, value_enum, default_value = "absolute")]
        mode: Mode,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check the invariants of a results directory.
    Validate {
        results: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Absolute,
    Step,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment JSON; keys not given take their defaults.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Print the resolved configuration and exit.
    #[arg(long)]
    print_config: bool,
    /// Worker threads for propagation and cold-start fits.
    #[arg(long, short, default_value_t = 1)]
    jobs: usize,
    /// Fit every time point from a cold start, in parallel (sets `warm_start` to false).
    #[arg(long)]
    parallel: bool,

    #[arg(long, value_parser = ["tls", "tfim"])]
    model: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sites: Option<usize>,
    #[arg(long = "J", id = "coupling_j")]
    coupling_j: Option<f64>,
    #[arg(long = "h", id = "field_h")]
    field_h: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long, value_parser = ["schmidt", "optimize"])]
    purification_mode: Option<String>,
    #[arg(long)]
    warm_start: Option<bool>,
    /// Shots per basis circuit; 0 selects exact probabilities.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<String>,
}

#[derive(Debug)]
enum Failure {
    Error(String),
    Invalid,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Error(e.to_string())
    }
}

impl ConfigArgs {
    /// File (or `fallback` if no file was given) with flag overrides applied.
    fn resolve(&self, fallback: Option<&Path>) -> Result<ExperimentConfig, Failure> {
        let path = self.config.as_deref().or(fallback.filter(|p| p.is_file()));
        let mut obj: Map<String, Value> = match path {
            Some(p) => serde_json::from_str(&fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?)?,
            None => Map::new(),
        };
        let mut set = |k: &str, v: Option<Value>| {
            if let Some(v) = v {
                obj.insert(k.into(), v);
            }
        };
        set("model", self.model.clone().map(Value::from));
        set("delta", self.delta.map(Value::from));
        set("omega", self.omega.map(Value::from));
        set("gamma", self.gamma.map(Value::from));
        set("sites", self.sites.map(Value::from));
        set("J", self.coupling_j.map(Value::from));
        set("h", self.field_h.map(Value::from));
        set("t_max", self.t_max.map(Value::from));
        set("n_points", self.n_points.map(Value::from));
        set("purification_mode", self.purification_mode.clone().map(Value::from));
        set("warm_start", self.warm_start.map(Value::from));
        set("shots", self.shots.map(|s| if s == 0 { Value::Null } else { Value::from(s) }));
        set("seed", self.seed.map(Value::from));
        set("output_dir", self.output_dir.clone().map(Value::from));
        if self.parallel {
            obj.insert("warm_start".into(), Value::Bool(false));
        }
        Ok(ExperimentConfig::from_json(&Value::Object(obj).to_string())?)
    }
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve(None)?;
            if args.print_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            let result = run_experiment(&cfg, args.jobs.max(1))?;
            let dir = PathBuf::from(&cfg.output_dir);
            let s = write_experiment(&result, &dir)?;
            println!(
                "{}: mean distance {:e}, max distance {:e}, max residual {:e} -> {}",
                s.experiment,
                s.mean_distance,
                s.max_distance,
                s.max_residual,
                dir.display()
            );
        }
        Command::Shots { schedule, config } => {
            // A schedule written by `run` carries its config alongside.
            let sibling = schedule.as_ref().and_then(|s| s.parent()).map(|d| d.join(CONFIG_FILE));
            let cfg = config.resolve(sibling.as_deref())?;
            if config.print_config {
                println!("{}", cfg.to_json());
                return Ok(());
            }
            let dir = PathBuf::from(&cfg.output_dir);
            let path = schedule.unwrap_or_else(|| dir.join(SCHEDULE_FILE));
            let sched = read_schedule(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let outcomes = replay_schedule(&cfg, &sched)?;
            let s = write_tomography(&cfg, &outcomes, &dir)?;
            let shots = s.shots.map_or("exact".to_string(), |n| n.to_string());
            println!(
                "{} ({shots} shots): distance {:e} +/- {:e} over {} points -> {}",
                s.experiment,
                s.mean_distance,
                s.std_distance,
                s.n_points,
                dir.display()
            );
        }
        Command::ExportUnitaries { results, mode, out } => {
            let path = results.join(SCHEDULE_FILE);
            let sched = read_schedule(&path).map_err(|e| format!("{}: {e}", path.display()))?;
            let mode = match mode {
                Mode::Absolute => ExportMode::Absolute,
                Mode::Step => ExportMode::Step,
            };
            write_out(out.as_deref(), &export_unitaries(&sched, mode)?)?;
        }
        Command::Validate { results } => {
            let report = validate_results(&results);
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if !report.passed() {
                return Err(Failure::Invalid);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid) => ExitCode::from(2),
        Err(Failure::Error(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
