//! `cqed`: run an experiment, write `<out>/<experiment>.csv` and
//! `<out>/manifest.json`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical error
//! (including a failed `validate`).

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};

use cavity_qed::config::{load_config, ExperimentConfig};
use cavity_qed::experiments::{self, Experiment};
use cavity_qed::output::{write_manifest, write_table, RunManifest};
use cavity_qed::rng::RNG_ALGORITHM;
use cavity_qed::validation;

#[derive(Parser)]
#[command(name = "cqed", version, about = "Cavity QED experiments as reproducible CSV tables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value unit` lines); defaults apply without one.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed` from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "cqed-out")]
    out: PathBuf,
    /// Ensemble size or shots per scan point; overrides `trajectories`.
    #[arg(long, global = true)]
    trajectories: Option<u64>,
    /// Suppress every stochastic layer.
    #[arg(long, global = true)]
    ideal: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Vacuum Rabi oscillation versus interaction time.
    Rabi,
    /// Cavity transmission with and without an atom.
    Splitting,
    /// Ramsey fringes with an empty interferometer.
    Ramsey,
    /// Ramsey fringes of a g-i atom through a 2π pulse, 0 and 1 photon.
    PhaseGate,
    /// Conditional third-atom detection versus injection phase.
    FieldPhase,
    /// Truth table of the photon-controlled NOT.
    Cnot,
    /// Thermal photon tracking with QND probes.
    Qnd,
    /// Run the built-in invariant checks.
    Validate,
}

impl Command {
    fn experiment(self) -> Option<Experiment> {
        Some(match self {
            Command::Rabi => Experiment::Rabi,
            Command::Splitting => Experiment::Splitting,
            Command::Ramsey => Experiment::Ramsey,
            Command::PhaseGate => Experiment::PhaseGate,
            Command::FieldPhase => Experiment::FieldPhase,
            Command::Cnot => Experiment::Cnot,
            Command::Qnd => Experiment::Qnd,
            Command::Validate => return None,
        })
    }
}

/// `println!` that tolerates a closed stdout (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path).map_err(|e| e.to_string())?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.trajectories {
        if n == 0 {
            return Err("--trajectories must be >= 1".into());
        }
        cfg.trajectories = n;
    }
    cfg.ideal |= cli.ideal;
    Ok(cfg)
}

fn validate() -> ExitCode {
    let results = validation::run_all();
    let mut failed = 0;
    for r in &results {
        say!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    say!("{} checks, {failed} failed", results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NUMERICAL)
    }
}

fn print_cnot(cfg: &ExperimentConfig) -> Result<(), cavity_qed::CqedError> {
    say!("control_in target_in -> control_out target_out");
    for r in experiments::cnot_truth_table(cfg)? {
        say!(
            "|{}> {} -> |{}> {}",
            r.control_in, r.target_in, r.control_out, r.target_out
        );
    }
    Ok(())
}

fn write_outputs(
    out: &Path,
    experiment: Experiment,
    cfg: &ExperimentConfig,
    table: &experiments::ResultTable,
    started: f64,
) -> std::io::Result<()> {
    std::fs::create_dir_all(out)?;
    let entry = write_table(out, experiment.name(), table)?;
    say!("wrote {} ({} rows, sha256 {})", out.join(&entry.file).display(), entry.rows, entry.sha256);
    let manifest = RunManifest {
        artifact: "cavity-qed".into(),
        version: cavity_qed::VERSION.into(),
        rng_algorithm: RNG_ALGORITHM.into(),
        command: experiment.name().into(),
        seed: cfg.seed,
        ideal: cfg.ideal,
        config: serde_json::to_value(cfg).map_err(std::io::Error::other)?,
        started_unix_s: started,
        finished_unix_s: now(),
        outputs: vec![entry],
    };
    write_manifest(out, &manifest)
}

fn main() -> ExitCode {
    let started = now();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let Some(experiment) = cli.command.experiment() else {
        return validate();
    };
    let cfg = match resolve_config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("cqed: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Err(msg) = experiment.check_scan(&cfg) {
        eprintln!("cqed: invalid configuration: {msg}");
        return ExitCode::from(EXIT_CONFIG);
    }
    if experiment == Experiment::Cnot && cfg.ideal {
        if let Err(e) = print_cnot(&cfg) {
            eprintln!("cqed: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    }
    let table = match experiments::run(experiment, &cfg) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cqed: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    if let Err(e) = write_outputs(&cli.out, experiment, &cfg, &table, started) {
        eprintln!("cqed: cannot write outputs to {}: {e}", cli.out.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::SUCCESS
}
