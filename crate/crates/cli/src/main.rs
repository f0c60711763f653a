//! `adiab`: scenario runner for open-system adiabatic dynamics.
//!
//! Exit status contract: 0 success, 2 configuration error, 3 numeric
//! failure.

mod commands;
mod config;
mod table;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::RunError;
use config::{Model, ScenarioConfig};

#[derive(Parser)]
#[command(
    name = "adiab",
    about = "Adiabatic dynamics of dephasing-coupled qubits: spectra, adiabatic-condition diagnostics, trajectories, sweeps, virtual tomography",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tracked superoperator spectrum along the time grid
    Spectrum(CommonArgs),
    /// Adiabatic parameters xi for requested label pairs
    Xi(XiArgs),
    /// Trajectory with fidelity and diagnostic columns
    Evolve(CommonArgs),
    /// Final-time fidelities over a tau (and gamma) sweep
    Sweep(SweepArgs),
    /// Preset: resonant Landau-Zener fidelity traces + xi inset data
    Fig2(CommonArgs),
    /// Preset: Deutsch adiabatic fidelity vs tau + xi inset data
    Fig3(SweepArgs),
    /// Preset: Deutsch target-state fidelity vs tau with window detection
    Fig4(SweepArgs),
    /// Virtual tomography counts along a trajectory
    Tomo(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Model: lz | deutsch
    #[arg(long)]
    model: Option<String>,
    /// Config file with `key = value` lines (CLI flags override it)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for stochastic sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Number of grid samples
    #[arg(long)]
    samples: Option<usize>,
    /// Evolution horizon in seconds
    #[arg(long)]
    tmax: Option<f64>,
    /// Integrator relative tolerance
    #[arg(long = "rel-tol")]
    rel_tol: Option<f64>,
    /// Integrator absolute tolerance
    #[arg(long = "abs-tol")]
    abs_tol: Option<f64>,
    /// Landau-Zener static splitting (rad/s)
    #[arg(long)]
    omega0: Option<f64>,
    /// Landau-Zener drive amplitude (rad/s)
    #[arg(long)]
    omegax: Option<f64>,
    /// Landau-Zener drive frequency (rad/s)
    #[arg(long)]
    omega: Option<f64>,
    /// Dephasing rate (1/s)
    #[arg(long)]
    gamma: Option<f64>,
    /// Deutsch drive strength (rad/s)
    #[arg(long = "omega-d")]
    omega_d: Option<f64>,
    /// Deutsch oracle bit f(0)
    #[arg(long)]
    f0: Option<u8>,
    /// Deutsch oracle bit f(1)
    #[arg(long)]
    f1: Option<u8>,
    /// Deutsch total evolution time (s)
    #[arg(long)]
    tau: Option<f64>,
    /// Tomography shots per basis (enables the protocol)
    #[arg(long)]
    shots: Option<usize>,
    /// Tomography repeats (enables the protocol)
    #[arg(long)]
    repeats: Option<usize>,
    /// Symmetric readout bit-flip probability (enables the protocol)
    #[arg(long = "readout-error")]
    readout_error: Option<f64>,
}

#[derive(Args, Clone)]
struct XiArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated label pairs, e.g. "21,31"
    #[arg(long)]
    pairs: Option<String>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Comma-separated list of total times (s)
    #[arg(long)]
    taus: Option<String>,
    /// Comma-separated list of dephasing rates (1/s)
    #[arg(long)]
    gammas: Option<String>,
    /// Fidelity threshold defining a high-fidelity window
    #[arg(long = "window-threshold")]
    window_threshold: Option<f64>,
}

/// Merge defaults, config file, and CLI flags (in that precedence order);
/// `touched` records every key set by file or flag for model-aware
/// validation.
fn assemble(
    common: &CommonArgs,
    extra: &[(&str, Option<String>)],
) -> Result<(ScenarioConfig, Vec<String>), RunError> {
    let mut cfg = ScenarioConfig::default();
    let mut touched: Vec<String> = Vec::new();

    if let Some(path) = &common.config {
        touched.extend(cfg.apply_file(path)?);
    }

    let set = |cfg: &mut ScenarioConfig,
                   touched: &mut Vec<String>,
                   key: &str,
                   value: Option<String>|
     -> Result<(), RunError> {
        if let Some(v) = value {
            cfg.apply_entry(key, &v)?;
            touched.push(key.to_string());
        }
        Ok(())
    };

    let c = common;
    set(&mut cfg, &mut touched, "model", c.model.clone())?;
    set(&mut cfg, &mut touched, "seed", c.seed.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "samples", c.samples.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "tmax", c.tmax.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "rel_tol", c.rel_tol.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "abs_tol", c.abs_tol.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "omega0", c.omega0.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "omegax", c.omegax.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "omega", c.omega.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "gamma", c.gamma.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "omega_d", c.omega_d.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "f0", c.f0.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "f1", c.f1.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "tau", c.tau.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "shots", c.shots.map(|v| v.to_string()))?;
    set(&mut cfg, &mut touched, "repeats", c.repeats.map(|v| v.to_string()))?;
    set(
        &mut cfg,
        &mut touched,
        "readout_error",
        c.readout_error.map(|v| v.to_string()),
    )?;
    if let Some(out) = &c.out {
        cfg.out = Some(out.clone());
        touched.push("out".into());
    }
    for (key, value) in extra {
        set(&mut cfg, &mut touched, key, value.clone())?;
    }

    Ok((cfg, touched))
}

/// Preset bundles pin the model and its physical parameters; reject attempts
/// to override them so a preset always means the published configuration.
fn enforce_preset(
    cfg: &mut ScenarioConfig,
    touched: &[String],
    model: Model,
    pinned: &[&str],
    default_samples: usize,
) -> Result<(), RunError> {
    let conflicts: Vec<&str> = pinned
        .iter()
        .copied()
        .filter(|k| touched.iter().any(|t| t == k))
        .collect();
    if !conflicts.is_empty() {
        return Err(config::ConfigError(format!(
            "keys {conflicts:?} are pinned by this preset"
        ))
        .into());
    }
    cfg.model = model;
    if !touched.iter().any(|t| t == "samples") {
        cfg.samples = default_samples;
    }
    Ok(())
}

fn run() -> Result<(), RunError> {
    let cli = Cli::parse();
    let (cfg, touched, runner): (ScenarioConfig, Vec<String>, fn(&ScenarioConfig, &mut dyn Write) -> Result<(), RunError>) =
        match &cli.command {
            Command::Spectrum(c) => {
                let (cfg, touched) = assemble(c, &[])?;
                (cfg, touched, commands::cmd_spectrum)
            }
            Command::Xi(args) => {
                let extra = [("pairs", args.pairs.clone())];
                let (cfg, touched) = assemble(&args.common, &extra)?;
                (cfg, touched, commands::cmd_xi)
            }
            Command::Evolve(c) => {
                let (cfg, touched) = assemble(c, &[])?;
                (cfg, touched, commands::cmd_evolve)
            }
            Command::Sweep(args) => {
                let extra = [
                    ("taus", args.taus.clone()),
                    ("gammas", args.gammas.clone()),
                    ("window_threshold", args.window_threshold.map(|v| v.to_string())),
                ];
                let (cfg, touched) = assemble(&args.common, &extra)?;
                (cfg, touched, commands::cmd_sweep)
            }
            Command::Fig2(c) => {
                let (mut cfg, touched) = assemble(c, &[])?;
                enforce_preset(
                    &mut cfg,
                    &touched,
                    Model::Lz,
                    &["model", "omega0", "omegax", "omega", "gamma"],
                    4801,
                )?;
                (cfg, touched, commands::cmd_fig2)
            }
            Command::Fig3(args) => {
                let extra = [("taus", args.taus.clone())];
                let (mut cfg, touched) = assemble(&args.common, &extra)?;
                enforce_preset(
                    &mut cfg,
                    &touched,
                    Model::Deutsch,
                    &["model", "omega_d", "f0", "f1", "gamma", "gammas", "tau"],
                    1501,
                )?;
                (cfg, touched, commands::cmd_fig3)
            }
            Command::Fig4(args) => {
                let extra = [
                    ("taus", args.taus.clone()),
                    ("window_threshold", args.window_threshold.map(|v| v.to_string())),
                ];
                let (mut cfg, touched) = assemble(&args.common, &extra)?;
                enforce_preset(
                    &mut cfg,
                    &touched,
                    Model::Deutsch,
                    &["model", "omega_d", "f0", "f1", "gamma", "gammas", "tau"],
                    1501,
                )?;
                (cfg, touched, commands::cmd_fig4)
            }
            Command::Tomo(c) => {
                let (mut cfg, touched) = assemble(c, &[])?;
                if !touched.iter().any(|t| t == "samples") {
                    cfg.samples = 51;
                }
                (cfg, touched, commands::cmd_tomo)
            }
        };

    cfg.validate(&touched)?;

    match cfg.out.clone() {
        Some(path) => {
            let mut file = std::fs::File::create(&path).map_err(RunError::Io)?;
            let result = runner(&cfg, &mut file);
            file.flush().map_err(RunError::Io)?;
            result
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let result = runner(&cfg, &mut lock);
            lock.flush().map_err(RunError::Io)?;
            result
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        // A reader that stops consuming (e.g. `| head`) is not a failure.
        Err(RunError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(3)
        }
    }
}
