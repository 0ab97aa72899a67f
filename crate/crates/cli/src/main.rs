use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

mod commands;
mod config;
mod output;

use commands::Log;
use output::Artifacts;

/// Split-step NLSE experiments for single-mode fibers.
#[derive(Parser)]
#[command(name = "fiberlab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, env = "FIBERLAB_THREADS", default_value_t = 0)]
    threads: usize,
    /// Suppress warnings and progress messages.
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate an initial field and export snapshots plus norms.
    Propagate(Common),
    /// Map a field between the lossy and the standard frame.
    Transform(Common),
    /// Check the integrability condition on the potential.
    PainleveCheck(Common),
    /// Modulation-instability spectrum, optionally with seeded simulations.
    Mi(Common),
    /// Distance between the lossy and the integrable model against its bound.
    Closeness(Common),
    /// Closed-form and integrated CW-noise spectra.
    CwNoise(Common),
    /// Orbital distance of a perturbed soliton over propagation.
    Orbital(Common),
    /// Normalized frequency of a step-index fiber.
    Vparam(Common),
}

/// Configuration or input problems exit with 1, numerical failures
/// (divergence, guard-band leaks, unstable step sizes) with 2.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<fiberlab::Error>() {
            return if e.is_numerical() { 2 } else { 1 };
        }
    }
    1
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid configuration {}", path.display()))
}

fn execute<T, F>(name: &str, common: &Common, seed: impl Fn(&T) -> Option<u64>, run: F) -> Result<()>
where
    T: DeserializeOwned + Serialize,
    F: FnOnce(&T, &mut Artifacts, &Log) -> Result<()>,
{
    let cfg: T = load(&common.config)?;
    let log = Log { quiet: common.quiet };
    let mut art = Artifacts::default();
    run(&cfg, &mut art, &log)?;
    art.write_all(&common.out, name, &cfg, seed(&cfg))?;
    log.info(&format!("{name}: wrote {} artifacts and manifest.json to {}", art.len(), common.out.display()));
    Ok(())
}

fn no_seed<T>(_: &T) -> Option<u64> {
    None
}

fn dispatch(cli: Cli) -> Result<()> {
    use config::*;
    let common = match &cli.command {
        Command::Propagate(c)
        | Command::Transform(c)
        | Command::PainleveCheck(c)
        | Command::Mi(c)
        | Command::Closeness(c)
        | Command::CwNoise(c)
        | Command::Orbital(c)
        | Command::Vparam(c) => c.clone(),
    };
    if common.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(common.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Propagate(_) => {
            execute::<PropagateConfig, _>("propagate", &common, |c| Some(c.seed), commands::propagate_cmd)
        }
        Command::Transform(_) => execute::<TransformConfig, _>("transform", &common, no_seed, commands::transform_cmd),
        Command::PainleveCheck(_) => {
            execute::<PainleveConfig, _>("painleve-check", &common, no_seed, commands::painleve_cmd)
        }
        Command::Mi(_) => execute::<MiConfig, _>("mi", &common, no_seed, commands::mi_cmd),
        Command::Closeness(_) => {
            execute::<ClosenessConfig, _>("closeness", &common, |c| Some(c.seed), commands::closeness_cmd)
        }
        Command::CwNoise(_) => execute::<CwNoiseConfig, _>("cw-noise", &common, no_seed, commands::cw_noise_cmd),
        Command::Orbital(_) => execute::<OrbitalConfig, _>("orbital", &common, no_seed, commands::orbital_cmd),
        Command::Vparam(_) => execute::<VparamConfig, _>("vparam", &common, no_seed, commands::vparam_cmd),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
