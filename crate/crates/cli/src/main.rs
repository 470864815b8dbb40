//! `ghmf`: command-line front end for the cavity mean-field toolkit.
//!
//! Exit codes: 0 success, 1 invalid input or configuration (including I/O
//! problems), 2 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] ghmf_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(e) if e.is_validation() => 1,
            CliError::Core(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(name = "ghmf", version, about = "Mean-field phases and dynamics of atoms in a two-mode cavity")]
struct Cli {
    /// Overrides the `seed` key of stochastic subcommands.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "GHMF_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, env = "GHMF_THREADS")]
    threads: Option<usize>,
    /// Raise log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; keys may also be given with --set alone.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set grid.n_1=11`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Print the resolved config and exit without running.
    #[arg(long)]
    print_config: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Map cavity parameters to the effective model.
    MapParams(Common),
    /// Dump the free energy over a grid of order parameters.
    FreeEnergy(Common),
    /// Find and classify the fixed points at one coupling pair.
    FixedPoints(Common),
    /// Sweep a grid of couplings and locate phase boundaries.
    PhaseDiagram(Common),
    /// Run the Langevin dynamics and test for a Boltzmann steady state.
    Langevin(Common),
    /// Run constant-energy molecular dynamics.
    Md(Common),
    /// Microcanonical averages over a list of energies.
    Caloric(Common),
    /// Compare canonical and microcanonical order parameters.
    CompareEnsembles(Common),
}

fn execute<C, F>(cli: &Cli, common: &Common, name: &str, seeded: bool, threads: usize, body: F) -> Result<(), CliError>
where
    C: serde::de::DeserializeOwned + Serialize + Sync,
    F: FnOnce(&C, &mut output::Run) -> Result<(), CliError> + Send,
{
    let seed = if seeded { cli.seed } else { None };
    if cli.seed.is_some() && !seeded {
        log::warn!("{name} is deterministic; --seed is ignored");
    }
    let cfg: C = config::load(common.config.as_deref(), &common.set, seed)?;
    if common.print_config {
        print!("{}", config::to_toml(&cfg)?);
        return Ok(());
    }
    let started = std::time::SystemTime::now();
    let seed_value = if seeded {
        serde_json::to_value(&cfg).ok().and_then(|v| v.get("seed").and_then(|s| s.as_u64()))
    } else {
        None
    };
    let mut run = output::Run::start(&cli.out, name, seed_value, &cfg)?;
    log::debug!("manifest {}", run.manifest_name());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| body(&cfg, &mut run))?;
    let manifest = run.finish(threads, started)?;
    log::info!("wrote {}", manifest.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let threads = match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(t) => t,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    use commands as c;
    match &cli.command {
        Command::MapParams(a) => execute(cli, a, "map-params", false, threads, c::map_params),
        Command::FreeEnergy(a) => execute(cli, a, "free-energy", false, threads, c::free_energy_surface),
        Command::FixedPoints(a) => execute(cli, a, "fixed-points", false, threads, c::fixed_points),
        Command::PhaseDiagram(a) => {
            execute(cli, a, "phase-diagram", false, threads, |cfg, run| c::phase_diagram(cfg, threads, run))
        }
        Command::Langevin(a) => execute(cli, a, "langevin", true, threads, c::langevin),
        Command::Md(a) => execute(cli, a, "md", true, threads, c::md),
        Command::Caloric(a) => execute(cli, a, "caloric", true, threads, |cfg, run| c::caloric(cfg, threads, run)),
        Command::CompareEnsembles(a) => execute(cli, a, "compare-ensembles", true, threads, c::compare),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
