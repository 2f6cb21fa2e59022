//! `sqs`: config-driven runner for sweep-quench-sweep simulations.

mod commands;
mod config;
mod output;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sqs_core::ErrorKind;

use crate::config::{ConfigError, EngineKind};

#[derive(Parser)]
#[command(name = "sqs", version, about = "Rydberg atom-array MIS preparation with sweep-quench-sweep schedules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML experiment config; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Measurement seed (overrides measurement.seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides outputs.directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    engine: Option<EngineKind>,
    /// Worker threads (overrides engine.threads).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Dotted-path override, e.g. `--override geometry.sites=11`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the atom array, blockade graph, interactions and exact MIS.
    Geometry,
    /// Low-lying spectrum and ground-state observables over a detuning grid.
    Groundscan,
    /// Time-resolved observables along one schedule.
    Sweep,
    /// Final P_MIS over a grid of quench durations.
    ScanTq,
    /// Final P_MIS over chain sizes with an exponential fit.
    ScanSize,
    /// Overlaps with instantaneous eigenstates along one schedule.
    Spectra,
    /// Projective measurement shots with detection errors and repair.
    Sample,
    /// Exponential fit of P_MIS against size from a CSV file.
    Fit,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Geometry => "geometry",
            Command::Groundscan => "groundscan",
            Command::Sweep => "sweep",
            Command::ScanTq => "scan-tq",
            Command::ScanSize => "scan-size",
            Command::Spectra => "spectra",
            Command::Sample => "sample",
            Command::Fit => "fit",
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<PathBuf> {
    let mut cfg = config::load(cli.config.as_deref(), &cli.overrides)?;
    if let Some(s) = cli.seed {
        cfg.measurement.seed = s;
    }
    if let Some(d) = cli.out_dir {
        cfg.outputs.directory = d.to_string_lossy().into_owned();
    }
    if let Some(e) = cli.engine {
        cfg.engine.kind = e;
    }
    if let Some(t) = cli.threads {
        cfg.engine.threads = Some(t);
    }
    if let Some(t) = cfg.engine.threads {
        if t == 0 {
            return Err(ConfigError("threads must be positive".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut ctx = commands::Context::new(cfg, cli.command.name())?;
    match cli.command {
        Command::Geometry => commands::geometry(&mut ctx)?,
        Command::Groundscan => commands::groundscan(&mut ctx)?,
        Command::Sweep => commands::sweep(&mut ctx)?,
        Command::ScanTq => commands::scan_tq(&mut ctx)?,
        Command::ScanSize => commands::scan_size(&mut ctx)?,
        Command::Spectra => commands::spectra(&mut ctx)?,
        Command::Sample => commands::sample(&mut ctx)?,
        Command::Fit => commands::fit(&mut ctx)?,
    }
    ctx.finish()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<sqs_core::Error>() {
            return match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Numeric => 3,
                ErrorKind::Budget => 4,
                ErrorKind::Io => 5,
            };
        }
        if cause.is::<std::io::Error>() {
            return 5;
        }
        if cause.is::<serde_json::Error>() {
            return 5;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
