//! `rfcoh` command-line front end. Every command reads one JSON config,
//! writes `<out>/<command>/<name>.csv|json`, and updates `<out>/manifest.json`.

mod commands;
mod config;
mod error;
mod logging;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Format, Overrides, RunConfig};
use error::{CliError, CliResult};
use output::Output;

#[derive(Parser)]
#[command(name = "rfcoh", version, about = "Resonance-fluorescence coherence toolkit")]
struct Cli {
    /// JSON run config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root, overriding `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the simulation and the oracle sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Unfiltered, instrument-convolved and AMZI-filtered spectra.
    Spectrum,
    /// Visibility, filtered g2 and coincidence-ratio curves over the sweep grids.
    Curves,
    /// Monte Carlo click streams, histograms and a coincidence table.
    Simulate {
        /// Fit the coincidence table right after simulating.
        #[arg(long)]
        fit: bool,
    },
    /// Maximum-likelihood fit of a coincidence table (and optional visibility table).
    Fit {
        /// Coincidence CSV; overrides `fit.input`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Closed forms against the Fock-space oracle.
    OracleCheck,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Curves => "curves",
            Command::Simulate { .. } => "simulate",
            Command::Fit { .. } => "fit",
            Command::OracleCheck => "oracle-check",
        }
    }
}

fn fit_into(cfg: &RunConfig, input: &std::path::Path) -> CliResult<()> {
    let mut out = Output::create(&cfg.output_dir, "fit", cfg.hash(), cfg.format)?;
    let result = commands::fit::run(cfg, input, &mut out).inspect_err(|e| log::error!("{e}"));
    let dir = out.dir();
    let finished = result.and_then(|_| out.finish().map(|_| ()));
    logging::write_sidecar(&dir).map_err(|e| CliError::io(&dir, e))?;
    finished
}

fn run(cli: Cli) -> CliResult<()> {
    let ov = Overrides {
        out: cli.out,
        seed: cli.seed,
        format: cli.format,
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &ov)?;
    if let Command::Fit { input: Some(p) } = &cli.command {
        cfg.fit.input = Some(p.clone());
        cfg.validate()?;
    }
    for w in cfg.emitter.warnings().into_iter().chain(cfg.amzi.warnings(&cfg.emitter)) {
        log::warn!("{w}");
    }
    let name = cli.command.name();
    log::info!("{name}: config hash {}", cfg.hash());
    if let Command::Fit { .. } = cli.command {
        let input = cfg
            .fit
            .input
            .clone()
            .unwrap_or_else(|| cfg.output_dir.join("simulate").join(commands::simulate::COINCIDENCES));
        return fit_into(&cfg, &input);
    }
    let mut out = Output::create(&cfg.output_dir, name, cfg.hash(), cfg.format)?;
    let result = match &cli.command {
        Command::Spectrum => commands::spectrum::run(&cfg, &mut out).map(|_| None),
        Command::Curves => commands::curves::run(&cfg, &mut out).map(|_| None),
        Command::Simulate { .. } => commands::simulate::run(&cfg, &mut out),
        Command::OracleCheck => commands::oracle::run(&cfg, &mut out).map(|_| None),
        Command::Fit { .. } => unreachable!(),
    }
    .inspect_err(|e| log::error!("{e}"));
    let dir = out.dir();
    let table = result.and_then(|t| out.finish().map(|_| t));
    logging::write_sidecar(&dir).map_err(|e| CliError::io(&dir, e))?;
    match (table?, &cli.command) {
        (Some(path), Command::Simulate { fit: true }) => fit_into(&cfg, &path),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    logging::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfcoh: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
