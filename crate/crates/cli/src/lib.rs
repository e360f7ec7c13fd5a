//! Command-line driver: configuration, file formats, run manifests and plots
//! around the `spinaxion-core` pipeline.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod output;
pub mod plot;
pub mod stellar;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

pub use config::{load_config, parse_config, Overrides, RunConfig, TraceFormat};
pub use error::{exit, CliError, CliResult};
pub use output::{read_manifest, Manifest, RunDir};

use commands::Pipeline;

#[derive(Debug, Parser)]
#[command(name = "spinaxion", version, about = "Simulate and analyse axion-modulated spin qubit signals")]
pub struct Cli {
    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Master seed for every random stream.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output root; each run gets a fresh directory beneath it.
    #[arg(long, global = true, env = "SPINAXION_OUT", value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Modulation-depth enhancement factor (>= 1).
    #[arg(long, global = true)]
    pub scale: Option<f64>,

    /// Encoding of emitted traces.
    #[arg(long, global = true, value_enum)]
    pub format: Option<TraceFormat>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Clean and noisy ⟨σx⟩ traces.
    Simulate,
    /// Causal and zero-phase band-passed traces plus the filter design.
    Filter,
    /// Power spectra, cumulative power and the sideband report.
    Psd,
    /// Windowed dynamic SNR and the analytic SNR of the scenario.
    Snr,
    /// Coupling reach over a mass grid.
    Scan,
    /// Every stage above into one run directory.
    Demo,
    /// Validate the configuration and print the resolved values.
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Filter => "filter",
            Command::Psd => "psd",
            Command::Snr => "snr",
            Command::Scan => "scan",
            Command::Demo => "demo",
            Command::Check => "check",
        }
    }
}

/// What a successful invocation prints to stdout.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub command: String,
    pub run_dir: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub summary: serde_json::Value,
}

pub fn run(cli: &Cli) -> CliResult<RunSummary> {
    let ov = Overrides {
        seed: cli.seed,
        amplitude_scale: cli.scale,
        format: cli.format,
    };
    let cfg = load_config(cli.config.as_deref(), &ov)?;
    let name = cli.command.name();
    if cli.command == Command::Check {
        let summary = serde_json::json!({
            "config_sha256": cfg.hash(),
            "resolved": &cfg,
        });
        return Ok(RunSummary {
            command: name.into(),
            run_dir: None,
            manifest: None,
            summary,
        });
    }
    let root = cli
        .out
        .clone()
        .or_else(|| cfg.out_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));
    execute(cli.command, &cfg, &root)
}

/// Runs one command into a fresh directory under `root`.
pub fn execute(command: Command, cfg: &RunConfig, root: &Path) -> CliResult<RunSummary> {
    let name = command.name();
    let mut dir = RunDir::create(root, name, cfg)?;
    let p = Pipeline::new(cfg);
    log::info!("{name}: writing to {}", dir.path().display());
    let summary = match command {
        Command::Simulate => commands::simulate(&p, &mut dir)?,
        Command::Filter => commands::filter(&p, &mut dir)?,
        Command::Psd => commands::psd(&p, &mut dir)?,
        Command::Snr => commands::snr(&p, &mut dir)?,
        Command::Scan => commands::sensitivity(&p, &mut dir)?,
        Command::Demo => commands::demo(&p, &mut dir)?,
        Command::Check => unreachable!("handled by run"),
    };
    let run_dir = dir.path().to_path_buf();
    dir.finish(name, cfg, summary.clone())?;
    Ok(RunSummary {
        command: name.into(),
        manifest: Some(run_dir.join(output::MANIFEST_NAME)),
        run_dir: Some(run_dir),
        summary,
    })
}
