//! Seeded Monte Carlo experiments for RSSI-feedback energy beamforming.
//!
//! `wpb <subcommand> --config <path> [--out <path>] [--seed <u64>] [--trials <n>] [--workers <n>]`
//!
//! Output is CSV (UTF-8, LF) with `#` provenance lines above the header. Exit
//! codes: 0 success, 1 configuration error, 2 runtime error.

pub mod config;
pub mod experiments;
pub mod table;

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;
use wpb_core::replay::{parse_trace, TraceError};

pub use config::{Config, ConfigError, SnrConvention};
pub use table::{Cell, ResultTable};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {path}: {reason}")]
    ConfigRead { path: PathBuf, reason: String },
    #[error("cannot read trace {path}: {reason}")]
    TraceRead { path: PathBuf, reason: String },
    #[error("trace {path}: {source}")]
    Trace { path: PathBuf, source: TraceError },
    #[error("{0}")]
    Model(#[from] wpb_core::Error),
    #[error("cannot write {path}: {reason}")]
    Write { path: String, reason: String },
    #[error("{0}")]
    Usage(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::ConfigRead { .. } | Self::Usage(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "wpb",
    version,
    about = "RSSI-feedback energy beamforming experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// key = value configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// output CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// worker threads (default: all cores); never changes the output
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// MCRLB of equally spaced vs random training phases over an N range
    McrlbSweep(Common),
    /// CRLB at random phases against the equally spaced MCRLB
    CrlbScatter(Common),
    /// Phase-estimate RMSE vs N per SNR
    RmseSweep(Common),
    /// Harvested energy and loss vs perfect CSI per trial
    EnergyCdf(Common),
    /// Distribution of the optimal training length
    NstarCdf(Common),
    /// Estimate phases from a feedback trace CSV
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Print the equally spaced training phases
    Theta {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Self::McrlbSweep(_) => "mcrlb-sweep",
            Self::CrlbScatter(_) => "crlb-scatter",
            Self::RmseSweep(_) => "rmse-sweep",
            Self::EnergyCdf(_) => "energy-cdf",
            Self::NstarCdf(_) => "nstar-cdf",
            Self::Replay { .. } => "replay",
            Self::Theta { .. } => "theta",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Self::McrlbSweep(c)
            | Self::CrlbScatter(c)
            | Self::RmseSweep(c)
            | Self::EnergyCdf(c)
            | Self::NstarCdf(c) => c,
            Self::Replay { common, .. } | Self::Theta { common, .. } => common,
        }
    }
}

fn load_config(cmd: &Command) -> Result<Config, RunError> {
    let common = cmd.common();
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| RunError::ConfigRead {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            Config::parse(&text)?
        }
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    if let Some(trials) = common.trials {
        cfg.trials = trials;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    match cmd {
        Command::Replay { trace: Some(t), .. } => cfg.trace = Some(t.clone()),
        Command::Theta { n: Some(n), .. } => cfg.n = *n,
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one subcommand and returns its table with provenance attached.
pub fn execute(subcommand: &str, cfg: &Config) -> Result<ResultTable, RunError> {
    let mut table = match subcommand {
        "mcrlb-sweep" => experiments::mcrlb_sweep(cfg)?,
        "crlb-scatter" => experiments::crlb_scatter(cfg)?,
        "rmse-sweep" => experiments::rmse_sweep(cfg)?,
        "energy-cdf" => experiments::energy_cdf(cfg)?,
        "nstar-cdf" => experiments::nstar_cdf(cfg)?,
        "replay" => {
            let path = cfg.trace.clone().ok_or_else(|| {
                RunError::Usage("replay needs a trace (--trace or `trace =`)".into())
            })?;
            let text = fs::read_to_string(&path).map_err(|e| RunError::TraceRead {
                path: path.clone(),
                reason: e.to_string(),
            })?;
            let training = parse_trace(&text).map_err(|source| RunError::Trace { path, source })?;
            experiments::replay(&training)?
        }
        "theta" => experiments::theta(cfg.n)?,
        other => return Err(RunError::Usage(format!("unknown subcommand `{other}`"))),
    };
    let mut header = vec![
        format!("wpb-experiments v{}", env!("CARGO_PKG_VERSION")),
        format!("subcommand: {subcommand}"),
    ];
    header.extend(
        cfg.entries()
            .into_iter()
            .filter(|(k, _)| *k != "out")
            .map(|(k, v)| format!("config: {k} = {v}")),
    );
    header.push(format!("number format: {}", table::NUMBER_FORMAT));
    table.prepend_notes(header);
    Ok(table)
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<(), RunError> {
    let cfg = load_config(cmd)?;
    let run = || execute(cmd.name(), &cfg);
    let table = match cmd.common().workers {
        Some(0) => return Err(RunError::Usage("--workers must be at least 1".into())),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| RunError::Usage(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    match &cfg.out {
        Some(path) => {
            let write_err = |e: io::Error| RunError::Write {
                path: path.display().to_string(),
                reason: e.to_string(),
            };
            let file = fs::File::create(path).map_err(write_err)?;
            let mut w = io::BufWriter::new(file);
            table.write_csv(&mut w).map_err(write_err)?;
            w.flush().map_err(write_err)
        }
        None => table.write_csv(stdout).map_err(|e| RunError::Write {
            path: "stdout".into(),
            reason: e.to_string(),
        }),
    }
}

/// Parses `args` (including the program name), runs, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(&cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
