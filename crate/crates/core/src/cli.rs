//! Command-line front end: `simulate`, `evaluate` and `plotdata`.
//!
//! Each command renders everything in memory first and only then writes its
//! output file, so a failing run leaves no partial report behind.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::attribution::{evaluate_attribution, AttributionError, DEFAULT_WINDOWS_MS};
use crate::plot::plot_data;
use crate::proximity::{self, ProximityConfig, ProximityError};
use crate::scenario::{parse_scenario, ScenarioError};
use crate::simulator::SimError;
use crate::touch::{
    evaluate_touch, render_touch_table, touch_reports_csv, DEFAULT_THRESHOLDS_DBM, DEFAULT_VICINITY_MS,
};
use crate::trace::{parse_trace, serialize_trace, EventTrace, TraceError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Trace { path: PathBuf, source: TraceError },
    #[error("{path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioError },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Proximity(#[from] ProximityError),
    #[error(transparent)]
    Attribution(#[from] AttributionError),
    #[error("{0} mode needs ground truth, which the trace does not contain")]
    NoGroundTruth(&'static str),
    #[error("failed to write output: {0}")]
    Stdout(io::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "ble-hri",
    version,
    about = "BLE RSS proximity, touch and attribution toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic trace from a scenario file.
    Simulate(SimulateArgs),
    /// Replay a trace through one engine and report.
    Evaluate(EvaluateArgs),
    /// Emit per-beacon RSS columns for plotting.
    Plotdata(PlotdataArgs),
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    pub scenario: PathBuf,
    /// Overrides `rng_seed` from the scenario file.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Proximity,
    Touch,
    Attribution,
}

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    pub trace: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = DEFAULT_THRESHOLDS_DBM)]
    pub thresholds: Vec<i32>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_WINDOWS_MS)]
    pub windows: Vec<u64>,
    #[arg(long, default_value_t = DEFAULT_VICINITY_MS)]
    pub vicinity_ms: u64,
    #[arg(long, allow_negative_numbers = true, default_value_t = ProximityConfig::DEFAULT_CLOSE_THRESHOLD_DBM)]
    pub close_threshold_dbm: i32,
    #[arg(long, default_value_t = ProximityConfig::DEFAULT_PRESENCE_TIMEOUT_MS)]
    pub timeout_ms: u64,
    /// Clock tick for presence expiry in proximity mode.
    #[arg(long, default_value_t = 50)]
    pub tick_ms: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct PlotdataArgs {
    pub trace: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Result of a command before anything touches the filesystem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    /// Machine-readable output: trace, CSV report, timeline or plot data.
    pub report: String,
    /// Human-readable summary for the terminal, if any.
    pub summary: Option<String>,
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_trace(path: &Path) -> Result<EventTrace, CliError> {
    parse_trace(&read(path)?).map_err(|source| CliError::Trace {
        path: path.to_path_buf(),
        source,
    })
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<CommandOutput, CliError> {
    let scenario = parse_scenario(&read(&args.scenario)?).map_err(|source| CliError::Scenario {
        path: args.scenario.clone(),
        source,
    })?;
    let scenario = match args.seed {
        Some(seed) => scenario.with_seed(seed),
        None => scenario,
    };
    let trace = scenario.generate()?;
    Ok(CommandOutput {
        report: serialize_trace(&trace),
        summary: None,
    })
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> Result<CommandOutput, CliError> {
    let trace = load_trace(&args.trace)?;
    match args.mode {
        Mode::Proximity => {
            let config = ProximityConfig {
                close_threshold_dbm: args.close_threshold_dbm,
                presence_timeout_ms: args.timeout_ms,
                hysteresis_db: 0,
            };
            let timeline = proximity::run(&trace, &config, args.tick_ms)?;
            let mut summary = String::new();
            for beacon in timeline.beacons() {
                summary += &format!("{beacon}: {} transitions\n", timeline.transition_count(beacon));
            }
            Ok(CommandOutput {
                report: timeline.to_lines(),
                summary: Some(summary),
            })
        }
        Mode::Touch => {
            if trace.frames().is_empty() {
                return Err(CliError::NoGroundTruth("touch"));
            }
            let reports = evaluate_touch(&trace, &args.thresholds, args.vicinity_ms)
                .map_err(|_| CliError::NoGroundTruth("touch"))?;
            Ok(CommandOutput {
                report: touch_reports_csv(&reports),
                summary: Some(render_touch_table(&reports)),
            })
        }
        Mode::Attribution => {
            if trace.truths().is_empty() {
                return Err(CliError::NoGroundTruth("attribution"));
            }
            let report = evaluate_attribution(&trace, &args.windows)?;
            Ok(CommandOutput {
                report: report.to_csv(),
                summary: Some(report.render_table()),
            })
        }
    }
}

pub fn cmd_plotdata(args: &PlotdataArgs) -> Result<CommandOutput, CliError> {
    let trace = load_trace(&args.trace)?;
    Ok(CommandOutput {
        report: plot_data(&trace),
        summary: None,
    })
}

impl Cli {
    pub fn execute(&self) -> Result<CommandOutput, CliError> {
        match &self.command {
            Command::Simulate(args) => cmd_simulate(args),
            Command::Evaluate(args) => cmd_evaluate(args),
            Command::Plotdata(args) => cmd_plotdata(args),
        }
    }

    fn out_path(&self) -> Option<&Path> {
        match &self.command {
            Command::Simulate(a) => a.out.as_deref(),
            Command::Evaluate(a) => a.out.as_deref(),
            Command::Plotdata(a) => a.out.as_deref(),
        }
    }

    /// Runs the command: the report goes to `--out` when given, otherwise to
    /// `stdout`; the summary always goes to `stdout`.
    pub fn run(&self, stdout: &mut impl Write) -> Result<(), CliError> {
        let output = self.execute()?;
        if let Some(summary) = &output.summary {
            stdout.write_all(summary.as_bytes()).map_err(CliError::Stdout)?;
        }
        match self.out_path() {
            Some(path) => fs::write(path, &output.report).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            }),
            None => stdout.write_all(output.report.as_bytes()).map_err(CliError::Stdout),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ble-hri").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn evaluate_defaults() {
        let cli = parse(&["evaluate", "t.trace", "--mode", "touch"]);
        let Command::Evaluate(args) = cli.command else { panic!() };
        assert_eq!(args.thresholds, vec![-40, -41, -42]);
        assert_eq!(args.windows, vec![0, 300, 500]);
        assert_eq!(args.vicinity_ms, 400);
        assert_eq!(args.close_threshold_dbm, -60);
        assert_eq!(args.timeout_ms, 2000);
    }

    #[test]
    fn negative_lists_parse() {
        let cli = parse(&[
            "evaluate",
            "t.trace",
            "--mode",
            "proximity",
            "--thresholds",
            "-50,-45",
            "--close-threshold-dbm",
            "-70",
            "--windows",
            "0,250",
        ]);
        let Command::Evaluate(args) = cli.command else { panic!() };
        assert_eq!(args.thresholds, vec![-50, -45]);
        assert_eq!(args.close_threshold_dbm, -70);
        assert_eq!(args.windows, vec![0, 250]);
        assert_eq!(args.mode, Mode::Proximity);
    }

    #[test]
    fn simulate_seed_flag() {
        let cli = parse(&["simulate", "s.scenario", "--seed", "42", "--out", "x.trace"]);
        let Command::Simulate(args) = cli.command else { panic!() };
        assert_eq!(args.seed, Some(42));
        assert_eq!(args.out.as_deref(), Some(Path::new("x.trace")));
    }

    #[test]
    fn rejects_missing_subcommand_and_bad_mode() {
        assert!(Cli::try_parse_from(["ble-hri"]).is_err());
        assert!(Cli::try_parse_from(["ble-hri", "evaluate", "t", "--mode", "hover"]).is_err());
    }
}
