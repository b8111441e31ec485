//! `noesc` command line: `run` one experiment or `compare` two.
//!
//! Artifacts written by `run` into `output.dir`:
//!
//! * `iterates.csv`: `k, x1.., J, grad_norm, p_star1.., bvp_residual, tracking_error`
//! * `trajectory.csv`: `t, x1.., u, y, J`
//! * `summary.json`: iteration count, final state, final J, max |y|,
//!   termination reason and the full config.
//!
//! Floats in CSV files are written with 17 significant digits.
//! Exit codes: 0 clean termination, 1 config error, 2 the loop hit its
//! iteration cap or a window failed (artifacts are still written).

use std::ffi::OsString;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::config::{self, ConfigError, ConfigSource, ExperimentConfig};
use crate::esc::{EscLog, Termination};

#[derive(Debug, Parser)]
#[command(name = "noesc", about = "Extremum seeking control experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its artifacts.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Override a field, e.g. `--set plant.rho=-1`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run two experiments and write `compare.json`.
    Compare {
        /// Config path, or `preset:<name>`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        out: PathBuf,
        /// Overrides applied to A.
        #[arg(long = "set-a", value_name = "KEY=VALUE")]
        set_a: Vec<String>,
        /// Overrides applied to B.
        #[arg(long = "set-b", value_name = "KEY=VALUE")]
        set_b: Vec<String>,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INCOMPLETE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(#[from] crate::Error),
    #[error("writing artifacts: {0}")]
    Io(#[from] io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Run(crate::Error::InvalidArgument(_)) => EXIT_CONFIG,
            _ => EXIT_INCOMPLETE,
        }
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn write_iterates_csv(log: &EscLog, path: &Path) -> Result<(), CliError> {
    let n = log.config.x0.len();
    let m = log.config.p_init.len();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["k".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend(["J".into(), "grad_norm".into()]);
    header.extend((1..=m).map(|i| format!("p_star{i}")));
    header.extend(["bvp_residual".into(), "tracking_error".into()]);
    w.write_record(&header)?;
    for rec in &log.iterates {
        let mut row = vec![rec.k.to_string()];
        row.extend(rec.x.iter().copied().map(fmt_f64));
        row.push(fmt_f64(rec.value));
        row.push(fmt_f64(rec.grad_norm));
        if rec.p_star.is_empty() {
            row.extend(std::iter::repeat(String::new()).take(m));
        } else {
            row.extend(rec.p_star.iter().copied().map(fmt_f64));
        }
        row.push(fmt_opt(rec.bvp_residual));
        row.push(fmt_opt(rec.tracking_error));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_csv(log: &EscLog, path: &Path) -> Result<(), CliError> {
    let n = log.config.x0.len();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x{i}")));
    header.extend(["u".into(), "y".into(), "J".into()]);
    w.write_record(&header)?;
    for s in &log.dense {
        let mut row = vec![fmt_f64(s.t)];
        row.extend(s.x.iter().copied().map(fmt_f64));
        row.extend([fmt_f64(s.u), fmt_f64(s.y), fmt_f64(s.value)]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub iterations: usize,
    pub termination: &'static str,
    pub termination_detail: Option<String>,
    pub final_state: &'a [f64],
    pub final_measured_state: &'a [f64],
    pub final_j: f64,
    pub final_grad_norm: f64,
    pub max_abs_y: f64,
    pub y_range: [f64; 2],
    pub max_tracking_error: f64,
    pub max_bvp_residual: f64,
    pub config: &'a ExperimentConfig,
}

impl<'a> Summary<'a> {
    pub fn new(log: &'a EscLog, config: &'a ExperimentConfig) -> Self {
        let last = log.final_iterate();
        let max_of = |f: fn(&crate::esc::IterateRecord) -> Option<f64>| {
            log.iterates.iter().filter_map(f).fold(0.0, f64::max)
        };
        Summary {
            iterations: log.iterations(),
            termination: log.termination.label(),
            termination_detail: match &log.termination {
                Termination::Failed { error, .. } => Some(error.to_string()),
                _ => None,
            },
            final_state: &last.x,
            final_measured_state: &last.x_measured,
            final_j: last.value,
            final_grad_norm: last.grad_norm,
            max_abs_y: log.max_abs_y(),
            y_range: [log.y_range.0, log.y_range.1],
            max_tracking_error: max_of(|r| r.tracking_error),
            max_bvp_residual: max_of(|r| r.bvp_residual),
            config,
        }
    }
}

/// Writes the three run artifacts into `dir`, creating it if needed.
pub fn write_artifacts(log: &EscLog, config: &ExperimentConfig, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    write_iterates_csv(log, &dir.join("iterates.csv"))?;
    write_trajectory_csv(log, &dir.join("trajectory.csv"))?;
    let summary = Summary::new(log, config);
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

/// Loads, runs and writes one experiment; returns the log and exit code.
pub fn run_experiment(source: &ConfigSource<'_>) -> Result<(EscLog, ExperimentConfig, i32), CliError> {
    let config = config::load(source)?;
    let log = config.build()?.run()?;
    write_artifacts(&log, &config, Path::new(&config.output.dir))?;
    let code = if log.termination.is_clean() {
        EXIT_OK
    } else {
        EXIT_INCOMPLETE
    };
    Ok((log, config, code))
}

/// Per-experiment metrics reported by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub source: String,
    pub iterations: usize,
    pub termination: String,
    pub final_state: Vec<f64>,
    /// Max distance of `y*` from the chord between the window's end outputs.
    pub chord_deviation: Vec<f64>,
    pub first_window_chord_deviation: f64,
    pub max_chord_deviation: f64,
    pub max_abs_x1: f64,
    pub max_abs_eta_first5: f64,
}

impl RunMetrics {
    pub fn from_log(source: &str, log: &EscLog) -> Self {
        let chord: Vec<f64> = log.iterates.iter().filter_map(|r| r.chord_deviation).collect();
        let max_abs_x1 = log
            .iterates
            .iter()
            .filter_map(|r| r.max_abs_y)
            .fold(log.config.x0[0].abs(), f64::max);
        RunMetrics {
            source: source.to_string(),
            iterations: log.iterations(),
            termination: log.termination.label().to_string(),
            final_state: log.final_iterate().x.clone(),
            first_window_chord_deviation: chord.first().copied().unwrap_or(0.0),
            max_chord_deviation: chord.iter().copied().fold(0.0, f64::max),
            chord_deviation: chord,
            max_abs_x1,
            max_abs_eta_first5: log.max_abs_eta(5),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Differences {
    pub first_window_chord_deviation: f64,
    pub max_chord_deviation: f64,
    pub max_abs_x1: f64,
    pub max_abs_eta_first5: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub a: RunMetrics,
    pub b: RunMetrics,
    /// `b - a` for each scalar metric.
    pub b_minus_a: Differences,
}

impl Comparison {
    pub fn new(a: RunMetrics, b: RunMetrics) -> Self {
        let b_minus_a = Differences {
            first_window_chord_deviation: b.first_window_chord_deviation - a.first_window_chord_deviation,
            max_chord_deviation: b.max_chord_deviation - a.max_chord_deviation,
            max_abs_x1: b.max_abs_x1 - a.max_abs_x1,
            max_abs_eta_first5: b.max_abs_eta_first5 - a.max_abs_eta_first5,
        };
        Self { a, b, b_minus_a }
    }
}

fn compare_source<'a>(spec: &'a str, overrides: &'a [String]) -> ConfigSource<'a> {
    match spec.strip_prefix("preset:") {
        Some(name) => ConfigSource {
            preset: Some(name),
            file: None,
            overrides,
        },
        None => ConfigSource {
            preset: None,
            file: Some(Path::new(spec)),
            overrides,
        },
    }
}

/// Runs both experiments (sequentially) and writes `compare.json` to `out`.
pub fn compare(a: &ConfigSource<'_>, b: &ConfigSource<'_>, labels: (&str, &str), out: &Path) -> Result<(Comparison, i32), CliError> {
    let run = |src: &ConfigSource<'_>| -> Result<EscLog, CliError> { Ok(config::load(src)?.build()?.run()?) };
    let log_a = run(a)?;
    let log_b = run(b)?;
    let code = if log_a.termination.is_clean() && log_b.termination.is_clean() {
        EXIT_OK
    } else {
        EXIT_INCOMPLETE
    };
    let cmp = Comparison::new(RunMetrics::from_log(labels.0, &log_a), RunMetrics::from_log(labels.1, &log_b));
    fs::create_dir_all(out)?;
    fs::write(out.join("compare.json"), serde_json::to_string_pretty(&cmp)? + "\n")?;
    Ok((cmp, code))
}

/// Entry point shared by the binary and tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Run {
            config,
            preset,
            overrides,
        } => {
            let source = ConfigSource {
                preset: preset.as_deref(),
                file: config.as_deref(),
                overrides,
            };
            run_experiment(&source).map(|(log, cfg, code)| {
                println!(
                    "{}: {} iterations, final state {:?}, J = {:e}; artifacts in {}",
                    log.termination.label(),
                    log.iterations(),
                    log.final_iterate().x,
                    log.final_iterate().value,
                    cfg.output.dir
                );
                code
            })
        }
        Command::Compare {
            a,
            b,
            out,
            set_a,
            set_b,
        } => compare(&compare_source(a, set_a), &compare_source(b, set_b), (a, b), out).map(|(cmp, code)| {
            println!(
                "first-window chord deviation: a = {:e}, b = {:e}; max |eta| (first 5 windows): a = {}, b = {}",
                cmp.a.first_window_chord_deviation,
                cmp.b.first_window_chord_deviation,
                cmp.a.max_abs_eta_first5,
                cmp.b.max_abs_eta_first5
            );
            code
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
