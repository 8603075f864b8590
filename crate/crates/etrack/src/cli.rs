//! `etrack` command line: `synth`, `track`, `eval` and `bench`.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use etrack_core::metrics::{evaluate, EvalReport, DEFAULT_EVAL_IOU};
use etrack_core::scenario::generate_scenario;
use etrack_core::{run_sequence, TrackerOutput};

use crate::bench::measure_throughput;
use crate::config::{scenario_run_config, split_overrides, Overrides, RunConfig, ScenarioFile};
use crate::io::{read_mot_file, write_scenario, write_tracker_output};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Name of the run config written next to a generated scenario.
pub const SCENARIO_RUN_CONFIG: &str = "track.toml";

#[derive(Debug, Parser)]
#[command(
    name = "etrack",
    version,
    about = "Multi-object tracking over a staggered detector ensemble"
)]
#[command(after_help = "Any config key can be overridden with --<section>.<key> <value>.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic scenario: gt/gt.txt, det_<name>.txt and track.toml.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Track the configured detector sources and write MOT rows.
    Track {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// CLEAR-MOT scores of a hypothesis file against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, default_value_t = DEFAULT_EVAL_IOU)]
        iou: f64,
        /// Print a CSV header and summary row instead of key=value lines.
        #[arg(long)]
        csv: bool,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure tracking throughput with detections preloaded.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
}

/// Failure split by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Runtime(_) => EXIT_RUNTIME,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

trait Classify<T> {
    fn config_err(self) -> Result<T, Failure>;
    fn runtime_err(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime_err(self) -> Result<T, Failure> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

pub fn synth(spec_path: &Path, out_dir: &Path, overrides: &Overrides) -> Result<(), Failure> {
    let spec = ScenarioFile::load(spec_path, overrides)
        .and_then(|f| f.to_spec())
        .config_err()?;
    let scenario = generate_scenario(&spec).config_err()?;
    write_scenario(out_dir, &scenario).runtime_err()?;
    let run = toml::to_string(&scenario_run_config(&spec)).runtime_err()?;
    let path = out_dir.join(SCENARIO_RUN_CONFIG);
    fs::write(&path, run)
        .with_context(|| format!("cannot write {}", path.display()))
        .runtime_err()?;
    for d in &scenario.detectors {
        log::info!(
            "detector {}: {} rows, {} missed of {}, {} false positives",
            d.profile.name,
            d.rows.len(),
            d.stats.missed,
            d.stats.object_frames,
            d.stats.false_positives
        );
    }
    Ok(())
}

/// Loads a run config and its sources, then tracks every frame.
pub fn track_from_config(config: &Path, overrides: &Overrides) -> Result<TrackerOutput, Failure> {
    let run = RunConfig::load(config, overrides).config_err()?;
    let schedule = run.load_schedule().config_err()?;
    let frames = run.frame_count(&schedule);
    run_sequence(&schedule, 1..=frames, &run.tracker_config()).runtime_err()
}

pub fn track(config: &Path, out: &Path, overrides: &Overrides) -> Result<(), Failure> {
    let output = track_from_config(config, overrides)?;
    write_tracker_output(out, &output).runtime_err()?;
    log::info!(
        "{} rows, {} identities",
        output.rows.len(),
        output.distinct_ids()
    );
    Ok(())
}

pub fn eval(gt: &Path, pred: &Path, iou: f64) -> Result<EvalReport, Failure> {
    let gt_rows = read_mot_file(gt).config_err()?;
    let pred_rows = read_mot_file(pred).config_err()?;
    evaluate(&gt_rows, &pred_rows, iou).config_err()
}

fn dispatch(command: Command, overrides: &Overrides) -> Result<(), Failure> {
    match command {
        Command::Synth { spec, out_dir } => synth(&spec, &out_dir, overrides),
        Command::Track { config, out } => track(&config, &out, overrides),
        Command::Eval {
            gt,
            pred,
            iou,
            csv,
            out,
        } => {
            let report = eval(&gt, &pred, iou)?;
            let text = if csv {
                format!("{}\n{}\n", EvalReport::CSV_HEADER, report.to_csv_row())
            } else {
                report.to_key_value()
            };
            print!("{text}");
            if let Some(path) = out {
                fs::write(&path, &text)
                    .with_context(|| format!("cannot write {}", path.display()))
                    .runtime_err()?;
            }
            Ok(())
        }
        Command::Bench { config, repeats } => {
            let run = RunConfig::load(&config, overrides).config_err()?;
            let schedule = run.load_schedule().config_err()?;
            let frames = run.frame_count(&schedule);
            let t = measure_throughput(&schedule, frames, &run.tracker_config(), repeats)
                .runtime_err()?;
            print!("{}", t.to_key_value());
            Ok(())
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let (args, overrides) = match split_overrides(args) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e:#}");
            return EXIT_CONFIG;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, &overrides) {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error());
            failure.exit_code()
        }
    }
}
