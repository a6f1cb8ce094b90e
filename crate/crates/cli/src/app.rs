//! Subcommands and exit codes.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use lpp_core::experiments::{build, report_from_table, Experiment};
use lpp_core::{ExperimentConfig, ExperimentKind, ExperimentReport, SampleTable};

use crate::config::{config_hash, env_workers, load_config, Overrides};
use crate::manifest::{now, write_json, ChunkStatus, Outputs, RunManifest};
use crate::raw::{read_raw, write_raw};
use crate::runner::{execute, RunOptions};
use crate::selftest;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

pub const RAW_FILE: &str = "raw.csv";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";
const PARTS_DIR: &str = "parts";

#[derive(Parser, Debug)]
#[command(name = "lpp-lab", version, about = "Monte Carlo experiments for exponential last passage percolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment and write raw.csv, report.json and manifest.json.
    Run {
        /// Experiment name (see `list`).
        experiment: String,
        /// JSON config file.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        workers: Option<usize>,
        /// Output directory (default: the config's out_path, else lpp-out/<experiment>).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the dynamic programs and estimators against brute-force oracles.
    Selftest {
        /// Number of random environments for path enumeration.
        #[arg(long, default_value_t = 1000)]
        fields: u64,
    },
    /// Recompute a report from a raw CSV and the manifest beside it.
    Report {
        raw: PathBuf,
    },
    /// List experiments and their config fields.
    List,
}

/// Result of a completed run.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub report: ExperimentReport,
    /// Chunks taken from an interrupted earlier run.
    pub resumed_chunks: usize,
}

pub fn default_out_dir(kind: ExperimentKind) -> PathBuf {
    Path::new("lpp-out").join(kind.name())
}

fn part_path(parts: &Path, chunk: usize) -> PathBuf {
    parts.join(format!("chunk_{chunk:06}.csv"))
}

/// Chunks of an interrupted run with the same config that can be reused.
fn resumable(manifest_path: &Path, parts: &Path, hash: &str, columns: &[String]) -> Vec<Option<SampleTable>> {
    let Ok(old) = RunManifest::load(manifest_path) else {
        return Vec::new();
    };
    if old.is_complete() || old.config_hash != hash || !old.is_consistent() {
        return Vec::new();
    }
    old.chunks
        .iter()
        .map(|c| {
            if c.status != ChunkStatus::Complete {
                return None;
            }
            let t = read_raw(&part_path(parts, c.index)).ok()?;
            let expected: Vec<u64> = (c.start..c.end).collect();
            (t.columns == columns && t.indices == expected).then_some(t)
        })
        .collect()
}

/// Runs a validated experiment into `out_dir`, resuming from completed chunks
/// of an interrupted run with an identical config.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    let mut config = config.clone();
    config.out_path = Some(out_dir.display().to_string());
    let exp = build(&config).map_err(|e| anyhow!("{e}"))?;
    let config = exp.config().clone();
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let raw_path = out_dir.join(RAW_FILE);
    let report_path = out_dir.join(REPORT_FILE);
    let manifest_path = out_dir.join(MANIFEST_FILE);
    let parts = out_dir.join(PARTS_DIR);
    let columns = exp.columns();
    let hash = config_hash(&config);

    let done = resumable(&manifest_path, &parts, &hash, &columns);
    let resumed_chunks = done.iter().flatten().count();
    if resumed_chunks == 0 && parts.exists() {
        std::fs::remove_dir_all(&parts).with_context(|| format!("removing {}", parts.display()))?;
    }
    std::fs::create_dir_all(&parts).with_context(|| format!("creating {}", parts.display()))?;
    let mut manifest = RunManifest::new(
        &config,
        Outputs {
            raw: RAW_FILE.into(),
            report: REPORT_FILE.into(),
            manifest: MANIFEST_FILE.into(),
        },
    );
    for (record, part) in manifest.chunks.iter_mut().zip(&done) {
        if part.is_some() {
            record.status = ChunkStatus::Complete;
        }
    }
    manifest.save(&manifest_path)?;
    if resumed_chunks > 0 {
        log::info!("resuming: {resumed_chunks} of {} chunks already complete", manifest.chunks.len());
    }

    let started = Instant::now();
    let manifest = Mutex::new(manifest);
    let table = execute(
        exp.as_ref(),
        config.samples,
        &RunOptions {
            workers: config.workers,
            chunk_size: config.chunk_size,
        },
        done,
        &|c, _, part| {
            write_raw(&part_path(&parts, c), part)?;
            let mut m = manifest.lock().expect("manifest lock");
            m.chunks[c].status = ChunkStatus::Complete;
            m.save(&manifest_path)
        },
    )?;
    write_raw(&raw_path, &table)?;
    let mut report = report_from_table(exp.as_ref(), &table, started.elapsed().as_secs_f64()).map_err(|e| anyhow!("{e}"))?;
    report.raw_samples = vec![RAW_FILE.to_string()];
    write_json(&report_path, &report)?;
    let mut manifest = manifest.into_inner().expect("manifest lock");
    manifest.finished = Some(now());
    manifest.save(&manifest_path)?;
    std::fs::remove_dir_all(&parts).with_context(|| format!("removing {}", parts.display()))?;
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        report,
        resumed_chunks,
    })
}

/// Rebuilds the report for `raw` from the manifest in the same directory.
/// The wall time is copied from an existing report there, so a successful
/// recomputation is identical to the report written by the run.
pub fn recompute_report(raw: &Path) -> Result<ExperimentReport> {
    let dir = raw.parent().unwrap_or(Path::new("."));
    let manifest = RunManifest::load(&dir.join(MANIFEST_FILE))?;
    if !manifest.is_consistent() {
        bail!("manifest config does not match its hash {}", manifest.config_hash);
    }
    let exp: Box<dyn Experiment> = build(&manifest.config).map_err(|e| anyhow!("{e}"))?;
    if config_hash(exp.config()) != manifest.config_hash {
        bail!("manifest config is not in normalized form");
    }
    let table = read_raw(raw)?;
    let wall_time = std::fs::read_to_string(dir.join(REPORT_FILE))
        .ok()
        .and_then(|s| serde_json::from_str::<ExperimentReport>(&s).ok())
        .map_or(0.0, |r| r.wall_time);
    let mut report = report_from_table(exp.as_ref(), &table, wall_time).map_err(|e| anyhow!("{e}"))?;
    report.raw_samples = vec![raw.file_name().map_or_else(|| raw.display().to_string(), |f| f.to_string_lossy().into_owned())];
    Ok(report)
}

fn print_summary(report: &ExperimentReport) {
    for c in &report.checks {
        let value = c.value.map_or_else(|| "-".to_string(), |v| format!("{v:.6}"));
        let bounds = match (c.lower, c.upper) {
            (Some(l), Some(u)) => format!("[{l}, {u}]"),
            (Some(l), None) => format!(">= {l}"),
            (None, Some(u)) => format!("{} {u}", if c.strict { "<" } else { "<=" }),
            (None, None) => String::new(),
        };
        let verdict = match (c.binding, c.pass) {
            (_, true) => "PASS",
            (true, false) => "FAIL",
            (false, false) => "note",
        };
        println!("{:<40} {value:>14} {bounds:<24} {verdict}", c.name);
    }
    println!(
        "{}: {} ({} samples, {:.1} s)",
        report.experiment,
        if report.pass { "PASS" } else { "FAIL" },
        report.samples,
        report.wall_time
    );
}

fn verdict(pass: bool) -> i32 {
    if pass {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Run {
            experiment,
            config,
            n,
            samples,
            seed,
            workers,
            out,
        } => {
            let kind: ExperimentKind = experiment.parse().map_err(|e| anyhow!("{e}"))?;
            let overrides = Overrides {
                n,
                samples,
                seed,
                workers,
                out,
            };
            let cfg = load_config(&config, &overrides, env_workers()?)?;
            if cfg.experiment != kind {
                bail!("config {} is for experiment {}, not {kind}", config.display(), cfg.experiment);
            }
            let out_dir = cfg.out_path.as_ref().map_or_else(|| default_out_dir(kind), PathBuf::from);
            let outcome = run_experiment(&cfg, &out_dir)?;
            print_summary(&outcome.report);
            println!("outputs in {}", outcome.out_dir.display());
            Ok(verdict(outcome.report.pass))
        }
        Command::Selftest { fields } => {
            let suites = selftest::run_all(fields);
            for s in &suites {
                println!("{s}");
            }
            Ok(verdict(suites.iter().all(selftest::SuiteResult::passed)))
        }
        Command::Report { raw } => {
            let report = recompute_report(&raw)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(verdict(report.pass))
        }
        Command::List => {
            for k in ExperimentKind::ALL {
                println!("{}\n  {}\n  config: {}", k.name(), k.summary(), k.schema());
            }
            println!(
                "common: experiment, samples, master_seed, workers (default ${}), chunk_size, batches, tolerances, regime, out_path",
                crate::config::THREADS_ENV
            );
            Ok(EXIT_PASS)
        }
    }
}

fn one_line(msg: &str) -> String {
    msg.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Errors are printed to stderr as one `error:` line.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_PASS;
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("error: {}", one_line(first.trim_start_matches("error:")));
            return EXIT_ERROR;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", one_line(&format!("{e:#}")));
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_is_not_an_error() {
        assert_eq!(main_with_args(["lpp-lab", "--help"]), EXIT_PASS);
        assert_eq!(main_with_args(["lpp-lab", "--version"]), EXIT_PASS);
        assert_eq!(main_with_args(["lpp-lab", "frobnicate"]), EXIT_ERROR);
        assert_eq!(main_with_args(["lpp-lab", "run", "corr_decay"]), EXIT_ERROR);
    }

    #[test]
    fn one_line_collapses_whitespace() {
        assert_eq!(one_line(" a\n  b\tc "), "a b c");
    }
}
