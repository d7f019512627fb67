//! `oscillab`: criterion sweeps, the symbol gallery, dyadic decompositions,
//! the Leibov selection certificate and the identity suite.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 verdict mismatch or failed
//! check, 3 inconsistent equivalence class, 4 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use oscillab::lab::{self, DecomposeMode, SweepConfig};
use oscillab::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_INCONSISTENT: u8 = 3;
const EXIT_CONFIG: u8 = 4;
const WORKERS_ENV: &str = "OSCILLAB_WORKERS";

#[derive(Parser)]
#[command(version, about = "Compactness criteria for composition operators on BMOA and VMOA")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the criteria listed in a JSON sweep config
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep every gallery symbol and compare with the expected verdicts
    Gallery {
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[arg(long, default_value = "gallery-out")]
        out: PathBuf,
        /// Thread count, 0 for all cores; OSCILLAB_WORKERS takes precedence
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, default_value_t = lab::DEFAULT_SEED)]
        seed: u64,
        /// Also write one SVG plot per entry
        #[arg(long)]
        svg: bool,
    },
    /// Dyadic stopping-time decomposition of an arc set
    Decompose {
        #[arg(long, value_enum)]
        mode: Mode,
        /// Wik threshold as p/q
        #[arg(long)]
        lambda: Option<String>,
        /// JSON file of the form {"arcs": [["0", "1/4"], ...]}
        #[arg(long)]
        set: PathBuf,
    },
    /// Selection certificate for b_n = 1 - 2^-n and random combination checks
    Leibov {
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = lab::DEFAULT_SEED)]
        seed: u64,
    },
    /// Cross-module identity suite
    Identities {
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = lab::DEFAULT_SEED)]
        seed: u64,
        /// Write the full report as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Density,
    Wik,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_)
            | Error::EmptySweep(_)
            | Error::Io(_)
            | Error::NotSelfMap { .. }
            | Error::Unsupported(_) => EXIT_CONFIG,
            _ => EXIT_FAILURE,
        };
        Failure { code, error: e.into() }
    }
}

fn config_error(error: anyhow::Error) -> Failure {
    Failure { code: EXIT_CONFIG, error }
}

fn resolve_workers(flag: usize) -> Result<usize, Failure> {
    workers_from(flag, std::env::var(WORKERS_ENV).ok())
}

fn workers_from(flag: usize, env: Option<String>) -> Result<usize, Failure> {
    match env {
        Some(v) => {
            v.trim().parse().with_context(|| format!("{WORKERS_ENV}={v:?} is not a worker count")).map_err(config_error)
        }
        None => Ok(flag),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(config_error)
}

fn sweep(config: &Path) -> Result<u8, Failure> {
    let mut cfg = SweepConfig::from_json(&read(config)?)?;
    cfg.workers = resolve_workers(cfg.workers)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let out = lab::run_sweep(&cfg, base)?;
    let v = &out.report.verdict;
    println!("{}: {} ({})", v.symbol_id, v.classification, v.reason);
    for (kind, sub) in &v.sub_verdicts {
        println!(
            "  {kind:<22} {}",
            serde_json::to_value(sub).map_err(|e| config_error(e.into()))?.as_str().unwrap_or("?")
        );
    }
    for d in &v.diagnostics {
        println!("  note: {d}");
    }
    Ok(if v.classification == oscillab::criteria::Classification::Inconsistent { EXIT_INCONSISTENT } else { 0 })
}

fn gallery(depth: usize, out: &Path, workers: usize, seed: u64, svg: bool) -> Result<u8, Failure> {
    let summary = lab::run_gallery(depth, out, resolve_workers(workers)?, seed, svg)?;
    println!(
        "{:<24} {:<12} {:<22} {:<6} {:<6} {:>10} {:>12}",
        "entry", "expected", "verdict", "match", "S2", "L final", "W2-L margin"
    );
    for r in &summary.rows {
        let expected = match r.expected {
            lab::Expected::Compact => "compact",
            lab::Expected::NonCompact => "non-compact",
        };
        let s2 = r.s2_satisfied.map_or("n/a".to_string(), |b| b.to_string());
        println!(
            "{:<24} {:<12} {:<22} {:<6} {:<6} {:>10.6} {:>12.3e}",
            r.name,
            expected,
            r.classification.to_string(),
            r.matches,
            s2,
            r.l_final,
            r.w2_dominance_margin
        );
        if !r.matches {
            eprintln!("mismatch: {} expected {expected}, got {} ({})", r.name, r.classification, r.reason);
        }
    }
    Ok(summary.exit_code() as u8)
}

fn decompose(mode: Mode, lambda: Option<&str>, set: &Path) -> Result<u8, Failure> {
    let lambda = lambda.map(lab::parse_lambda).transpose()?;
    let mode = match mode {
        Mode::Density => DecomposeMode::Density,
        Mode::Wik => DecomposeMode::Wik,
    };
    let report = lab::run_decompose(&read(set)?, mode, lambda)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| config_error(e.into()))?);
    Ok(if report.verified { 0 } else { EXIT_MISMATCH })
}

fn leibov(depth: usize, trials: usize, seed: u64) -> Result<u8, Failure> {
    let report = lab::run_leibov(depth, trials, seed)?;
    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| config_error(e.into()))?);
    Ok(if report.passed() { 0 } else { EXIT_MISMATCH })
}

fn identities(n: usize, seed: u64, json: Option<&Path>) -> Result<u8, Failure> {
    let report = lab::run_identities(n, seed)?;
    for c in &report.checks {
        let status = if c.passed() { "ok" } else { "FAILED" };
        println!("{:<26} {:>6} cases  worst {:.3e}  bound {:.3e}  {status}", c.name, c.cases, c.worst, c.tolerance);
    }
    if let Some(path) = json {
        let text = serde_json::to_string_pretty(&report).map_err(|e| config_error(e.into()))?;
        std::fs::write(path, text + "\n").map_err(Error::from)?;
    }
    Ok(if report.passed() { 0 } else { EXIT_MISMATCH })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { config } => sweep(config),
        Command::Gallery { depth, out, workers, seed, svg } => gallery(*depth, out, *workers, *seed, *svg),
        Command::Decompose { mode, lambda, set } => decompose(*mode, lambda.as_deref(), set),
        Command::Leibov { depth, trials, seed } => leibov(*depth, *trials, *seed),
        Command::Identities { n, seed, json } => identities(*n, *seed, json.as_deref()),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
