//! `seqmeas`: figure sweeps, configured measurement chains and validation
//! suites for sequential Gaussian-pointer measurements.
//!
//! Exit status: 0 on success, 1 when a validation suite fails, 2 on usage,
//! configuration or evaluation errors. `SEQMEAS_THREADS` caps the worker
//! pool; output does not depend on it.

// `!(x > y)` comparisons deliberately reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod figures;
mod grid;
mod run;
mod table;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use seqmeas::validate::{Suite, ValidateConfig};

use crate::config::ChainConfig;
use crate::grid::Grid;
use crate::run::OracleSettings;
use crate::table::CsvTable;

#[derive(Parser, Debug)]
#[command(name = "seqmeas", version, about = "Sequential indirect measurements with Gaussian pointers")]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct OracleArgs {
    /// Seed for Monte Carlo sampling and randomized checks.
    #[arg(long, default_value_t = ValidateConfig::default().seed)]
    seed: u64,

    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: usize,

    /// Absolute tolerance for adaptive quadrature.
    #[arg(long, default_value_t = 1e-10)]
    quad_tol: f64,
}

impl OracleArgs {
    fn settings(&self) -> Result<OracleSettings> {
        if self.mc_samples == 0 {
            return Err(anyhow!("--mc-samples must be positive"));
        }
        if !(self.quad_tol > 0.0 && self.quad_tol.is_finite()) {
            return Err(anyhow!("--quad-tol must be positive (got {})", self.quad_tol));
        }
        Ok(OracleSettings { seed: self.seed, mc_samples: self.mc_samples, quad_tol: self.quad_tol })
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Var(S_x) after an unread S_z measurement of |+>, against sigma1 (log-spaced).
    Fig2 {
        #[arg(long, default_value = "0.01:100:50", value_name = "MIN:MAX:STEPS", allow_hyphen_values = true)]
        sigma1: Grid,
    },
    /// Var(S_x | S_z outcome x1) over an x1 by sigma1 grid (linear spacing).
    Fig3 {
        #[arg(long, default_value = "-1:1:41", value_name = "MIN:MAX:STEPS", allow_hyphen_values = true)]
        x1: Grid,
        #[arg(long, default_value = "0.1:2:20", value_name = "MIN:MAX:STEPS", allow_hyphen_values = true)]
        sigma1: Grid,
    },
    /// Var(S_z | S_x outcome x2) over an x2 by sigma2 grid at fixed sigma1.
    Fig4 {
        #[arg(long, default_value = "-1:1:41", value_name = "MIN:MAX:STEPS", allow_hyphen_values = true)]
        x2: Grid,
        #[arg(long, default_value = "0.1:2:20", value_name = "MIN:MAX:STEPS", allow_hyphen_values = true)]
        sigma2: Grid,
        #[arg(long, default_value_t = 1e3)]
        sigma1: f64,
    },
    /// Conditional statistics of one outcome of a chain defined in a JSON file.
    Chain {
        config: PathBuf,
        /// Add quadrature and Monte Carlo columns.
        #[arg(long)]
        with_oracles: bool,
        #[command(flatten)]
        oracle: OracleArgs,
    },
    /// Run a property suite (pointer, kraus, joint, conditional, nseq, mpur) or all.
    Validate {
        suite: String,
        #[command(flatten)]
        oracle: OracleArgs,
    },
}

/// The invocation, quoted so it can be pasted back into a shell.
fn command_line() -> String {
    let quote = |a: String| {
        if !a.is_empty() && a.chars().all(|c| c.is_ascii_alphanumeric() || "-_.:/=+,".contains(c)) {
            a
        } else {
            format!("'{}'", a.replace('\'', r"'\''"))
        }
    };
    std::iter::once("seqmeas".to_string())
        .chain(std::env::args().skip(1).map(quote))
        .collect::<Vec<_>>()
        .join(" ")
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("SEQMEAS_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| anyhow!("SEQMEAS_THREADS must be a positive integer (got {v:?})"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .context("configuring worker pool")
}

fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?);
            write(&mut w).with_context(|| format!("writing {}", p.display()))
        }
        None => write(&mut io::stdout().lock()).context("writing stdout"),
    }
}

fn emit_table(out: Option<&Path>, table: &CsvTable) -> Result<()> {
    emit(out, |w| table.write_to(w))
}

fn execute(cli: Cli) -> Result<ExitCode> {
    configure_threads()?;
    let out = cli.out.as_deref();
    let command = command_line();
    match cli.command {
        Command::Fig2 { sigma1 } => emit_table(out, &figures::fig2(&sigma1, &command)?)?,
        Command::Fig3 { x1, sigma1 } => emit_table(out, &figures::fig3(&x1, &sigma1, &command)?)?,
        Command::Fig4 { x2, sigma2, sigma1 } => {
            emit_table(out, &figures::fig4(&x2, &sigma2, sigma1, &command)?)?
        }
        Command::Chain { config, with_oracles, oracle } => {
            let settings = oracle.settings()?;
            let bytes = fs::read(&config).with_context(|| format!("reading {}", config.display()))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| anyhow!("{}: not valid UTF-8", config.display()))?;
            let cfg = ChainConfig::parse(&text).map_err(|e| anyhow!("{}: {e}", config.display()))?;
            let table = run::chain(&cfg, &bytes, with_oracles.then_some(settings), oracle.seed, &command)?;
            emit_table(out, &table)?;
        }
        Command::Validate { suite, oracle } => {
            let settings = oracle.settings()?;
            let which = if suite == "all" {
                None
            } else {
                Some(suite.parse::<Suite>().map_err(|e| anyhow!("{e} (expected all or one of pointer, kraus, joint, conditional, nseq, mpur)"))?)
            };
            let (reports, text) = run::validate(which, settings);
            let passed = reports.iter().all(|r| r.passed());
            let checks: usize = reports.iter().map(|r| r.checks.len()).sum();
            let failed: usize = reports.iter().map(|r| r.checks.iter().filter(|c| !c.passed).count()).sum();
            emit(out, |w| {
                writeln!(w, "# {command}")?;
                w.write_all(text.as_bytes())?;
                writeln!(w, "{} of {checks} checks passed (seed {})", checks - failed, oracle.seed)?;
                w.flush()
            })?;
            if !passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
