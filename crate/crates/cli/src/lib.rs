//! The `stabkit` command line: argument parsing, report assembly, output.

pub mod commands;
pub mod report;
pub mod svg;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use stabkit_core::quiver::DEFAULT_BUDGET;

pub use commands::{execute, Outcome};
pub use report::{Check, Report, Verdict};

#[derive(Parser, Debug, Clone)]
#[command(name = "stabkit", version, about = "Exact stability-condition computations on quiver representations")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Enumeration budget: candidate subspaces or lattice points.
    #[arg(long, global = true, env = "STABKIT_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Tolerance for float-side comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Write the JSON report to this file instead of stdout.
    #[arg(long, global = true, visible_aliases = ["report", "out", "certify"])]
    pub json: Option<PathBuf>,
    /// Write the command's main table as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Parse and sanity-check input documents.
    Validate(ValidateArgs),
    /// HN filtration and polygon of one object.
    Hn(HnArgs),
    /// Walls crossed by one object along a path of charges.
    Walls(WallsArgs),
    /// Lift a path of charges and check HN, support and continuity along it.
    Deform(DeformArgs),
    /// Sampled lower bound for the distance between two stability functions.
    Dist(DistArgs),
    /// Extend a lattice until the form has signature (2, rk - 2).
    Qext(QextArgs),
    /// Support certificate on a 2-Calabi-Yau lattice.
    Cy2(Cy2Args),
}

#[derive(Args, Debug, Clone)]
pub struct ValidateArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub charge: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct HnArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub charge: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Overlay the truncated polygon on the SVG.
    #[arg(long)]
    pub truncated: bool,
}

#[derive(Args, Debug, Clone)]
pub struct WallsArgs {
    #[arg(long)]
    pub object: PathBuf,
    #[arg(long)]
    pub path: PathBuf,
    /// Needed when the path is given by `u`.
    #[arg(long)]
    pub q: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DeformArgs {
    #[arg(long)]
    pub sigma: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    #[arg(long)]
    pub path: PathBuf,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
}

#[derive(Args, Debug, Clone)]
pub struct DistArgs {
    #[arg(long)]
    pub sigma1: PathBuf,
    #[arg(long)]
    pub sigma2: PathBuf,
    #[arg(long)]
    pub sample: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct QextArgs {
    #[arg(long)]
    pub q: PathBuf,
    #[arg(long)]
    pub z: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct Cy2Args {
    #[arg(long)]
    pub lattice: PathBuf,
    #[arg(long)]
    pub z: PathBuf,
}

fn emit(cli: &Cli, out: &Outcome) -> Result<()> {
    let json = out.report.to_json();
    match &cli.global.json {
        Some(p) => std::fs::write(p, &json).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{json}"),
    }
    if let Some(p) = &cli.global.csv {
        let Some(t) = &out.table else { bail!("this command has no table for --csv") };
        std::fs::write(p, t.to_csv()?).with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some((p, svg)) = &out.svg {
        std::fs::write(p, svg).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

/// Runs one command and returns the process exit code: 0 when every check
/// passes, 1 when a mathematical check fails, 2 on input or budget errors.
pub fn run(cli: &Cli) -> i32 {
    let start = Instant::now();
    let outcome = execute(cli).and_then(|mut out| {
        out.report.timing_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
        emit(cli, &out)?;
        Ok(out)
    });
    match outcome {
        Ok(out) => {
            for c in out.report.checks.iter().filter(|c| !c.pass) {
                let w = c.witness.as_ref().map(|w| w.to_string()).unwrap_or_default();
                eprintln!("check failed: {} {w}", c.name);
            }
            out.report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}
