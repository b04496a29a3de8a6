//! Command-line front end for single-site entanglement sweeps, transition
//! detection and exponent fits.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod error;
mod run;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Command, RunConfig};
use error::CliError;

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "SITE_ENTROPY_THREADS";

#[derive(Parser)]
#[command(
    name = "site-entropy",
    version,
    about = "Single-site entanglement and quantum phase transitions"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Exact-diagonalization sweep to CSV.
    EdSweep(Flags),
    /// Closed-form sweep of the long-range hopping model to CSV.
    GrSweep(Flags),
    /// Critical chemical potential of the half-filled nearest-neighbour chain.
    LwMuc(Flags),
    /// Locate and classify a transition inside [min, max]; prints a JSON report.
    Detect(Flags),
    /// Power-law fit of a column (or one of its derivatives) next to g_c.
    FitExponent(Flags),
}

/// Every flag overrides the config-file key named in its help text.
#[derive(Args, Default)]
struct Flags {
    /// Config file with one `key = value` per line.
    #[arg(long)]
    config: Option<PathBuf>,
    /// model: hubbard | gr | synthetic
    #[arg(long)]
    model: Option<String>,
    /// L: number of sites
    #[arg(long = "L")]
    l: Option<String>,
    /// u: on-site interaction
    #[arg(long, allow_hyphen_values = true)]
    u: Option<String>,
    /// mu: chemical potential
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    /// h: magnetic field
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// n: filling of the closed-form model
    #[arg(long)]
    n: Option<String>,
    /// boundary: open | periodic
    #[arg(long)]
    boundary: Option<String>,
    /// driver: u | mu | h
    #[arg(long)]
    driver: Option<String>,
    /// grid_min (detect: window start)
    #[arg(long, allow_hyphen_values = true)]
    min: Option<String>,
    /// grid_max (detect: window end)
    #[arg(long, allow_hyphen_values = true)]
    max: Option<String>,
    /// grid_steps (detect: initial sweep points)
    #[arg(long)]
    steps: Option<String>,
    /// source: ed | analytic | synthetic
    #[arg(long)]
    source: Option<String>,
    /// output: file path; standard output when absent
    #[arg(long)]
    output: Option<String>,
    /// abs_tol: quadrature absolute tolerance
    #[arg(long)]
    abs_tol: Option<String>,
    /// rel_tol: quadrature relative tolerance
    #[arg(long)]
    rel_tol: Option<String>,
    /// refinements: halvings after the initial detection sweep
    #[arg(long)]
    refinements: Option<String>,
    /// column: entropy | e0 | n | m | w0 | w_up | w_down | w2
    #[arg(long)]
    column: Option<String>,
    /// signal: JSON synthetic signal, e.g. {"kind":"power","center":1,"exponent":0.5,"amplitude":1}
    #[arg(long)]
    signal: Option<String>,
    /// g_c: critical point for exponent fits
    #[arg(long, allow_hyphen_values = true)]
    g_c: Option<String>,
    /// side: left | right
    #[arg(long)]
    side: Option<String>,
    /// order: derivative order of the fitted column, 0 for the column itself
    #[arg(long)]
    order: Option<String>,
    /// width: largest |g - g_c| in the fit
    #[arg(long)]
    width: Option<String>,
    /// input: sweep CSV to fit instead of computing a sweep
    #[arg(long)]
    input: Option<String>,
}

impl Flags {
    fn settings(self) -> Vec<(&'static str, String)> {
        [
            ("model", self.model),
            ("L", self.l),
            ("u", self.u),
            ("mu", self.mu),
            ("h", self.h),
            ("n", self.n),
            ("boundary", self.boundary),
            ("driver", self.driver),
            ("grid_min", self.min),
            ("grid_max", self.max),
            ("grid_steps", self.steps),
            ("source", self.source),
            ("output", self.output),
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("refinements", self.refinements),
            ("column", self.column),
            ("signal", self.signal),
            ("g_c", self.g_c),
            ("side", self.side),
            ("order", self.order),
            ("width", self.width),
            ("input", self.input),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k, v)))
        .collect()
    }
}

fn configure(cli: Cli) -> Result<RunConfig, CliError> {
    let (command, mut flags) = match cli.command {
        Sub::EdSweep(f) => (Command::EdSweep, f),
        Sub::GrSweep(f) => (Command::GrSweep, f),
        Sub::LwMuc(f) => (Command::LwMuc, f),
        Sub::Detect(f) => (Command::Detect, f),
        Sub::FitExponent(f) => (Command::FitExponent, f),
    };
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = flags.config.take() {
        cfg.apply_file(&path)?;
    }
    for (key, value) in flags.settings() {
        cfg.set(key, &value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn threads() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::usage(format!("{THREADS_VAR}={v} is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = threads().and_then(|t| {
        site_entropy::configure_threads(t);
        configure(cli)
    });
    match result.and_then(|cfg| run::run(&cfg)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
