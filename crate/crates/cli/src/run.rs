use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use site_entropy::analytic::lieb_wu_mu_c;
use site_entropy::scan::{
    classify_transition, fit_sweep_exponent, sweep, ClassifyOptions, EdProbe, Family, FitWindow, GrProbe, Grid, Probe,
    Source, Status, SweepResult, SyntheticProbe,
};
use site_entropy::Execution;

use crate::config::{Command, Model, RunConfig};
use crate::error::CliError;
use crate::table::Table;

/// Runs one subcommand and returns the process exit code.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    match cfg.command {
        Command::EdSweep | Command::GrSweep => run_sweep(cfg).map(|_| 0),
        Command::LwMuc => run_mu_c(cfg).map(|_| 0),
        Command::Detect => run_detect(cfg),
        Command::FitExponent => run_fit(cfg).map(|_| 0),
    }
}

fn probe(cfg: &RunConfig) -> Result<Box<dyn Probe>, CliError> {
    Ok(match (cfg.model, cfg.source) {
        (Model::Synthetic, Source::Synthetic | Source::Analytic) => Box::new(SyntheticProbe {
            signal: cfg
                .signal
                .ok_or_else(|| CliError::usage("model synthetic needs a signal"))?,
            driver: cfg.driver,
        }),
        (Model::Hubbard | Model::Gr, Source::Ed) => {
            let family = if cfg.model == Model::Hubbard {
                Family::Hubbard
            } else {
                Family::Gr
            };
            Box::new(EdProbe::new(
                family,
                cfg.boundary,
                cfg.l,
                cfg.u,
                cfg.mu,
                cfg.h,
                cfg.driver,
            )?)
        }
        (Model::Gr, Source::Analytic) => Box::new(GrProbe::new(cfg.driver, cfg.u, cfg.mu, cfg.n)?),
        (model, source) => {
            return Err(CliError::usage(format!(
                "model {model:?} cannot be evaluated with source {source}"
            )))
        }
    })
}

fn compute_sweep(cfg: &RunConfig) -> Result<SweepResult, CliError> {
    let grid = Grid::uniform(cfg.grid_min, cfg.grid_max, cfg.grid_steps)?;
    Ok(sweep(probe(cfg)?.as_ref(), &grid, Execution::default())?)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn io_error(path: &str) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_string(),
        source,
    }
}

/// Writes `text` to the configured output, or standard output.
fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(text.as_bytes())
                .and_then(|_| f.flush())
                .map_err(io_error(&path.display().to_string()))
        }
        None => io::stdout().write_all(text.as_bytes()).map_err(io_error("<stdout>")),
    }
}

fn run_sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let result = compute_sweep(cfg)?;
    let table = Table::from_sweep(&result);
    emit(cfg, &table.to_csv_string())?;
    let line = summary(&table);
    // Keep standard output pure CSV when that is where the table went.
    if cfg.output.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
    Ok(())
}

fn summary(table: &Table) -> String {
    let rows = &table.rows;
    let by_entropy = |a: &&crate::table::Row, b: &&crate::table::Row| a.entropy.total_cmp(&b.entropy);
    let lo = rows.iter().min_by(by_entropy).expect("grid has points");
    let hi = rows.iter().max_by(by_entropy).expect("grid has points");
    let degenerate = rows.iter().filter(|r| r.flags.degenerate).count();
    let saturated = rows.iter().filter(|r| r.flags.saturated).count();
    let flags = match (degenerate, saturated) {
        (0, 0) => "none".to_string(),
        _ => format!("degenerate at {degenerate} points, saturated at {saturated} points"),
    };
    format!(
        "{} points; entropy min {:.12} at g = {}, max {:.12} at g = {}; flags: {flags}",
        rows.len(),
        lo.entropy,
        lo.g,
        hi.entropy,
        hi.g
    )
}

fn run_mu_c(cfg: &RunConfig) -> Result<(), CliError> {
    let r = lieb_wu_mu_c(cfg.u, &cfg.quadrature())?;
    println!(
        "u = {}  mu_c = {:.15}  error <= {:.3e}  (cutoff {}, {} integrand evaluations)",
        cfg.u, r.value, r.error, r.cutoff, r.evaluations
    );
    if cfg.output.is_some() {
        let mut value = serde_json::to_value(r).expect("serializable");
        value["u"] = cfg.u.into();
        emit(
            cfg,
            &format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")),
        )?;
    }
    Ok(())
}

fn run_detect(cfg: &RunConfig) -> Result<i32, CliError> {
    let opts = ClassifyOptions {
        column: cfg.column,
        initial_points: cfg.grid_steps,
        refinements: cfg.refinements,
        ..ClassifyOptions::default()
    };
    let report = classify_transition(probe(cfg)?.as_ref(), (cfg.grid_min, cfg.grid_max), &opts)?;
    let json = serde_json::to_string_pretty(&report).expect("serializable");
    emit(cfg, &format!("{json}\n"))?;
    if cfg.output.is_some() {
        let order = report.order_k.map_or("none".to_string(), |k| k.to_string());
        let g_c = report
            .g_c
            .map_or("-".to_string(), |g| format!("{g:.10} +- {:.1e}", report.resolution));
        println!("{:?}: order {order}, g_c {g_c}", report.status);
    }
    Ok(if report.status == Status::Inconclusive { 3 } else { 0 })
}

fn run_fit(cfg: &RunConfig) -> Result<(), CliError> {
    let result = match &cfg.input {
        Some(path) => {
            let file = File::open(path).map_err(io_error(&path.display().to_string()))?;
            Table::read(file)?.to_sweep(cfg.driver)?
        }
        None => compute_sweep(cfg)?,
    };
    let g_c = cfg.g_c.ok_or_else(|| CliError::usage("fit-exponent needs g_c"))?;
    let mut window = FitWindow::new(cfg.side);
    window.width = cfg.width;
    let fit = fit_sweep_exponent(&result, cfg.column, cfg.order, g_c, &window)?;
    let mut value = serde_json::to_value(fit).expect("serializable");
    value["column"] = cfg.column.to_string().into();
    value["derivative_order"] = cfg.order.into();
    value["g_c"] = g_c.into();
    emit(
        cfg,
        &format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")),
    )
}
