//! Run configuration: subcommand defaults, then a `key = value` file, then
//! command-line flags, each overriding the previous layer.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use site_entropy::analytic::QuadratureSpec;
use site_entropy::fock::MAX_SITES;
use site_entropy::hamiltonian::Boundary;
use site_entropy::scan::{Column, Driver, Side, Signal, Source, MIN_GRID_POINTS};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    EdSweep,
    GrSweep,
    LwMuc,
    Detect,
    FitExponent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Hubbard,
    Gr,
    Synthetic,
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "hubbard" => Ok(Model::Hubbard),
            "gr" => Ok(Model::Gr),
            "synthetic" => Ok(Model::Synthetic),
            _ => Err(format!("unknown model '{s}' (expected hubbard, gr or synthetic)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub l: usize,
    pub u: f64,
    pub mu: f64,
    pub h: f64,
    /// Filling of the closed-form model for the `u` driver.
    pub n: f64,
    pub boundary: Boundary,
    pub driver: Driver,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_steps: usize,
    pub source: Source,
    pub output: Option<PathBuf>,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub refinements: usize,
    pub column: Column,
    pub signal: Option<Signal>,
    pub g_c: Option<f64>,
    pub side: Side,
    pub order: usize,
    pub width: Option<f64>,
    pub input: Option<PathBuf>,
}

/// Every key accepted in a config file, in the order they are documented.
pub const KEYS: [&str; 23] = [
    "model",
    "L",
    "u",
    "mu",
    "h",
    "n",
    "boundary",
    "driver",
    "grid_min",
    "grid_max",
    "grid_steps",
    "source",
    "output",
    "abs_tol",
    "rel_tol",
    "refinements",
    "column",
    "signal",
    "g_c",
    "side",
    "order",
    "width",
    "input",
];

impl RunConfig {
    pub fn defaults(command: Command) -> RunConfig {
        let base = RunConfig {
            command,
            model: Model::Gr,
            l: 8,
            u: 0.0,
            mu: 0.0,
            h: 0.0,
            n: 1.0,
            boundary: Boundary::Periodic,
            driver: Driver::U,
            grid_min: 0.0,
            grid_max: 8.0,
            grid_steps: 161,
            source: Source::Analytic,
            output: None,
            abs_tol: 1e-10,
            rel_tol: 0.0,
            refinements: 3,
            column: Column::Entropy,
            signal: None,
            g_c: None,
            side: Side::Left,
            order: 1,
            width: None,
            input: None,
        };
        match command {
            Command::EdSweep => RunConfig {
                model: Model::Hubbard,
                source: Source::Ed,
                grid_min: -4.0,
                grid_max: 4.0,
                grid_steps: 81,
                ..base
            },
            Command::Detect => RunConfig {
                grid_min: 5.5,
                grid_max: 7.0,
                grid_steps: 41,
                ..base
            },
            Command::LwMuc => RunConfig { u: 4.0, ..base },
            Command::GrSweep | Command::FitExponent => base,
        }
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let value = value.trim();
        let bad = |e: String| CliError::usage(format!("{key}: {e}"));
        match key {
            "model" => self.model = value.parse().map_err(bad)?,
            "L" => self.l = parse(value).map_err(bad)?,
            "u" => self.u = parse(value).map_err(bad)?,
            "mu" => self.mu = parse(value).map_err(bad)?,
            "h" => self.h = parse(value).map_err(bad)?,
            "n" => self.n = parse(value).map_err(bad)?,
            "boundary" => {
                self.boundary = match value {
                    "open" => Boundary::Open,
                    "periodic" => Boundary::Periodic,
                    _ => return Err(bad(format!("unknown boundary '{value}' (expected open or periodic)"))),
                }
            }
            "driver" => self.driver = value.parse().map_err(|e: site_entropy::Error| bad(e.to_string()))?,
            "grid_min" => self.grid_min = parse(value).map_err(bad)?,
            "grid_max" => self.grid_max = parse(value).map_err(bad)?,
            "grid_steps" => self.grid_steps = parse(value).map_err(bad)?,
            "source" => self.source = value.parse().map_err(|e: site_entropy::Error| bad(e.to_string()))?,
            "output" => self.output = Some(PathBuf::from(value)),
            "abs_tol" => self.abs_tol = parse(value).map_err(bad)?,
            "rel_tol" => self.rel_tol = parse(value).map_err(bad)?,
            "refinements" => self.refinements = parse(value).map_err(bad)?,
            "column" => self.column = value.parse().map_err(|e: site_entropy::Error| bad(e.to_string()))?,
            "signal" => {
                self.signal = Some(serde_json::from_str(value).map_err(|e| bad(format!("invalid signal JSON: {e}")))?)
            }
            "g_c" => self.g_c = Some(parse(value).map_err(bad)?),
            "side" => {
                self.side = match value {
                    "left" => Side::Left,
                    "right" => Side::Right,
                    _ => return Err(bad(format!("unknown side '{value}' (expected left or right)"))),
                }
            }
            "order" => self.order = parse(value).map_err(bad)?,
            "width" => self.width = Some(parse(value).map_err(bad)?),
            "input" => self.input = Some(PathBuf::from(value)),
            _ => return Err(CliError::usage(format!("unknown config key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a config file: one `key = value` per line, `#` comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        for (key, value) in parse_file(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec::with_tolerances(self.abs_tol, self.rel_tol)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: String| Err(CliError::Usage(msg));
        if self.command != Command::LwMuc && self.input.is_none() {
            if !(self.grid_min.is_finite() && self.grid_max.is_finite() && self.grid_min < self.grid_max) {
                return fail(format!(
                    "degenerate grid: grid_min {} must be below grid_max {}",
                    self.grid_min, self.grid_max
                ));
            }
            if self.grid_steps < MIN_GRID_POINTS {
                return fail(format!(
                    "grid_steps {} is below the minimum of {MIN_GRID_POINTS}",
                    self.grid_steps
                ));
            }
        }
        if self.source == Source::Ed && !(1..=MAX_SITES).contains(&self.l) {
            return fail(format!(
                "exact diagonalization needs 1 <= L <= {MAX_SITES}, got {}",
                self.l
            ));
        }
        if !(self.abs_tol > 0.0) || !(self.rel_tol >= 0.0) {
            return fail(format!(
                "quadrature tolerances must be positive (abs {}, rel {})",
                self.abs_tol, self.rel_tol
            ));
        }
        match self.command {
            Command::EdSweep if self.source != Source::Ed => fail("ed-sweep needs source = ed".into()),
            Command::EdSweep if self.model == Model::Synthetic => fail("ed-sweep needs model hubbard or gr".into()),
            Command::GrSweep if self.model != Model::Gr || self.source != Source::Analytic => {
                fail("gr-sweep evaluates the closed-form model (model = gr, source = analytic)".into())
            }
            Command::Detect if self.grid_steps < 9 => fail(format!(
                "detect needs at least 9 initial grid points, got {}",
                self.grid_steps
            )),
            Command::FitExponent if self.g_c.is_none() => fail("fit-exponent needs g_c".into()),
            Command::FitExponent if self.order > 3 => fail(format!("derivative order {} not in 0..=3", self.order)),
            _ => Ok(()),
        }?;
        if self.model == Model::Synthetic && self.signal.is_none() && self.input.is_none() {
            return fail("model synthetic needs a signal".into());
        }
        if self.model == Model::Hubbard && self.source == Source::Analytic {
            return fail("the nearest-neighbour chain has no closed-form sweep; use source = ed".into());
        }
        Ok(())
    }
}

fn parse<T: FromStr>(value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| format!("cannot parse '{value}': {e}"))
}

pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, String> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty())
        .map(|(i, line)| {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!("line {}: unknown key '{key}'", i + 1));
            }
            Ok((key.to_string(), value.trim().to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_layers_over_defaults() {
        let mut cfg = RunConfig::defaults(Command::EdSweep);
        for (k, v) in parse_file("# recipe\nL = 6\nboundary = open  # chain\nu = 2.5\n\ndriver = mu\n").unwrap() {
            cfg.set(&k, &v).unwrap();
        }
        assert_eq!(cfg.l, 6);
        assert_eq!(cfg.boundary, Boundary::Open);
        assert_eq!(cfg.u, 2.5);
        assert_eq!(cfg.driver, Driver::Mu);
        assert_eq!(cfg.source, Source::Ed);
    }

    #[test]
    fn malformed_lines_are_rejected() {
        assert!(parse_file("L 6").is_err());
        assert!(parse_file("lattice = 6").is_err());
        let mut cfg = RunConfig::defaults(Command::GrSweep);
        assert!(cfg.set("u", "fast").is_err());
        assert!(cfg.set("boundary", "twisted").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::defaults(Command::EdSweep);
        cfg.validate().unwrap();
        cfg.grid_min = 4.0;
        cfg.grid_max = 4.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::defaults(Command::EdSweep);
        cfg.l = 17;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::defaults(Command::GrSweep);
        cfg.grid_steps = 4;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::defaults(Command::FitExponent);
        assert!(cfg.validate().is_err());
        cfg.g_c = Some(6.0);
        cfg.validate().unwrap();
    }

    #[test]
    fn signal_is_json() {
        let mut cfg = RunConfig::defaults(Command::Detect);
        cfg.set("signal", r#"{"kind": "step", "center": 1.0, "height": 0.5}"#)
            .unwrap();
        assert_eq!(
            cfg.signal,
            Some(Signal::Step {
                center: 1.0,
                height: 0.5
            })
        );
    }
}
