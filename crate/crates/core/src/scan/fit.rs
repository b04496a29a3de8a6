//! Power-law exponents from log-log regression next to a critical point.

use serde::{Deserialize, Serialize};

use super::sweep::{Column, SweepResult};
use crate::{Error, Result};

/// Fits with `R^2` below this are refused.
pub const MIN_R_SQUARED: f64 = 0.95;
/// Slopes smaller than this in magnitude are refused as non-divergent.
pub const MIN_SLOPE: f64 = 0.05;
/// Near/far slope disagreement above this suggests a logarithmic correction.
pub const SENSITIVITY_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitWindow {
    pub side: Side,
    /// Largest `|g - g_c|` used; `None` keeps the whole side.
    pub width: Option<f64>,
    /// Points nearest `g_c` that are dropped.
    pub exclude: usize,
    pub min_points: usize,
}

impl FitWindow {
    pub fn new(side: Side) -> FitWindow {
        FitWindow {
            side,
            width: None,
            exclude: 2,
            min_points: 6,
        }
    }

    pub fn with_width(mut self, width: f64) -> FitWindow {
        self.width = Some(width);
        self
    }
}

/// `|column| ~ amplitude |g - g_c|^exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
    pub side: Side,
    pub points: usize,
    /// Range of `|g - g_c|` actually fitted.
    pub distance_range: (f64, f64),
    /// `|slope(near half) - slope(far half)|`.
    pub window_sensitivity: f64,
    pub log_correction_suspected: bool,
}

struct Line {
    slope: f64,
    intercept: f64,
    r_squared: f64,
}

fn regress(xs: &[f64], ys: &[f64]) -> Line {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 0.0 };
    Line {
        slope,
        intercept,
        r_squared,
    }
}

/// Least-squares slope of `ln|column|` against `ln|g - g_c|` on one side.
pub fn fit_exponent(grid: &[f64], column: &[f64], g_c: f64, window: &FitWindow) -> Result<ExponentFit> {
    if grid.len() != column.len() {
        return Err(Error::domain("grid and column lengths differ"));
    }
    let mut pts: Vec<(f64, f64)> = grid
        .iter()
        .zip(column)
        .filter_map(|(&g, &y)| {
            let d = match window.side {
                Side::Left => g_c - g,
                Side::Right => g - g_c,
            };
            (d > 0.0 && window.width.is_none_or(|w| d <= w)).then_some((d, y))
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let pts = pts.get(window.exclude..).unwrap_or(&[]);
    if pts.len() < window.min_points.max(3) {
        return Err(Error::domain(format!(
            "{} usable points on the {:?} side, need {}",
            pts.len(),
            window.side,
            window.min_points
        )));
    }
    if pts.iter().any(|(_, y)| !y.is_finite() || *y == 0.0) {
        return Err(Error::LowConfidence {
            reason: "column vanishes or is not finite in the window",
            slope: f64::NAN,
            r_squared: f64::NAN,
            window_sensitivity: f64::NAN,
        });
    }
    let xs: Vec<f64> = pts.iter().map(|(d, _)| d.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|(_, y)| y.abs().ln()).collect();
    let line = regress(&xs, &ys);
    let mid = xs.len() / 2;
    let near = regress(&xs[..mid.max(3)], &ys[..mid.max(3)]);
    let far = regress(&xs[mid.min(xs.len() - 3)..], &ys[mid.min(xs.len() - 3)..]);
    let sensitivity = (near.slope - far.slope).abs();

    if line.slope.abs() < MIN_SLOPE {
        return Err(Error::LowConfidence {
            reason: "non-divergent (flat in log-log)",
            slope: line.slope,
            r_squared: line.r_squared,
            window_sensitivity: sensitivity,
        });
    }
    if line.r_squared < MIN_R_SQUARED {
        return Err(Error::LowConfidence {
            reason: "poor power-law fit",
            slope: line.slope,
            r_squared: line.r_squared,
            window_sensitivity: sensitivity,
        });
    }
    Ok(ExponentFit {
        exponent: line.slope,
        amplitude: line.intercept.exp(),
        r_squared: line.r_squared,
        side: window.side,
        points: pts.len(),
        distance_range: (pts[0].0, pts[pts.len() - 1].0),
        window_sensitivity: sensitivity,
        log_correction_suspected: sensitivity > SENSITIVITY_THRESHOLD,
    })
}

/// Fits `d^order column / dg^order` of a uniform sweep; `order = 0` uses the
/// column itself.
pub fn fit_sweep_exponent(
    sweep: &SweepResult,
    column: Column,
    order: usize,
    g_c: f64,
    window: &FitWindow,
) -> Result<ExponentFit> {
    let values = if order == 0 {
        sweep
            .column(column)
            .ok_or_else(|| Error::domain(format!("column {column} is not available")))?
    } else {
        sweep.differentiate(column, order)?
    };
    fit_exponent(sweep.grid.values(), &values, g_c, window)
}
