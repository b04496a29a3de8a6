//! Locating and classifying non-analytic points of a swept observable.
//!
//! A coarse sweep of the window picks a candidate where the fourth difference
//! peaks. Each refinement round then samples `local_points + 1` nodes at half
//! the previous spacing around the current estimate and, for each derivative
//! order `j`, fits
//!
//! ```text
//! f(x) = P(x) + sum_{i=j..4} c_i (x - g)_+^i / i!
//! ```
//!
//! with `P` a polynomial and `g` scanned for the least residual. `c_j` is the
//! jump of the `j`-th derivative at `g`. How `|c_j|` scales as the spacing
//! halves separates the outcomes: shrinking means smooth, steady growth means
//! a divergence, and a stable nonzero value means a finite jump.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::differentiate::derivative;
use super::fit::{fit_exponent, ExponentFit, FitWindow, Side};
use super::sweep::{evaluate_all, Column, Driver, Probe, Record, Source};
use crate::entropy::OccupationSet;
use crate::{Error, Execution, Result};

/// Highest derivative order examined.
pub const MAX_DERIVATIVE: usize = 3;
const JUMP_TERMS: usize = 5;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub column: Column,
    /// Nodes of the initial sweep across the window.
    pub initial_points: usize,
    /// Number of halvings after the initial round.
    pub refinements: usize,
    /// Node intervals per local fit (even).
    pub local_points: usize,
    pub poly_degree: usize,
    /// A jump `|c_j|` at or below `max(abs_tol, rel_tol * scale_j)` is zero,
    /// where `scale_j` is the largest `|d^j f|` on the initial sweep.
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// `|beta|` threshold on `log2` growth of `|c_j|` per halving.
    pub growth_threshold: f64,
    /// Relative change of `c_j` over the last halving that counts as stable.
    pub stability: f64,
    pub equipartition_tol: f64,
    pub vanishing_tol: f64,
    pub execution: Execution,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            column: Column::Entropy,
            initial_points: 41,
            refinements: 3,
            local_points: 24,
            poly_degree: 5,
            abs_tol: 1e-6,
            rel_tol: 1e-3,
            growth_threshold: 0.2,
            stability: 0.05,
            equipartition_tol: 1e-6,
            vanishing_tol: 1e-6,
            execution: Execution::Parallel,
        }
    }
}

impl ClassifyOptions {
    fn validate(&self) -> Result<()> {
        if self.initial_points < 9 {
            return Err(Error::domain("initial sweep needs at least 9 points"));
        }
        if self.refinements > 20 {
            return Err(Error::domain("at most 20 refinement rounds"));
        }
        if self.local_points < 16 || !self.local_points.is_multiple_of(2) {
            return Err(Error::domain("local_points must be even and at least 16"));
        }
        if self.poly_degree + JUMP_TERMS + 1 >= self.local_points {
            return Err(Error::domain("local fit has more parameters than nodes"));
        }
        if !(self.abs_tol > 0.0 && self.rel_tol >= 0.0 && self.growth_threshold > 0.0 && self.stability > 0.0) {
            return Err(Error::domain("classification tolerances must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Detected,
    NoneDetected,
    Inconclusive,
    /// A signal in exact-diagonalization data; never promoted to an order.
    FiniteSizeEvidence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Singularity {
    Jump,
    Divergence,
    Kink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Smooth,
    Jump,
    Divergence,
    Kink,
    Inconclusive,
}

impl Verdict {
    fn singularity(self) -> Option<Singularity> {
        match self {
            Verdict::Jump => Some(Singularity::Jump),
            Verdict::Divergence => Some(Singularity::Divergence),
            Verdict::Kink => Some(Singularity::Kink),
            _ => None,
        }
    }
}

/// Jump fit of one derivative order in one round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderFit {
    pub order: usize,
    pub g: f64,
    pub jump: f64,
    pub left: f64,
    pub right: f64,
    pub rms_residual: f64,
}

/// One refinement round.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Round {
    pub round: usize,
    pub spacing: f64,
    pub nodes: usize,
    pub range: (f64, f64),
    /// Fits for derivative orders `0..=3`.
    pub fits: Vec<OrderFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeEvidence {
    pub order: usize,
    pub verdict: Verdict,
    pub tolerance: f64,
    /// `log2` growth of `|c_j|` per halving, from the first round above `tolerance` to the last.
    pub growth_per_halving: Option<f64>,
    pub left_limit: f64,
    pub right_limit: f64,
    pub jump: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub candidate: f64,
    pub derivatives: Vec<DerivativeEvidence>,
    pub rounds: Vec<Round>,
    /// What the analysis found in data that cannot carry a definitive order.
    pub candidate_order: Option<usize>,
    pub candidate_singularity: Option<Singularity>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Flags {
    pub equipartition_near_gc: bool,
    /// Names of occupation parameters below the vanishing tolerance at `g_c`.
    pub vanishing_occupation: Vec<&'static str>,
    pub degenerate_ground_state: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Maximum,
    Minimum,
}

/// An interior extremum of the entropy on the initial sweep. An annotation
/// only: extrema do not by themselves indicate a transition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub g: f64,
    pub entropy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExponentReport {
    #[serde(flatten)]
    pub fit: ExponentFit,
    /// Derivative order of the fitted column.
    pub derivative_order: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransitionReport {
    pub status: Status,
    pub source: Source,
    pub driver: Driver,
    pub column: Column,
    pub window: (f64, f64),
    pub g_c: Option<f64>,
    /// Finest node spacing, the resolution of `g_c`.
    pub resolution: f64,
    pub order_k: Option<usize>,
    pub singularity: Option<Singularity>,
    pub exponent: Option<ExponentReport>,
    pub exponent_refusal: Option<String>,
    pub flags: Flags,
    pub entropy_extrema: Vec<Extremum>,
    pub evidence: Evidence,
    pub evaluations: usize,
}

/// True iff every occupation parameter lies within `tol` of 1/4.
pub fn equipartition_check(occ: &OccupationSet, tol: f64) -> bool {
    occ.probabilities().iter().all(|w| (w - 0.25).abs() < tol)
}

pub fn vanishing_occupations(occ: &OccupationSet, tol: f64) -> Vec<&'static str> {
    ["w0", "w_up", "w_down", "w2"]
        .into_iter()
        .zip(occ.probabilities())
        .filter_map(|(name, w)| (w < tol).then_some(name))
        .collect()
}

struct Evaluator<'a> {
    probe: &'a dyn Probe,
    origin: f64,
    finest: f64,
    exec: Execution,
    cache: BTreeMap<i64, Record>,
}

impl Evaluator<'_> {
    fn point(&self, index: i64) -> f64 {
        self.origin + index as f64 * self.finest
    }

    fn ensure(&mut self, indices: &[i64]) -> Result<()> {
        let missing: Vec<i64> = indices
            .iter()
            .copied()
            .filter(|i| !self.cache.contains_key(i))
            .collect();
        let points: Vec<f64> = missing.iter().map(|&i| self.point(i)).collect();
        let records = evaluate_all(self.probe, &points, self.exec)?;
        self.cache.extend(missing.into_iter().zip(records));
        Ok(())
    }

    fn values(&mut self, indices: &[i64], column: Column) -> Result<Vec<f64>> {
        self.ensure(indices)?;
        indices
            .iter()
            .map(|i| {
                self.cache[i]
                    .value(column)
                    .ok_or_else(|| Error::domain(format!("column {column} is not produced by this source")))
            })
            .collect()
    }
}

struct LocalFit {
    g: f64,
    jump: f64,
    left: f64,
    rms: f64,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Least-squares fit of the changepoint model with jump terms of orders
/// `order..JUMP_TERMS` at a fixed `g`, in scaled coordinates
/// `t = (x - center) / half`. Returns the residual sum of squares and the
/// coefficients (polynomial first).
fn fit_at(
    xs: &[f64],
    ys: &[f64],
    g: f64,
    frame: (f64, f64),
    degree: usize,
    order: usize,
) -> Option<(f64, DVector<f64>)> {
    let (center, half) = frame;
    let cols = degree + 1 + JUMP_TERMS - order;
    let a = DMatrix::from_fn(xs.len(), cols, |i, k| {
        if k <= degree {
            ((xs[i] - center) / half).powi(k as i32)
        } else {
            let j = k - degree - 1 + order;
            let s = (xs[i] - g) / half;
            if s > 0.0 {
                s.powi(j as i32) / factorial(j)
            } else {
                0.0
            }
        }
    });
    let b = DVector::from_column_slice(ys);
    let coef = a.clone().svd(true, true).solve(&b, 1e-13).ok()?;
    let rss = (&a * &coef - &b).norm_squared();
    Some((rss, coef))
}

fn golden<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Fits a jump of the given derivative order, with free jumps of all higher
/// orders, scanning `g` over the middle half of the nodes.
///
/// Node data cannot place `g` inside a node interval when lower-order jump
/// terms can compensate, so the residual is flat there. Among locations whose
/// residual is within a factor two of the best, the one with the smallest
/// `|c_order|` is kept.
fn changepoint_fit(xs: &[f64], ys: &[f64], degree: usize, order: usize) -> Result<LocalFit> {
    let n = xs.len();
    let frame = (0.5 * (xs[0] + xs[n - 1]), 0.5 * (xs[n - 1] - xs[0]));
    let (lo, hi) = (frame.0 - 0.5 * frame.1, frame.0 + 0.5 * frame.1);
    let eval = |g: f64| fit_at(xs, ys, g, frame, degree, order);
    let rss_at = |g: f64| eval(g).map_or(f64::INFINITY, |(r, _)| r);
    let jump_at = |g: f64| eval(g).map_or(f64::INFINITY, |(_, c)| c[degree + 1].abs());

    let mut best = (f64::INFINITY, frame.0, (xs[0], xs[n - 1]));
    for w in xs.windows(2) {
        let (x0, x1) = (w[0].max(lo), w[1].min(hi));
        if x1 <= x0 {
            continue;
        }
        for m in 0..8 {
            let g = x0 + (x1 - x0) * (m as f64 + 0.5) / 8.0;
            let r = rss_at(g);
            if r < best.0 {
                best = (r, g, (x0, x1));
            }
        }
    }
    let (_, g0, (x0, x1)) = best;
    let delta = (x1 - x0) / 8.0;
    let (g_rss, rss_min) = golden(rss_at, (g0 - delta).max(x0), (g0 + delta).min(x1));
    let (g_rss, rss_min) = if rss_min <= best.0 {
        (g_rss, rss_min)
    } else {
        (g0, best.0)
    };

    let scale = ys.iter().map(|y| y.abs()).fold(0.0, f64::max);
    let slack = 2.0 * rss_min + n as f64 * (1e-14 * scale).powi(2);
    let samples = 32;
    let mut pick = (jump_at(g_rss), g_rss);
    for m in 0..samples {
        let g = x0 + (x1 - x0) * (m as f64 + 0.5) / samples as f64;
        if rss_at(g) <= slack {
            let c = jump_at(g);
            if c < pick.0 {
                pick = (c, g);
            }
        }
    }
    let step = (x1 - x0) / samples as f64;
    let (g_min, c_min) = golden(
        |g| if rss_at(g) <= slack { jump_at(g) } else { f64::INFINITY },
        (pick.1 - step).max(x0),
        (pick.1 + step).min(x1),
    );
    let g = if c_min < pick.0 { g_min } else { pick.1 };

    let (rss, coef) = eval(g).ok_or_else(|| Error::domain("local changepoint fit failed"))?;
    let tg = (g - frame.0) / frame.1;
    let unit = frame.1.powi(order as i32);
    let left = (order..=degree)
        .map(|k| coef[k] * factorial(k) / factorial(k - order) * tg.powi((k - order) as i32))
        .sum::<f64>()
        / unit;
    Ok(LocalFit {
        g,
        jump: coef[degree + 1] / unit,
        left,
        rms: (rss / n as f64).sqrt(),
    })
}

fn judge(jumps: &[f64], tol: f64, opts: &ClassifyOptions) -> (Verdict, Option<f64>) {
    let rounds = jumps.len() - 1;
    let mags: Vec<f64> = jumps.iter().map(|c| c.abs()).collect();
    let last = mags[rounds];
    // A genuine jump survives every resolution; one the fit can remove on
    // most rounds is a resolution artifact.
    let removable = mags.iter().filter(|&&m| m <= tol).count();
    if last <= tol || (rounds > 0 && 2 * removable >= mags.len()) {
        return (Verdict::Smooth, None);
    }
    if rounds == 0 {
        return (Verdict::Inconclusive, None);
    }
    let first = mags.iter().position(|&m| m > tol).unwrap_or(0);
    let beta = (last / mags[first]).log2() / (rounds - first).max(1) as f64;
    let verdict = if beta <= -opts.growth_threshold {
        Verdict::Smooth
    } else if beta >= opts.growth_threshold {
        Verdict::Divergence
    } else {
        let prev = jumps[rounds - 1];
        let same_sign = prev.signum() == jumps[rounds].signum();
        let monotone = mags.windows(2).all(|w| w[1] >= w[0]) || mags.windows(2).all(|w| w[1] <= w[0]);
        let signs_agree = jumps.iter().all(|c| c.signum() == jumps[rounds].signum());
        if same_sign && (jumps[rounds] - prev).abs() < opts.stability * last {
            Verdict::Jump
        } else if monotone && signs_agree {
            Verdict::Kink
        } else {
            Verdict::Inconclusive
        }
    };
    (verdict, Some(beta))
}

fn extrema(grid: &[f64], entropy: &[f64]) -> Vec<Extremum> {
    let n = entropy.len();
    let arg = |better: fn(f64, f64) -> bool| {
        (0..n).fold(0, |best, i| if better(entropy[i], entropy[best]) { i } else { best })
    };
    let mut out = Vec::new();
    for (kind, i) in [
        (ExtremumKind::Maximum, arg(|a, b| a > b)),
        (ExtremumKind::Minimum, arg(|a, b| a < b)),
    ] {
        if i > 0 && i + 1 < n {
            out.push(Extremum {
                kind,
                g: grid[i],
                entropy: entropy[i],
            });
        }
    }
    out
}

/// Classifies the most singular point of `opts.column` inside `window`,
/// re-evaluating `probe` on successively finer nested grids.
pub fn classify_transition(probe: &dyn Probe, window: (f64, f64), opts: &ClassifyOptions) -> Result<TransitionReport> {
    opts.validate()?;
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::domain(format!("degenerate window [{a}, {b}]")));
    }
    let n0 = opts.initial_points;
    let rounds = opts.refinements;
    let stride0 = 1i64 << rounds;
    let h0 = (b - a) / (n0 - 1) as f64;
    let mut ev = Evaluator {
        probe,
        origin: a,
        finest: h0 / stride0 as f64,
        exec: opts.execution,
        cache: BTreeMap::new(),
    };

    let coarse: Vec<i64> = (0..n0 as i64).map(|i| i * stride0).collect();
    let grid0: Vec<f64> = coarse.iter().map(|&i| ev.point(i)).collect();
    let values0 = ev.values(&coarse, opts.column)?;
    let entropy0 = ev.values(&coarse, Column::Entropy)?;

    let mut tolerance = [0.0; MAX_DERIVATIVE + 1];
    for (j, tol) in tolerance.iter_mut().enumerate() {
        let col = if j == 0 {
            values0.clone()
        } else {
            derivative(&values0, h0, j)?
        };
        let scale = col
            .iter()
            .map(|v| v.abs())
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        *tol = opts.abs_tol.max(opts.rel_tol * scale);
    }

    let fourth = |i: usize| {
        (values0[i - 2] - 4.0 * values0[i - 1] + 6.0 * values0[i] - 4.0 * values0[i + 1] + values0[i + 2]).abs()
    };
    let peak = (2..n0 - 2).fold(2, |best, i| if fourth(i) > fourth(best) { i } else { best });
    let candidate = grid0[peak];

    let half_nodes = (opts.local_points / 2) as i64;
    let mut center = candidate;
    let mut history = Vec::with_capacity(rounds + 1);
    for r in 0..=rounds {
        let stride = stride0 >> r;
        let spacing = h0 / (1i64 << r) as f64;
        let last = (n0 as i64 - 1) << r;
        let k = ((center - a) / spacing).round().clamp(0.0, last as f64) as i64;
        let width = (2 * half_nodes).min(last);
        let start = (k - half_nodes).clamp(0, last - width);
        let idx: Vec<i64> = (start..=start + width).map(|k| k * stride).collect();
        let xs: Vec<f64> = idx.iter().map(|&i| ev.point(i)).collect();
        let ys = ev.values(&idx, opts.column)?;
        let fits = (0..=MAX_DERIVATIVE)
            .map(|j| {
                let f = changepoint_fit(&xs, &ys, opts.poly_degree, j)?;
                Ok(OrderFit {
                    order: j,
                    g: f.g,
                    jump: f.jump,
                    left: f.left,
                    right: f.left + f.jump,
                    rms_residual: f.rms,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(f) = fits.iter().find(|f| f.jump.abs() > tolerance[f.order]) {
            center = f.g;
        }
        history.push(Round {
            round: r,
            spacing,
            nodes: xs.len(),
            range: (xs[0], xs[xs.len() - 1]),
            fits,
        });
    }

    let last_round = &history[rounds];
    let mut derivatives = Vec::new();
    let mut found: Option<(usize, Verdict)> = None;
    for (j, &tol) in tolerance.iter().enumerate().take(MAX_DERIVATIVE + 1) {
        let jumps: Vec<f64> = history.iter().map(|r| r.fits[j].jump).collect();
        let (verdict, beta) = judge(&jumps, tol, opts);
        let fit = &last_round.fits[j];
        derivatives.push(DerivativeEvidence {
            order: j,
            verdict,
            tolerance: tol,
            growth_per_halving: beta,
            left_limit: fit.left,
            right_limit: fit.right,
            jump: fit.jump,
        });
        if verdict != Verdict::Smooth {
            found = Some((j, verdict));
            break;
        }
    }

    let g_c = found.map(|(j, _)| last_round.fits[j].g);
    let finite_size = probe.source() == Source::Ed;
    let (status, order_k, singularity) = match found {
        None => (Status::NoneDetected, None, None),
        Some(_) if finite_size => (Status::FiniteSizeEvidence, None, None),
        Some((_, Verdict::Inconclusive)) => (Status::Inconclusive, None, None),
        Some((j, v)) => (Status::Detected, Some(j + 1), v.singularity()),
    };

    let mut flags = Flags {
        equipartition_near_gc: false,
        vanishing_occupation: Vec::new(),
        degenerate_ground_state: false,
    };
    let probe_point = g_c.unwrap_or(center);
    let at = probe.evaluate(probe_point).map_err(|e| Error::Sweep {
        index: 0,
        g: probe_point,
        source: Box::new(e),
    })?;
    if let Some(occ) = at.occupations {
        flags.equipartition_near_gc = equipartition_check(&occ, opts.equipartition_tol);
        flags.vanishing_occupation = vanishing_occupations(&occ, opts.vanishing_tol);
    }
    let (lo, hi) = last_round.range;
    flags.degenerate_ground_state = at.flags.degenerate
        || ev
            .cache
            .iter()
            .any(|(&i, r)| r.flags.degenerate && (lo..=hi).contains(&ev.point(i)));

    let mut exponent = None;
    let mut exponent_refusal = None;
    if let (Some(Singularity::Divergence), Some((j, _)), Some(gc)) = (singularity, found, g_c) {
        let all: Vec<i64> = (0..=((n0 as i64 - 1) << rounds)).collect();
        let xs: Vec<f64> = all.iter().map(|&i| ev.point(i)).collect();
        let ys = ev.values(&all, opts.column)?;
        let col = if j == 0 { ys } else { derivative(&ys, ev.finest, j)? };
        let fits: Vec<Result<ExponentFit>> = [Side::Left, Side::Right]
            .into_iter()
            .map(|side| fit_exponent(&xs, &col, gc, &FitWindow::new(side)))
            .collect();
        let best = fits
            .iter()
            .filter_map(|f| f.as_ref().ok())
            .max_by(|p, q| p.r_squared.total_cmp(&q.r_squared));
        match best {
            Some(fit) => {
                exponent = Some(ExponentReport {
                    fit: *fit,
                    derivative_order: j,
                })
            }
            None => {
                exponent_refusal = fits.into_iter().find_map(|f| f.err()).map(|e| e.to_string());
            }
        }
    }

    Ok(TransitionReport {
        status,
        source: probe.source(),
        driver: probe.driver(),
        column: opts.column,
        window,
        g_c,
        resolution: h0 / stride0 as f64,
        order_k,
        singularity,
        exponent,
        exponent_refusal,
        flags,
        entropy_extrema: extrema(&grid0, &entropy0),
        evidence: Evidence {
            candidate,
            derivatives,
            rounds: history,
            candidate_order: found
                .filter(|(_, v)| finite_size && v.singularity().is_some())
                .map(|(j, _)| j + 1),
            candidate_singularity: found.filter(|_| finite_size).and_then(|(_, v)| v.singularity()),
        },
        evaluations: ev.cache.len() + 1,
    })
}
