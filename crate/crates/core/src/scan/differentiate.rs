//! Finite-difference derivatives on uniform grids.
//!
//! Interior points use centered stencils (3 points for orders 1 and 2, 5 for
//! order 3). Near the ends the stencil is shifted to `order + 2` one-sided
//! points. Every stencil is second-order accurate.

use crate::{Error, Result};

/// Weights `c_k` such that `sum_k c_k f(x_k)` approximates `f^(order)(x0)`.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    // c[j][m]: weight of node j for derivative m, built up node by node.
    let mut c = vec![vec![0.0; order + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

fn widths(order: usize) -> (usize, usize) {
    let centered = 2 * order.div_ceil(2) + 1;
    (centered, centered.max(order + 2))
}

/// Shortest grid on which [`derivative`] is defined.
pub fn min_points(order: usize) -> usize {
    widths(order).1
}

/// `d^order f / dg^order` at every node of a uniform grid with spacing `step`.
pub fn derivative(values: &[f64], step: f64, order: usize) -> Result<Vec<f64>> {
    if !(1..=3).contains(&order) {
        return Err(Error::domain(format!("derivative order {order} not in 1..=3")));
    }
    if !(step > 0.0) {
        return Err(Error::domain(format!("grid step {step} must be positive")));
    }
    let (centered, edge) = widths(order);
    let n = values.len();
    if n < edge {
        return Err(Error::domain(format!(
            "order-{order} stencil needs {edge} points, grid has {n}"
        )));
    }
    let half = centered / 2;
    let scale = step.powi(order as i32);
    Ok((0..n)
        .map(|i| {
            let (start, len) = if i >= half && i + half < n {
                (i - half, centered)
            } else if i < half {
                (0, edge)
            } else {
                (n - edge, edge)
            };
            let xs: Vec<f64> = (start..start + len).map(|k| k as f64 - i as f64).collect();
            let w = fornberg_weights(0.0, &xs, order);
            w.iter()
                .zip(&values[start..start + len])
                .map(|(w, f)| w * f)
                .sum::<f64>()
                / scale
        })
        .collect())
}

/// Richardson-extrapolated derivative at the even nodes of a grid with
/// spacing `step`: `(4 D_h - D_2h) / 3`. The grid length must be odd so the
/// even nodes form a grid of spacing `2 step`.
pub fn derivative_richardson(values: &[f64], step: f64, order: usize) -> Result<Vec<f64>> {
    if values.len().is_multiple_of(2) {
        return Err(Error::domain("Richardson refinement needs an odd number of points"));
    }
    let fine = derivative(values, step, order)?;
    let coarse_values: Vec<f64> = values.iter().step_by(2).copied().collect();
    let coarse = derivative(&coarse_values, 2.0 * step, order)?;
    Ok(coarse
        .iter()
        .zip(fine.iter().step_by(2))
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect())
}
