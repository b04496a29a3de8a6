//! Critical chemical potential of the half-filled nearest-neighbour chain,
//! `mu_c(u) = 2 - 4 int_0^inf J1(w) / (w (1 + exp(w u / 2))) dw`.

use std::f64::consts::PI;

use super::bessel::{bessel_j1_over_x, bessel_j1_zeros};
use super::quadrature::{integrate, PanelScheme, QuadratureSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CriticalPotential {
    pub value: f64,
    /// Quadrature error plus tail bound, in units of the chemical potential.
    pub error: f64,
    pub cutoff: f64,
    pub tail_bound: f64,
    pub evaluations: usize,
}

/// The integrand; equals 1/4 at the origin.
pub fn integrand(omega: f64, u: f64) -> f64 {
    let t = 0.5 * omega * u;
    let fermi = if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    };
    bessel_j1_over_x(omega) * fermi
}

/// Bound on the integral beyond `cutoff` from the envelope
/// `|J1(w)| <= sqrt(2 / (pi w))`.
pub fn tail_bound(cutoff: f64, u: f64) -> f64 {
    (2.0 / (PI * cutoff)).sqrt() / cutoff * (2.0 / u) * (-0.5 * cutoff * u).exp()
}

pub fn lieb_wu_mu_c(u: f64, spec: &QuadratureSpec) -> Result<CriticalPotential> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("mu_c needs u > 0, got {u}")));
    }
    spec.validate()?;
    // Integral tolerance, leaving a tenth of the budget for the tail.
    let target = 0.25 * spec.abs_tol;
    let mut cutoff = spec.cutoff.unwrap_or_else(|| (80.0 / u).max(40.0));
    let mut tail = tail_bound(cutoff, u);
    let mut doublings = 0;
    while tail >= 0.1 * target {
        if doublings > 40 {
            return Err(Error::Quadrature {
                achieved: 4.0 * tail,
                requested: spec.abs_tol,
            });
        }
        cutoff *= 2.0;
        tail = tail_bound(cutoff, u);
        doublings += 1;
    }

    let breaks = breakpoints(cutoff, spec.scheme);
    let est = integrate(
        |w| integrand(w, u),
        &breaks,
        0.9 * target,
        0.25 * spec.rel_tol,
        spec.max_subdivisions,
    )?;
    Ok(CriticalPotential {
        value: 2.0 - 4.0 * est.value,
        error: 4.0 * (est.error + tail),
        cutoff,
        tail_bound: tail,
        evaluations: est.evaluations,
    })
}

fn breakpoints(cutoff: f64, scheme: PanelScheme) -> Vec<f64> {
    let mut pts = vec![0.0];
    let width = match scheme {
        PanelScheme::BesselZeros { count } => {
            pts.extend(bessel_j1_zeros(count).into_iter().take_while(|&z| z < cutoff));
            PI
        }
        PanelScheme::Uniform { width } => width,
    };
    let mut x = *pts.last().unwrap();
    while x + width < cutoff {
        x += width;
        pts.push(x);
    }
    if cutoff - x > 1e-9 * cutoff {
        pts.push(cutoff);
    }
    pts
}
