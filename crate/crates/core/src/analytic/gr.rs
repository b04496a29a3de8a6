//! Closed-form ground state of the chain with hopping `t_lm = i (-1)^(l-m) / (l-m)`
//! at zero magnetization.
//!
//! The energy density is
//!
//! ```text
//! e0(u, n) = (u n - uc (1 - n) n) / 4
//!          - [(u + uc)^3 - ((u + uc)^2 - 4 u uc n)^(3/2)] / (24 u uc)
//! ```
//!
//! with `uc = 2 pi`. Writing `A = u + uc` and `B = sqrt(A^2 - 4 u uc n)`, the
//! bracket divided by `24 u uc` equals `n (A^2 + A B + B^2) / (6 (A + B))`,
//! which has no removable singularity at `u = 0`. At `n = 1`, `B = |u - uc|`
//! and the double occupancy `w2 = de0/du` has two branches that join with a
//! continuous first derivative but a jump in the second one.

use std::f64::consts::{LN_2, PI};

use crate::entropy::OccupationSet;
use crate::{Error, Result};

/// Critical interaction of the half-filled chain.
pub const U_C: f64 = 2.0 * PI;

/// Branch of the half-filled solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `u <= uc`
    Metal,
    /// `u >= uc`
    Insulator,
}

impl Branch {
    pub fn of(u: f64) -> Branch {
        if u <= U_C {
            Branch::Metal
        } else {
            Branch::Insulator
        }
    }
}

fn check(u: f64, n: f64) -> Result<()> {
    if !(u >= 0.0) || !u.is_finite() {
        return Err(Error::domain(format!("interaction u = {u} must be finite and >= 0")));
    }
    if !(0.0..=1.0).contains(&n) {
        return Err(Error::domain(format!("filling n = {n} outside [0, 1]")));
    }
    Ok(())
}

/// `B^2 = (u - uc)^2 + 4 u uc (1 - n)`, free of cancellation near `n = 1`, `u = uc`.
fn b_squared(u: f64, n: f64) -> f64 {
    (u - U_C).powi(2) + 4.0 * u * U_C * (1.0 - n)
}

/// Ground-state energy per site.
pub fn gr_e0(u: f64, n: f64) -> Result<f64> {
    check(u, n)?;
    if n == 1.0 {
        // Branch forms; the general expression cancels badly for u >> uc.
        return Ok(match Branch::of(u) {
            Branch::Metal => u / 4.0 - U_C / 4.0 - u * u / (12.0 * U_C),
            Branch::Insulator => -U_C * U_C / (12.0 * u),
        });
    }
    let b2 = b_squared(u, n);
    assert!(b2 >= 0.0, "negative radicand {b2}");
    let a = u + U_C;
    let b = b2.sqrt();
    Ok((u * n - U_C * (1.0 - n) * n) / 4.0 - n * (a * a + a * b + b * b) / (6.0 * (a + b)))
}

/// Half-filled double occupancy on a chosen branch, with its first two
/// derivatives in `u`.
pub fn gr_w2_branch(u: f64, branch: Branch) -> (f64, f64, f64) {
    match branch {
        Branch::Metal => (0.25 - u / (6.0 * U_C), -1.0 / (6.0 * U_C), 0.0),
        Branch::Insulator => (
            U_C * U_C / (12.0 * u * u),
            -U_C * U_C / (6.0 * u.powi(3)),
            U_C * U_C / (2.0 * u.powi(4)),
        ),
    }
}

/// Half-filled double occupancy `w2 = de0/du`.
pub fn gr_w2(u: f64) -> Result<f64> {
    check(u, 1.0)?;
    Ok(gr_w2_branch(u, Branch::of(u)).0)
}

/// `de0/du` at fixed filling.
pub fn gr_w2_at(u: f64, n: f64) -> Result<f64> {
    check(u, n)?;
    if n == 1.0 {
        return gr_w2(u);
    }
    let a = u + U_C;
    let b = b_squared(u, n).sqrt();
    let db = (a - 2.0 * U_C * n) / b;
    let num = a * a + a * b + b * b;
    let dnum = 2.0 * a + b + a * db + 2.0 * b * db;
    let den = 6.0 * (a + b);
    let dden = 6.0 * (1.0 + db);
    let dg = (dnum * den - num * dden) / (den * den);
    Ok(n / 4.0 - n * dg)
}

/// Occupation set at filling `n` and zero magnetization.
pub fn gr_occupations(u: f64, n: f64) -> Result<OccupationSet> {
    OccupationSet::from_moments(n, 0.0, gr_w2_at(u, n)?)
}

fn entropy_half_filled(w2: f64) -> f64 {
    let xlog = |x: f64| if x <= 0.0 { 0.0 } else { x * x.log2() };
    let single = 0.5 - w2;
    -(1.0 - 2.0 * w2) * if single <= 0.0 { 0.0 } else { single.log2() } - 2.0 * xlog(w2)
}

/// Single-site entropy (bits) at half filling:
/// `-(1 - 2 w2) log2(1/2 - w2) - 2 w2 log2(w2)`.
pub fn gr_entropy(u: f64) -> Result<f64> {
    Ok(entropy_half_filled(gr_w2(u)?))
}

/// Entropy and its first two `u`-derivatives on one branch, by the chain rule
/// through `w2`.
pub fn gr_entropy_derivatives(u: f64, branch: Branch) -> (f64, f64, f64) {
    let (w, dw, d2w) = gr_w2_branch(u, branch);
    let de_dw = 2.0 * ((0.5 - w) / w).log2();
    let d2e_dw2 = -2.0 / LN_2 * (1.0 / (0.5 - w) + 1.0 / w);
    (entropy_half_filled(w), de_dw * dw, d2e_dw2 * dw * dw + de_dw * d2w)
}

/// Chemical potential `mu(n) = de0/dn = (u - uc + 2 uc n)/4 - B/4`.
pub fn gr_mu_of_n(u: f64, n: f64) -> Result<f64> {
    check(u, n)?;
    Ok((u - U_C + 2.0 * U_C * n) / 4.0 - b_squared(u, n).sqrt() / 4.0)
}

/// `dn/dmu = 1 / (uc/2 + u uc / (2 B))`.
pub fn gr_charge_susceptibility(u: f64, n: f64) -> Result<f64> {
    check(u, n)?;
    let b = b_squared(u, n).sqrt();
    Ok(1.0 / (U_C / 2.0 + u * U_C / (2.0 * b)))
}

/// Which end of `[0, 1]` a chemical potential outside the metallic window
/// was clamped to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Saturation {
    Empty,
    HalfFilled,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Filling {
    pub n: f64,
    pub saturation: Option<Saturation>,
}

/// Inverts the monotone `mu(n)` on `[0, 1]`.
pub fn gr_n_of_mu(u: f64, mu: f64) -> Result<Filling> {
    check(u, 0.5)?;
    if !mu.is_finite() {
        return Err(Error::domain(format!("chemical potential {mu} is not finite")));
    }
    let lo_mu = gr_mu_of_n(u, 0.0)?;
    let hi_mu = gr_mu_of_n(u, 1.0)?;
    if mu <= lo_mu {
        return Ok(Filling {
            n: 0.0,
            saturation: Some(Saturation::Empty),
        });
    }
    if mu >= hi_mu {
        return Ok(Filling {
            n: 1.0,
            saturation: Some(Saturation::HalfFilled),
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gr_mu_of_n(u, mid)? < mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // One Newton step from the bracket midpoint smooths bisection granularity.
    let mut n = 0.5 * (lo + hi);
    let step = (gr_mu_of_n(u, n)? - mu) * gr_charge_susceptibility(u, n)?;
    if (n - step) >= lo && (n - step) <= hi {
        n -= step;
    }
    Ok(Filling { n, saturation: None })
}
