//! Single-site occupation probabilities and their entropy.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `w0 + w_up + w_down + w2 = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Ground-state probabilities that one site is empty, singly occupied by an
/// up or down fermion, or doubly occupied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationSet {
    pub w0: f64,
    pub w_up: f64,
    pub w_down: f64,
    pub w2: f64,
}

impl OccupationSet {
    pub const EQUIPARTITION: OccupationSet = OccupationSet {
        w0: 0.25,
        w_up: 0.25,
        w_down: 0.25,
        w2: 0.25,
    };

    pub fn from_probabilities(w0: f64, w_up: f64, w_down: f64, w2: f64) -> Result<Self> {
        let occ = OccupationSet { w0, w_up, w_down, w2 };
        occ.validate()?;
        Ok(occ)
    }

    /// Builds the set from filling `n`, magnetization per site `m` and double
    /// occupancy `w2`:
    /// `w_up = n/2 + m - w2`, `w_down = n/2 - m - w2`, `w0 = 1 - n + w2`.
    pub fn from_moments(n: f64, m: f64, w2: f64) -> Result<Self> {
        Self::from_probabilities(1.0 - n + w2, 0.5 * n + m - w2, 0.5 * n - m - w2, w2)
    }

    fn validate(&self) -> Result<()> {
        let p = self.probabilities();
        if p.iter()
            .any(|w| !w.is_finite() || *w < -NORMALIZATION_TOL || *w > 1.0 + NORMALIZATION_TOL)
        {
            return Err(Error::domain(format!("occupation probabilities out of [0, 1]: {p:?}")));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::domain(format!("occupation probabilities sum to {sum}")));
        }
        Ok(())
    }

    /// `(w0, w_up, w_down, w2)`.
    pub fn probabilities(&self) -> [f64; 4] {
        [self.w0, self.w_up, self.w_down, self.w2]
    }

    /// Average occupation of a site.
    pub fn n(&self) -> f64 {
        self.w_up + self.w_down + 2.0 * self.w2
    }

    /// Magnetization per site, `(<n_up> - <n_down>) / 2`.
    pub fn m(&self) -> f64 {
        0.5 * (self.w_up - self.w_down)
    }
}

/// Diagonal of the reduced single-site density matrix in the
/// `(0, up, down, updown)` basis. Off-diagonal elements vanish whenever the
/// ground state has fixed particle number and total spin projection.
pub fn single_site_density(occ: &OccupationSet) -> [f64; 4] {
    occ.probabilities()
}

/// Von Neumann entropy of one site in bits, with `0 log 0 = 0`.
pub fn entropy_from_occupations(occ: &OccupationSet) -> f64 {
    // `+ 0.0` turns the -0 of a pure state into 0.
    occ.probabilities().iter().map(|&w| -xlog2x(w)).sum::<f64>() + 0.0
}

fn xlog2x(w: f64) -> f64 {
    if w <= 0.0 {
        0.0
    } else {
        w * w.log2()
    }
}
