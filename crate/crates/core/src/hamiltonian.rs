//! Lattice Hamiltonians and their sparse matrices within a particle sector.
//!
//! Every model has the form
//!
//! ```text
//! H = sum_{l != m, s} t_lm c+_{l s} c_{m s} + u sum_l n_{l up} n_{l dn}
//!     - mu sum_{l s} n_{l s} - h sum_l (n_{l up} - n_{l dn}) / 2
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::fock::{FockState, Sector, Spin};
use crate::{Error, Execution, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Hopping matrix plus on-site interaction, chemical potential and field.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    hopping: DMatrix<Complex64>,
    pub u: f64,
    pub mu: f64,
    pub h: f64,
    boundary: Boundary,
}

impl ModelSpec {
    /// Validates that `hopping` is square, Hermitian and zero on the diagonal.
    pub fn new(hopping: DMatrix<Complex64>, u: f64, mu: f64, h: f64) -> Result<Self> {
        let l = hopping.nrows();
        if l != hopping.ncols() || l == 0 || l > crate::fock::MAX_SITES {
            return Err(Error::domain(format!(
                "hopping matrix must be square with 1..=16 sites, got {}x{}",
                hopping.nrows(),
                hopping.ncols()
            )));
        }
        let scale = hopping.iter().map(|t| t.norm()).fold(0.0, f64::max);
        let tol = 1e-12 * scale.max(1.0);
        for i in 0..l {
            if hopping[(i, i)].norm() > 0.0 {
                return Err(Error::domain(format!("nonzero diagonal hopping at site {i}")));
            }
            for j in i + 1..l {
                if (hopping[(j, i)] - hopping[(i, j)].conj()).norm() > tol {
                    return Err(Error::domain(format!("hopping is not Hermitian at ({i}, {j})")));
                }
            }
        }
        Ok(ModelSpec {
            hopping,
            u,
            mu,
            h,
            boundary: Boundary::Open,
        })
    }

    pub fn sites(&self) -> usize {
        self.hopping.nrows()
    }

    pub fn hopping(&self) -> &DMatrix<Complex64> {
        &self.hopping
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Diagonal part of `H` for one basis state.
    pub fn diagonal(&self, state: FockState) -> f64 {
        let up = state.count(Spin::Up) as f64;
        let down = state.count(Spin::Down) as f64;
        self.u * state.doublons() as f64 - self.mu * (up + down) - 0.5 * self.h * (up - down)
    }
}

/// Nearest-neighbour chain with hopping amplitude -1.
pub fn hubbard_chain(sites: usize, u: f64, mu: f64, h: f64, boundary: Boundary) -> Result<ModelSpec> {
    if sites < 2 {
        return Err(Error::domain(format!("Hubbard chain needs L >= 2, got {sites}")));
    }
    let mut t = DMatrix::from_element(sites, sites, Complex64::new(0.0, 0.0));
    let bonds = match boundary {
        Boundary::Open => sites - 1,
        Boundary::Periodic => sites,
    };
    // Summing bonds literally: for L = 2 periodic the wrap bond doubles the single link.
    for i in 0..bonds {
        let j = (i + 1) % sites;
        t[(i, j)] -= Complex64::new(1.0, 0.0);
        t[(j, i)] -= Complex64::new(1.0, 0.0);
    }
    let mut spec = ModelSpec::new(t, u, mu, h)?;
    spec.boundary = boundary;
    Ok(spec)
}

/// Long-range hopping `t_lm = i (-1)^(l-m) / (l-m)` on an open chain.
pub fn gr_chain(sites: usize, u: f64, mu: f64, h: f64) -> Result<ModelSpec> {
    if sites < 2 {
        return Err(Error::domain(format!("long-range chain needs L >= 2, got {sites}")));
    }
    let t = DMatrix::from_fn(sites, sites, |l, m| {
        if l == m {
            return Complex64::new(0.0, 0.0);
        }
        let d = l as i64 - m as i64;
        let parity = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        Complex64::new(0.0, parity / d as f64)
    });
    ModelSpec::new(t, u, mu, h)
}

/// Hermitian matrix stored as its upper triangle (`row <= col`).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    /// Entries with `row > col` are rejected; duplicates are summed on use.
    pub fn from_upper(dim: usize, entries: Vec<(usize, usize, Complex64)>) -> Result<Self> {
        for &(r, c, v) in &entries {
            if r > c || c >= dim {
                return Err(Error::domain(format!(
                    "entry ({r}, {c}) not in upper triangle of {dim}"
                )));
            }
            if r == c && v.im != 0.0 {
                return Err(Error::domain(format!("diagonal entry {r} is not real")));
            }
        }
        Ok(SparseHermitian { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Complex64::new(0.0, 0.0));
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
            if r != c {
                m[(c, r)] += v.conj();
            }
        }
        m
    }

    /// Full row-compressed form, used for repeated products.
    pub fn to_csr(&self) -> CsrMatrix {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); self.dim];
        for &(r, c, v) in &self.entries {
            rows[r].push((c, v));
            if r != c {
                rows[c].push((r, v.conj()));
            }
        }
        let mut row_ptr = Vec::with_capacity(self.dim + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for (c, v) in row {
                if last == Some(c) {
                    *values.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix {
            dim: self.dim,
            row_ptr,
            cols,
            values,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<Complex64>,
}

impl CsrMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = A x`. Each row is summed sequentially, so the result does not
    /// depend on `exec`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64], exec: Execution) {
        debug_assert_eq!(x.len(), self.dim);
        debug_assert_eq!(y.len(), self.dim);
        exec.fill(y, |r| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.cols[k]];
            }
            acc
        });
    }
}

/// Builds `<s'|H|s>` over the sector with signed fermionic operators.
pub fn assemble(spec: &ModelSpec, sector: &Sector) -> Result<SparseHermitian> {
    let l = spec.sites();
    if sector.sites() != l {
        return Err(Error::domain(format!(
            "sector built for {} sites, model has {l}",
            sector.sites()
        )));
    }
    let hops: Vec<(usize, usize, Complex64)> = (0..l)
        .flat_map(|a| (0..l).map(move |b| (a, b)))
        .filter(|&(a, b)| a != b)
        .map(|(a, b)| (a, b, spec.hopping[(a, b)]))
        .filter(|&(_, _, t)| t.norm() != 0.0)
        .collect();

    let mut entries = Vec::new();
    for (col, &state) in sector.states().iter().enumerate() {
        entries.push((col, col, Complex64::new(spec.diagonal(state), 0.0)));
        for &(to, from, t) in &hops {
            for spin in Spin::BOTH {
                if let Some((target, sign)) = state.hop(to, from, spin) {
                    let row = sector
                        .index_of(target)
                        .expect("hopping conserves both particle numbers");
                    if row < col {
                        entries.push((row, col, t * sign));
                    }
                }
            }
        }
    }
    SparseHermitian::from_upper(sector.dim(), entries)
}
