//! Ground states of sector Hamiltonians and single-site observables.
//!
//! Sectors up to [`SolverOptions::dense_limit`] states are diagonalized
//! densely. Larger ones use Lanczos with full reorthogonalization, restarted
//! from the current Ritz vector when the Krylov basis grows too large.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::entropy::OccupationSet;
use crate::fock::{LocalState, Sector};
use crate::hamiltonian::{CsrMatrix, SparseHermitian};
use crate::{Error, Execution, Result};

pub use crate::entropy::{entropy_from_occupations as entropy_of_density, single_site_density};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub dense_limit: usize,
    /// Required `||Hv - Ev|| / max(1, |E|)`.
    pub residual_tol: f64,
    /// Levels closer than `degeneracy_tol * max(1, |E|)` count as degenerate.
    pub degeneracy_tol: f64,
    pub seed: u64,
    /// Krylov vectors kept before an explicit restart.
    pub max_basis: usize,
    pub execution: Execution,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            dense_limit: 512,
            residual_tol: 1e-10,
            degeneracy_tol: 1e-8,
            seed: 0x5eed_0fe5,
            max_basis: 160,
            execution: Execution::Sequential,
        }
    }
}

impl SolverOptions {
    /// Iteration cap of the Krylov solver, `5 sqrt(dim) + 200`.
    pub fn iteration_cap(dim: usize) -> usize {
        5 * (dim as f64).sqrt().ceil() as usize + 200
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct GroundState<'a> {
    pub energy: f64,
    /// Unit-norm amplitudes over `sector.states()`.
    pub vector: Vec<Complex64>,
    pub sector: &'a Sector,
    /// Orthonormal basis of the lowest level, `vector` first. Observables
    /// are averaged over it.
    pub manifold: Vec<Vec<Complex64>>,
    /// `E1 - E0` with `E1` the second eigenvalue counted with multiplicity.
    pub gap: Option<f64>,
    pub degenerate: bool,
    pub residual: f64,
    pub method: Method,
}

pub fn ground_state<'a>(h: &SparseHermitian, sector: &'a Sector, opts: &SolverOptions) -> Result<GroundState<'a>> {
    let dim = h.dim();
    if dim != sector.dim() || dim == 0 {
        return Err(Error::domain(format!(
            "matrix dimension {dim} does not match sector dimension {}",
            sector.dim()
        )));
    }
    let (energy, manifold, second, residual, method) = if dim <= opts.dense_limit {
        dense_lowest(h, opts)
    } else {
        let a = h.to_csr();
        let (e0, v0, r0) = lanczos_lowest(&a, &[], opts)?;
        let close = |e: f64| e - e0 <= opts.degeneracy_tol * e0.abs().max(1.0);
        let mut manifold = vec![v0];
        let mut second = None;
        while manifold.len() < dim.min(MAX_MULTIPLICITY) {
            match lanczos_lowest(&a, &manifold, opts) {
                Ok((e1, v1, _)) => {
                    second.get_or_insert(e1);
                    if !close(e1) {
                        break;
                    }
                    manifold.push(v1);
                }
                Err(_) => break,
            }
        }
        (e0, manifold, second, r0, Method::Lanczos)
    };
    let gap = second.map(|e1| e1 - energy);
    let degenerate = manifold.len() > 1;
    Ok(GroundState {
        energy,
        vector: manifold[0].clone(),
        sector,
        manifold,
        gap,
        degenerate,
        residual,
        method,
    })
}

/// Upper bound on the ground-level multiplicity resolved by deflation.
pub const MAX_MULTIPLICITY: usize = 32;

fn dense_lowest(h: &SparseHermitian, opts: &SolverOptions) -> (f64, Vec<Vec<Complex64>>, Option<f64>, f64, Method) {
    let m = h.to_dense();
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energy = eig.eigenvalues[order[0]];
    let second = order.get(1).map(|&i| eig.eigenvalues[i]);
    let limit = opts.degeneracy_tol * energy.abs().max(1.0);
    let mut residual = 0.0f64;
    let manifold: Vec<Vec<Complex64>> = order
        .iter()
        .take_while(|&&i| eig.eigenvalues[i] - energy <= limit)
        .take(MAX_MULTIPLICITY)
        .map(|&i| {
            let mut v: Vec<Complex64> = eig.eigenvectors.column(i).iter().copied().collect();
            normalize(&mut v);
            fix_phase(&mut v);
            let hv = &m * nalgebra::DVector::from_column_slice(&v);
            let r = hv
                .iter()
                .zip(&v)
                .map(|(a, b)| (a - b * eig.eigenvalues[i]).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if i == order[0] {
                residual = r;
            }
            v
        })
        .collect();
    (energy, manifold, second, residual, Method::Dense)
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) -> f64 {
    let n = norm(a);
    if n > 0.0 {
        a.iter_mut().for_each(|z| *z /= n);
    }
    n
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

/// Rotates the global phase so the largest amplitude is real and positive.
fn fix_phase(v: &mut [Complex64]) {
    if let Some(big) = v.iter().copied().max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr())) {
        if big.norm() > 0.0 {
            let phase = big.conj() / big.norm();
            v.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

fn project_out(w: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let c = dot(q, w);
        axpy(-c, q, w);
    }
}

/// Lowest eigenpair of `a` on the orthogonal complement of `locked`.
fn lanczos_lowest(
    a: &CsrMatrix,
    locked: &[Vec<Complex64>],
    opts: &SolverOptions,
) -> Result<(f64, Vec<Complex64>, f64)> {
    let dim = a.dim();
    let cap = SolverOptions::iteration_cap(dim);
    let krylov_limit = dim.saturating_sub(locked.len()).max(1);
    let max_basis = opts.max_basis.clamp(8, krylov_limit.max(8)).min(krylov_limit);
    let tol = opts.residual_tol;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (locked.len() as u64).wrapping_mul(0x9e37_79b9));
    let mut start: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    project_out(&mut start, locked);
    project_out(&mut start, locked);
    if normalize(&mut start) == 0.0 {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }

    let mut iterations = 0;
    let mut best = f64::INFINITY;
    let mut w = vec![Complex64::new(0.0, 0.0); dim];
    let mut ax = vec![Complex64::new(0.0, 0.0); dim];

    while iterations < cap {
        let mut basis: Vec<Vec<Complex64>> = vec![start.clone()];
        let mut alphas: Vec<f64> = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        loop {
            let j = basis.len() - 1;
            a.apply(&basis[j], &mut w, opts.execution);
            iterations += 1;
            let alpha = dot(&basis[j], &w).re;
            axpy(Complex64::new(-alpha, 0.0), &basis[j], &mut w);
            if j > 0 {
                axpy(Complex64::new(-betas[j - 1], 0.0), &basis[j - 1], &mut w);
            }
            for _ in 0..2 {
                project_out(&mut w, locked);
                project_out(&mut w, &basis);
            }
            alphas.push(alpha);
            let beta = norm(&w);
            let exhausted = beta <= 1e-12 * alpha.abs().max(1.0) || basis.len() >= krylov_limit;
            let full = basis.len() >= max_basis || iterations >= cap;

            if exhausted || full || basis.len().is_multiple_of(5) {
                let (theta, y) = tridiagonal_lowest(&alphas, &betas);
                let estimate = beta * y[y.len() - 1].abs();
                if exhausted || full || estimate <= tol * theta.abs().max(1.0) {
                    let mut x = vec![Complex64::new(0.0, 0.0); dim];
                    for (yi, q) in y.iter().zip(&basis) {
                        axpy(Complex64::new(*yi, 0.0), q, &mut x);
                    }
                    project_out(&mut x, locked);
                    normalize(&mut x);
                    a.apply(&x, &mut ax, opts.execution);
                    let rayleigh = dot(&x, &ax).re;
                    let residual = ax
                        .iter()
                        .zip(&x)
                        .map(|(p, q)| (p - q * rayleigh).norm_sqr())
                        .sum::<f64>()
                        .sqrt();
                    best = best.min(residual);
                    if residual <= tol * rayleigh.abs().max(1.0) {
                        fix_phase(&mut x);
                        return Ok((rayleigh, x, residual));
                    }
                    if exhausted || full {
                        start = x;
                        break;
                    }
                }
            }
            betas.push(beta);
            let mut next = w.clone();
            next.iter_mut().for_each(|z| *z /= beta);
            basis.push(next);
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual: best,
    })
}

fn tridiagonal_lowest(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let t = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j || j + 1 == i {
            betas[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(t);
    let (idx, theta) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("nonempty tridiagonal");
    (theta, eig.eigenvectors.column(idx).iter().copied().collect())
}

/// Probabilities of the four local states of `site`, averaged uniformly
/// over the ground manifold (the zero-temperature limit of the thermal state).
pub fn measure_occupations(gs: &GroundState<'_>, site: usize) -> Result<OccupationSet> {
    let sector = gs.sector;
    if site >= sector.sites() {
        return Err(Error::domain(format!(
            "site {site} outside chain of {}",
            sector.sites()
        )));
    }
    let mut w = [0.0f64; 4];
    for v in &gs.manifold {
        for (state, amp) in sector.states().iter().zip(v) {
            w[state.local(site).index()] += amp.norm_sqr();
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    OccupationSet::from_probabilities(
        w[LocalState::Empty.index()],
        w[LocalState::Up.index()],
        w[LocalState::Down.index()],
        w[LocalState::Double.index()],
    )
}
