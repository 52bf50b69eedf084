//! Lowest eigenpair of a projected Hamiltonian.
//!
//! Small problems use a dense symmetric eigendecomposition. Larger ones use
//! thick-restart Lanczos: the Krylov basis is fully reorthogonalized (two
//! Gram-Schmidt passes) and the projected matrix is formed explicitly, so after
//! a restart the kept Ritz vectors and the residual direction simply continue
//! as an arrowhead matrix.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::projected::ProjectedHamiltonian;

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 256;

/// Relative residual target, `||Hv - Ev|| <= tol * max(1, |E|)`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Spectral gaps below this mark a ground state as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    /// Unit norm; the first component above `1e-10` in magnitude is positive.
    pub vector: Vec<f64>,
    /// `E_1 - E_0` when a second eigenvalue is available.
    pub gap: Option<f64>,
    pub residual: f64,
    pub solver: SolverKind,
    /// Matrix-vector products (Lanczos) or 0 (dense).
    pub matvecs: usize,
}

impl GroundState {
    pub fn is_degenerate(&self) -> bool {
        self.gap.is_some_and(|g| g < DEGENERACY_GAP)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    /// Basis size at which the iteration restarts.
    pub max_basis: usize,
    /// Ritz vectors kept across a restart.
    pub keep: usize,
    pub max_restarts: usize,
    pub tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            max_basis: 96,
            keep: 24,
            max_restarts: 2000,
            tol: RESIDUAL_TOL,
        }
    }
}

/// Dense solver up to [`DENSE_LIMIT`], Lanczos above.
pub fn ground_state(hp: &ProjectedHamiltonian) -> Result<GroundState> {
    if hp.dim() <= DENSE_LIMIT {
        dense_ground_state(hp)
    } else {
        lanczos_ground_state(hp, &LanczosOptions::default(), None)
    }
}

pub fn dense_ground_state(hp: &ProjectedHamiltonian) -> Result<GroundState> {
    let n = hp.dim();
    if n == 0 {
        return Err(Error::EmptySubspace("no basis states".into()));
    }
    if n == 1 {
        return Ok(GroundState {
            energy: hp.diagonal()[0],
            vector: vec![1.0],
            gap: None,
            residual: 0.0,
            solver: SolverKind::Dense,
            matvecs: 0,
        });
    }
    let eig = SymmetricEigen::new(hp.to_dense());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energy = eig.eigenvalues[order[0]];
    let gap = Some(eig.eigenvalues[order[1]] - energy);
    let mut vector: Vec<f64> = eig.eigenvectors.column(order[0]).iter().copied().collect();
    normalize_sign(&mut vector);
    let residual = residual_norm(hp, energy, &vector);
    Ok(GroundState {
        energy,
        vector,
        gap,
        residual,
        solver: SolverKind::Dense,
        matvecs: 0,
    })
}

/// Thick-restart Lanczos for the lowest eigenpair. `start` seeds the iteration
/// (e.g. the solution at a neighboring parameter); otherwise a fixed
/// pseudo-random vector is used so results are reproducible.
pub fn lanczos_ground_state(
    hp: &ProjectedHamiltonian,
    opts: &LanczosOptions,
    start: Option<&[f64]>,
) -> Result<GroundState> {
    let n = hp.dim();
    if n == 0 {
        return Err(Error::EmptySubspace("no basis states".into()));
    }
    let op = |v: &[f64], y: &mut [f64]| hp.matvec(v, y);
    let (energy, mut vector, gap, matvecs) = lanczos(n, op, opts, start)?;
    normalize_sign(&mut vector);
    let residual = residual_norm(hp, energy, &vector);
    Ok(GroundState {
        energy,
        vector,
        gap,
        residual,
        solver: SolverKind::Lanczos,
        matvecs,
    })
}

fn lanczos(
    n: usize,
    op: impl Fn(&[f64], &mut [f64]),
    opts: &LanczosOptions,
    start: Option<&[f64]>,
) -> Result<(f64, Vec<f64>, Option<f64>, usize)> {
    let m = opts.max_basis.clamp(2, n.max(2)).min(n);
    let keep = opts.keep.clamp(1, m.saturating_sub(1).max(1));

    let mut v0: Vec<f64> = match start {
        Some(s) if s.len() == n && norm(s) > 0.0 => s.to_vec(),
        _ => {
            let mut rng = ChaCha20Rng::seed_from_u64(0x5eed_1a2c_0e5f);
            (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
        }
    };
    let n0 = norm(&v0);
    scale(&mut v0, 1.0 / n0);

    let mut basis: Vec<Vec<f64>> = vec![v0];
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut w = vec![0.0; n];
    let mut matvecs = 0;
    let mut best = f64::INFINITY;

    for _restart in 0..=opts.max_restarts {
        let mut j = basis.len() - 1;
        // Expand towards m vectors, testing convergence every few steps.
        let (beta, next, ritz) = loop {
            op(&basis[j], &mut w);
            matvecs += 1;
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, &h) in coeffs.iter().enumerate() {
                t[(i, j)] = h;
                t[(j, i)] = h;
            }
            let mut beta = norm(&w);
            let breakdown = beta <= 1e-14 * coeffs[j].abs().max(1.0) || basis.len() == n;
            if breakdown {
                beta = 0.0;
            }
            let full = basis.len() == m;
            if breakdown || full || basis.len() % CHECK_EVERY == 0 {
                let ritz = Ritz::new(&t, basis.len());
                let estimate = (beta * ritz.last_component()).abs();
                let target = opts.tol * ritz.theta().abs().max(1.0);
                if estimate <= target {
                    let x = ritz.vector(&basis, 0, n);
                    op(&x, &mut w);
                    matvecs += 1;
                    let theta = ritz.theta();
                    let residual = w.iter().zip(&x).map(|(hx, xi)| (hx - theta * xi).powi(2)).sum::<f64>().sqrt();
                    best = best.min(residual);
                    if residual <= target || breakdown {
                        return Ok((theta, x, ritz.gap(), matvecs));
                    }
                    if breakdown {
                        break (0.0, None, ritz);
                    }
                    // `w` was overwritten; rebuild the residual direction.
                    op(&basis[j], &mut w);
                    matvecs += 1;
                    orthogonalize(&basis, &mut w);
                    beta = norm(&w);
                } else {
                    best = best.min(estimate);
                }
                if breakdown {
                    break (0.0, None, ritz);
                }
                if full {
                    let mut v = w.clone();
                    scale(&mut v, 1.0 / beta);
                    break (beta, Some(v), ritz);
                }
            }
            let mut v = w.clone();
            scale(&mut v, 1.0 / beta);
            basis.push(v);
            j += 1;
        };
        let _ = beta;

        let Some(next) = next else {
            // Invariant subspace reached without meeting the tolerance.
            return Err(Error::NoConvergence {
                iterations: matvecs,
                residual: best,
            });
        };

        // Thick restart: keep the lowest Ritz vectors plus the residual.
        let k = basis.len();
        let keep = keep.min(k - 1);
        let mut kept: Vec<Vec<f64>> = (0..keep).map(|r| ritz.vector(&basis, r, n)).collect();
        t.fill(0.0);
        for r in 0..keep {
            t[(r, r)] = ritz.value(r);
        }
        kept.push(next);
        basis = kept;
    }
    Err(Error::NoConvergence {
        iterations: matvecs,
        residual: best,
    })
}

/// Iterations between convergence checks inside one Lanczos cycle.
const CHECK_EVERY: usize = 8;

/// Vector length from which the Gram-Schmidt passes run in parallel.
const PARALLEL_LEN: usize = 1 << 15;

/// Two passes of classical Gram-Schmidt against `basis`; returns the summed
/// projection coefficients.
fn orthogonalize(basis: &[Vec<f64>], w: &mut [f64]) -> Vec<f64> {
    let mut coeffs = vec![0.0; basis.len()];
    for _pass in 0..2 {
        let c: Vec<f64> = if w.len() >= PARALLEL_LEN {
            let w_ref: &[f64] = w;
            basis.par_iter().map(|v| dot(v, w_ref)).collect()
        } else {
            basis.iter().map(|v| dot(v, w)).collect()
        };
        if w.len() >= PARALLEL_LEN {
            w.par_chunks_mut(4096).enumerate().for_each(|(chunk, out)| {
                let offset = chunk * 4096;
                for (v, &h) in basis.iter().zip(&c) {
                    let v = &v[offset..offset + out.len()];
                    out.iter_mut().zip(v).for_each(|(o, vi)| *o -= h * vi);
                }
            });
        } else {
            for (v, &h) in basis.iter().zip(&c) {
                axpy(-h, v, w);
            }
        }
        coeffs.iter_mut().zip(&c).for_each(|(a, b)| *a += b);
    }
    coeffs
}

/// Eigendecomposition of the leading `k x k` block of the projected matrix,
/// in ascending order.
struct Ritz {
    eig: SymmetricEigen<f64, nalgebra::Dyn>,
    order: Vec<usize>,
    k: usize,
}

impl Ritz {
    fn new(t: &DMatrix<f64>, k: usize) -> Self {
        let eig = SymmetricEigen::new(t.view((0, 0), (k, k)).into_owned());
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        Self { eig, order, k }
    }

    fn value(&self, r: usize) -> f64 {
        self.eig.eigenvalues[self.order[r]]
    }

    fn theta(&self) -> f64 {
        self.value(0)
    }

    fn gap(&self) -> Option<f64> {
        (self.k > 1).then(|| self.value(1) - self.value(0))
    }

    fn last_component(&self) -> f64 {
        self.eig.eigenvectors[(self.k - 1, self.order[0])]
    }

    /// Ritz vector `r` lifted to the full space and normalized.
    fn vector(&self, basis: &[Vec<f64>], r: usize, n: usize) -> Vec<f64> {
        let y = self.eig.eigenvectors.column(self.order[r]);
        let mut x = vec![0.0; n];
        for (i, v) in basis.iter().enumerate().take(self.k) {
            axpy(y[i], v, &mut x);
        }
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        x
    }
}

pub fn residual_norm(hp: &ProjectedHamiltonian, energy: f64, vector: &[f64]) -> f64 {
    let mut y = vec![0.0; vector.len()];
    hp.matvec(vector, &mut y);
    y.iter().zip(vector).map(|(a, b)| (a - energy * b).powi(2)).sum::<f64>().sqrt()
}

/// Flip the overall sign so the first component above `1e-10` is positive.
pub fn normalize_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|c| c.abs() > 1e-10) {
        if *first < 0.0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

#[inline]
fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}
