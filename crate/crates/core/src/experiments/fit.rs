//! Finite-size model for the transition point at fixed volume `N/sqrt(x) = 30`:
//!
//! ```text
//! l0,c(N) = (1/15) (m/g + MS(N)) / (1 - 1/N) + 1/2
//! MS(N)   = a/sqrt(N) + b/N + c/N^2
//! ```
//!
//! Dividing out the known prefactor leaves a model linear in `(a, b, c)`,
//! which is solved by weighted least squares through a QR factorization.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slope of the transition point in `m/g` at fixed volume 30.
pub const TRANSITION_SLOPE: f64 = 1.0 / 15.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub n_sites: usize,
    pub l0c: f64,
    pub sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MassShift {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl MassShift {
    pub fn at(&self, n_sites: usize) -> f64 {
        let n = n_sites as f64;
        self.a / n.sqrt() + self.b / n + self.c / (n * n)
    }
}

/// Model prediction for `l0,c` at `n_sites`.
pub fn model_l0c(n_sites: usize, mass_ratio: f64, shift: &MassShift) -> f64 {
    let n = n_sites as f64;
    TRANSITION_SLOPE * (mass_ratio + shift.at(n_sites)) / (1.0 - 1.0 / n) + 0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: MassShift,
    /// One-sigma uncertainties of `(a, b, c)`.
    pub errors: MassShift,
    /// Residual-scaled covariance of `(a, b, c)`.
    pub covariance: [[f64; 3]; 3],
    /// `sqrt(sum (residual/sigma)^2)` when weighted, else the plain residual
    /// norm in units of `l0,c`.
    pub residual_norm: f64,
    pub dof: usize,
    pub weighted: bool,
    pub mass_ratio: f64,
    pub points: Vec<TransitionPoint>,
}

/// Weighted linear least squares for `(a, b, c)`.
///
/// Points are weighted by `1/sigma` when every sigma is positive and
/// unweighted when every sigma is zero.
pub fn fit_l0c_model(points: &[TransitionPoint], mass_ratio: f64) -> Result<FitResult> {
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points for 3 parameters, got {}",
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.n_sites < 2 || p.n_sites % 2 != 0) {
        return Err(Error::Fit(format!("N must be even and >= 2, got {}", p.n_sites)));
    }
    if points.iter().any(|p| !p.l0c.is_finite() || !p.sigma.is_finite() || p.sigma < 0.0) {
        return Err(Error::Fit("l0c and sigma must be finite, sigma >= 0".into()));
    }
    let weighted = points.iter().all(|p| p.sigma > 0.0);
    if !weighted && points.iter().any(|p| p.sigma > 0.0) {
        return Err(Error::Fit("mix of zero and positive sigma".into()));
    }

    let rows = points.len();
    let mut design = DMatrix::<f64>::zeros(rows, 3);
    let mut target = DVector::<f64>::zeros(rows);
    for (i, p) in points.iter().enumerate() {
        let n = p.n_sites as f64;
        let lever = TRANSITION_SLOPE / (1.0 - 1.0 / n);
        let w = if weighted { lever / p.sigma } else { 1.0 };
        // l0c = lever * (m + MS) + 1/2  =>  (l0c - 1/2)/lever - m = MS
        let y = (p.l0c - 0.5) / lever - mass_ratio;
        design[(i, 0)] = w / n.sqrt();
        design[(i, 1)] = w / n;
        design[(i, 2)] = w / (n * n);
        target[i] = w * y;
    }

    let qr = design.clone().qr();
    let r = qr.r();
    let diag: Vec<f64> = (0..3).map(|i| r[(i, i)].abs()).collect();
    let largest = diag.iter().cloned().fold(0.0, f64::max);
    if diag.iter().any(|&d| !(d > 1e-12 * largest)) {
        return Err(Error::Fit("design matrix is rank deficient (need at least 3 distinct N)".into()));
    }
    let qty = qr.q().transpose() * &target;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Fit("singular triangular factor".into()))?;

    let residual = &design * &beta - &target;
    let rss = residual.norm_squared();
    let dof = rows - 3;
    let r_inv = r
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Fit("singular triangular factor".into()))?;
    let unscaled = &r_inv * r_inv.transpose();
    let cov = unscaled * (rss / dof as f64);

    // Weighted rows already measure residuals in units of sigma; unweighted
    // rows are rescaled from MS units back to l0,c.
    let residual_norm = if weighted {
        residual.norm()
    } else {
        points
            .iter()
            .zip(residual.iter())
            .map(|(p, r)| (r * TRANSITION_SLOPE / (1.0 - 1.0 / p.n_sites as f64)).powi(2))
            .sum::<f64>()
            .sqrt()
    };

    let mut covariance = [[0.0; 3]; 3];
    for (i, row) in covariance.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            *c = cov[(i, j)];
        }
    }
    Ok(FitResult {
        params: MassShift {
            a: beta[0],
            b: beta[1],
            c: beta[2],
        },
        errors: MassShift {
            a: cov[(0, 0)].sqrt(),
            b: cov[(1, 1)].sqrt(),
            c: cov[(2, 2)].sqrt(),
        },
        covariance,
        residual_norm,
        dof,
        weighted,
        mass_ratio,
        points: points.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const PUBLISHED: MassShift = MassShift {
        a: 6.5,
        b: -17.0,
        c: 246.0,
    };

    fn model_points(ns: &[usize]) -> Vec<TransitionPoint> {
        ns.iter()
            .map(|&n| TransitionPoint {
                n_sites: n,
                l0c: model_l0c(n, 10.0, &PUBLISHED),
                sigma: 0.0025,
            })
            .collect()
    }

    #[test]
    fn recovers_generating_parameters() {
        let fit = fit_l0c_model(&model_points(&[8, 10, 12, 14, 16, 18, 20, 30]), 10.0).unwrap();
        assert!((fit.params.a - 6.5).abs() < 1e-8, "{:?}", fit.params);
        assert!((fit.params.b + 17.0).abs() < 1e-8);
        assert!((fit.params.c - 246.0).abs() < 1e-8);
        assert!(fit.residual_norm < 1e-9);
        assert_eq!(fit.dof, 5);
    }

    #[test]
    fn unweighted_recovery() {
        let mut pts = model_points(&[8, 12, 16, 20]);
        pts.iter_mut().for_each(|p| p.sigma = 0.0);
        let fit = fit_l0c_model(&pts, 10.0).unwrap();
        assert!(!fit.weighted);
        assert!((fit.params.c - 246.0).abs() < 1e-8);
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(fit_l0c_model(&model_points(&[8, 10, 12]), 10.0), Err(Error::Fit(_))));
    }

    #[test]
    fn equal_sizes_are_rank_deficient() {
        assert!(matches!(fit_l0c_model(&model_points(&[12, 12, 12, 12]), 10.0), Err(Error::Fit(_))));
    }

    #[test]
    fn noisy_data_has_finite_errors() {
        let mut pts = model_points(&[8, 10, 12, 14, 16, 18, 20]);
        for (i, p) in pts.iter_mut().enumerate() {
            p.l0c += if i % 2 == 0 { 1e-3 } else { -1e-3 };
        }
        let fit = fit_l0c_model(&pts, 10.0).unwrap();
        for e in [fit.errors.a, fit.errors.b, fit.errors.c] {
            assert!(e.is_finite() && e > 0.0);
        }
        assert!(fit.covariance[0][1] == fit.covariance[1][0]);
    }
}
