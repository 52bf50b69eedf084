//! Locating the first-order transition from the particle number.
//!
//! `<P>` jumps from 0 to 2 at `l0,c`. The transition is placed in the grid
//! interval where `<P>` crosses 1, then optionally narrowed by bisection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SchwingerParams;
use crate::krylov::{SkqdSession, ExactSolver};
use crate::observables::expected_particle_number_over;

use super::scan::{scan_exact, scan_skqd, ScanResult};

/// `<P>` level marking the transition, halfway between the plateaus 0 and 2.
pub const CROSSING_LEVEL: f64 = 1.0;

/// Default number of bisection rounds after grid detection.
pub const DEFAULT_REFINE_ROUNDS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    /// Midpoint of the bracketing interval.
    pub l0c: f64,
    /// Half the bracketing interval.
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Transition {
    fn from_bracket(lower: f64, upper: f64) -> Self {
        Self {
            l0c: 0.5 * (lower + upper),
            sigma: 0.5 * (upper - lower),
            lower,
            upper,
        }
    }

    /// Width of the bracketing interval.
    pub fn spacing(&self) -> f64 {
        self.upper - self.lower
    }
}

/// The unique grid interval where `<P>` crosses [`CROSSING_LEVEL`].
pub fn detect_crossing(l0: &[f64], particle_number: &[f64]) -> Result<Transition> {
    if l0.len() != particle_number.len() {
        return Err(Error::SizeMismatch {
            expected: l0.len(),
            found: particle_number.len(),
        });
    }
    if l0.len() < 2 {
        return Err(Error::Detection("need at least two grid points".into()));
    }
    let above: Vec<bool> = particle_number.iter().map(|&p| p >= CROSSING_LEVEL).collect();
    let crossings: Vec<usize> = (0..l0.len() - 1).filter(|&i| above[i] != above[i + 1]).collect();
    match crossings.as_slice() {
        [i] => Ok(Transition::from_bracket(l0[*i], l0[*i + 1])),
        [] => Err(Error::Detection(format!(
            "<P> never crosses {CROSSING_LEVEL} on [{}, {}]",
            l0[0],
            l0[l0.len() - 1]
        ))),
        many => Err(Error::Detection(format!(
            "<P> crosses {CROSSING_LEVEL} {} times; expected exactly once",
            many.len()
        ))),
    }
}

/// Grid detection on a scan. Failed points are skipped.
pub fn detect_l0c(scan: &ScanResult) -> Result<Transition> {
    let (l0, p): (Vec<f64>, Vec<f64>) = scan
        .points
        .iter()
        .filter_map(|pt| pt.particle_number.map(|p| (pt.l0, p)))
        .unzip();
    detect_crossing(&l0, &p)
}

/// Bisection on the bracket; each round evaluates `<P>` at the midpoint and
/// halves the interval.
pub fn refine_l0c(
    start: Transition,
    rounds: usize,
    mut particle_number: impl FnMut(f64) -> Result<f64>,
) -> Result<Transition> {
    let (mut lower, mut upper) = (start.lower, start.upper);
    let upper_above = particle_number(upper)? >= CROSSING_LEVEL;
    for _ in 0..rounds {
        let mid = 0.5 * (lower + upper);
        if (particle_number(mid)? >= CROSSING_LEVEL) == upper_above {
            upper = mid;
        } else {
            lower = mid;
        }
    }
    Ok(Transition::from_bracket(lower, upper))
}

/// Exact scan, grid detection and `rounds` of refinement.
pub fn exact_l0c(
    params: &SchwingerParams,
    grid: &[f64],
    rounds: usize,
    budget_bytes: u64,
) -> Result<(ScanResult, Transition)> {
    let scan = scan_exact(params, grid, budget_bytes)?;
    let coarse = detect_l0c(&scan)?;
    let mut solver = ExactSolver::new(params, budget_bytes)?;
    let refined = refine_l0c(coarse, rounds, |l0| {
        let gs = solver.solve(l0)?;
        expected_particle_number_over(gs.sector.iter(), &gs.state.vector)
    })?;
    Ok((scan, refined))
}

/// SKQD scan, grid detection and `rounds` of refinement, all drawing on the
/// session's sampled steps.
pub fn skqd_l0c(
    params: &SchwingerParams,
    grid: &[f64],
    rounds: usize,
    session: &mut SkqdSession<'_>,
) -> Result<(ScanResult, Transition)> {
    let scan = scan_skqd(params, grid, session)?;
    let coarse = detect_l0c(&scan)?;
    let refined = refine_l0c(coarse, rounds, |l0| Ok(session.run(&params.with_l0(l0))?.particle_number))?;
    Ok((scan, refined))
}
