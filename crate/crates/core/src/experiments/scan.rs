use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SchwingerParams;
use crate::krylov::{ExactSolver, SkqdResult, SkqdSession, StepRecord};
use crate::observables::{expected_particle_number_over, ObservableRecord};
use crate::sector::sector_dimension;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanMethod {
    Skqd,
    Exact,
}

impl fmt::Display for ScanMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanMethod::Skqd => "skqd",
            ScanMethod::Exact => "exact",
        })
    }
}

/// `count` evenly spaced points from `start` to `stop` inclusive, written
/// `start:stop:count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        let spec = Self { start, stop, count };
        spec.points()?;
        Ok(spec)
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        linspace(self.start, self.stop, self.count)
    }
}

impl Default for GridSpec {
    /// 41 points on `[0, 2]`.
    fn default() -> Self {
        Self {
            start: 0.0,
            stop: 2.0,
            count: 41,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParams(format!("grid must be start:stop:count, got {s:?}"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        Self::new(
            start.trim().parse().map_err(|_| bad())?,
            stop.trim().parse().map_err(|_| bad())?,
            count.trim().parse().map_err(|_| bad())?,
        )
    }
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !start.is_finite() || !stop.is_finite() {
        return Err(Error::InvalidParams("grid bounds must be finite".into()));
    }
    match count {
        0 => Err(Error::InvalidParams("grid needs at least one point".into())),
        1 => Ok(vec![start]),
        _ if stop <= start => Err(Error::InvalidParams(format!(
            "grid stop {stop} must exceed start {start}"
        ))),
        _ => {
            let step = (stop - start) / (count - 1) as f64;
            Ok((0..count)
                .map(|i| if i + 1 == count { stop } else { start + step * i as f64 })
                .collect())
        }
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParams("l0 grid is empty".into()));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("l0 grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub l0: f64,
    pub energy: Option<f64>,
    pub particle_number: Option<f64>,
    pub dim_subspace: usize,
    pub dim_sector: u64,
    /// Trotter step whose basis produced this point (SKQD only).
    pub k_used: Option<usize>,
    pub energy_exact: Option<f64>,
    /// Spectral gap below the degeneracy tolerance.
    pub degenerate: bool,
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub steps: Vec<StepRecord>,
}

impl ScanPoint {
    fn failed(l0: f64, dim_sector: u64, error: &Error) -> Self {
        Self {
            l0,
            energy: None,
            particle_number: None,
            dim_subspace: 0,
            dim_sector,
            k_used: None,
            energy_exact: None,
            degenerate: false,
            error: Some(error.to_string()),
            steps: Vec::new(),
        }
    }

    fn from_skqd(l0: f64, r: &SkqdResult) -> Self {
        Self {
            l0,
            energy: Some(r.energy),
            particle_number: Some(r.particle_number),
            dim_subspace: r.dim,
            dim_sector: r.dim_sector,
            k_used: Some(r.k_max),
            energy_exact: None,
            degenerate: r.degenerate,
            error: None,
            steps: r.steps.clone(),
        }
    }

    /// `|E0 - E0_exact| / |E0_exact|`.
    pub fn rel_dev(&self) -> Option<f64> {
        match (self.energy, self.energy_exact) {
            (Some(e), Some(x)) => Some((e - x).abs() / x.abs()),
            _ => None,
        }
    }

    pub fn record(&self) -> Option<ObservableRecord> {
        Some(ObservableRecord {
            l0: self.l0,
            energy: self.energy?,
            particle_number: self.particle_number?,
            dim_subspace: self.dim_subspace,
            dim_sector: self.dim_sector,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub method: ScanMethod,
    /// Model parameters; `l0` is the first grid point.
    pub params: SchwingerParams,
    pub seed: Option<u64>,
    pub grid: Vec<f64>,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    pub fn n_sites(&self) -> usize {
        self.params.n_sites
    }

    pub fn energies(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.energy).collect()
    }

    pub fn particle_numbers(&self) -> Vec<Option<f64>> {
        self.points.iter().map(|p| p.particle_number).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.error.is_some()).count()
    }

    /// Fills `energy_exact` from an exact scan over the same grid.
    pub fn attach_exact(&mut self, exact: &ScanResult) -> Result<()> {
        if exact.grid != self.grid {
            return Err(Error::InvalidParams("exact reference uses a different grid".into()));
        }
        for (p, e) in self.points.iter_mut().zip(&exact.points) {
            p.energy_exact = e.energy;
        }
        Ok(())
    }

    /// Mean of the per-point relative deviations, ignoring missing points.
    pub fn mean_rel_dev(&self) -> Option<f64> {
        let devs: Vec<f64> = self.points.iter().filter_map(ScanPoint::rel_dev).collect();
        (!devs.is_empty()).then(|| devs.iter().sum::<f64>() / devs.len() as f64)
    }

    pub fn max_rel_dev(&self) -> Option<f64> {
        self.points.iter().filter_map(ScanPoint::rel_dev).reduce(f64::max)
    }
}

/// Exact diagonalization at every grid point. The sector Hamiltonian is built
/// once; only its diagonal changes with `l0`.
pub fn scan_exact(params: &SchwingerParams, grid: &[f64], budget_bytes: u64) -> Result<ScanResult> {
    check_grid(grid)?;
    let mut solver = ExactSolver::new(&params.with_l0(grid[0]), budget_bytes)?;
    let dim_sector = sector_dimension(params.n_sites);
    let points = grid
        .iter()
        .map(|&l0| match solver.solve(l0) {
            Ok(gs) => {
                let p = expected_particle_number_over(gs.sector.iter(), &gs.state.vector)?;
                Ok(ScanPoint {
                    l0,
                    energy: Some(gs.state.energy),
                    particle_number: Some(p),
                    dim_subspace: solver.dim(),
                    dim_sector,
                    k_used: None,
                    energy_exact: None,
                    degenerate: gs.state.is_degenerate(),
                    error: None,
                    steps: Vec::new(),
                })
            }
            Err(e) => Ok(ScanPoint::failed(l0, dim_sector, &e)),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScanResult {
        method: ScanMethod::Exact,
        params: params.with_l0(grid[0]),
        seed: None,
        grid: grid.to_vec(),
        points,
    })
}

/// SKQD at every grid point over the session's shared sampled steps.
pub fn scan_skqd(params: &SchwingerParams, grid: &[f64], session: &mut SkqdSession<'_>) -> Result<ScanResult> {
    check_grid(grid)?;
    let dim_sector = sector_dimension(params.n_sites);
    let results = session.run_grid(params, grid)?;
    let points = grid
        .iter()
        .zip(results)
        .map(|(&l0, r)| match r {
            Ok(r) => ScanPoint::from_skqd(l0, &r),
            Err(e) => ScanPoint::failed(l0, dim_sector, &e),
        })
        .collect();
    Ok(ScanResult {
        method: ScanMethod::Skqd,
        params: params.with_l0(grid[0]),
        seed: Some(session.config().seed),
        grid: grid.to_vec(),
        points,
    })
}
