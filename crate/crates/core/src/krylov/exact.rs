use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hamiltonian::SchwingerParams;
use crate::sector::{sector_dimension, SectorBasis};

use super::projected::{project_sector, ProjectedHamiltonian};
use super::solver::{ground_state, lanczos_ground_state, GroundState, LanczosOptions, DENSE_LIMIT};

/// Default memory ceiling for exact diagonalization.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

/// Rough peak memory of an exact sector solve: strings, diagonal, sparse
/// pattern, and the Lanczos basis.
pub fn exact_memory_estimate(n_sites: usize) -> u64 {
    let dim = sector_dimension(n_sites);
    let lanczos_vectors = LanczosOptions::default().max_basis as u64 + 4;
    let per_state = 8 + 8 + 8 + 4 * (n_sites as u64 / 2 + 1) + 8 * lanczos_vectors;
    dim.saturating_mul(per_state)
}

pub fn check_exact_feasible(n_sites: usize, budget_bytes: u64) -> Result<()> {
    let required = exact_memory_estimate(n_sites);
    if required > budget_bytes {
        return Err(Error::Infeasible {
            n_sites,
            dim: sector_dimension(n_sites),
            required_bytes: required,
            budget_bytes,
        });
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct ExactGroundState {
    pub sector: Arc<SectorBasis>,
    pub state: GroundState,
}

impl ExactGroundState {
    pub fn energy(&self) -> f64 {
        self.state.energy
    }
}

/// Zero-charge ground state by diagonalizing the whole weight-`N/2` sector.
pub fn exact_ground_state(params: &SchwingerParams) -> Result<ExactGroundState> {
    exact_ground_state_with_budget(params, DEFAULT_MEMORY_BUDGET)
}

pub fn exact_ground_state_with_budget(params: &SchwingerParams, budget_bytes: u64) -> Result<ExactGroundState> {
    let mut solver = ExactSolver::new(params, budget_bytes)?;
    solver.solve(params.l0)
}

/// Sector Hamiltonian built once and re-solved at several background fields.
#[derive(Clone, Debug)]
pub struct ExactSolver {
    sector: Arc<SectorBasis>,
    hamiltonian: ProjectedHamiltonian,
}

impl ExactSolver {
    pub fn new(params: &SchwingerParams, budget_bytes: u64) -> Result<Self> {
        params.validate()?;
        check_exact_feasible(params.n_sites, budget_bytes)?;
        let sector = Arc::new(SectorBasis::zero_charge(params.n_sites)?);
        let hamiltonian = project_sector(params, &sector)?;
        Ok(Self { sector, hamiltonian })
    }

    pub fn sector(&self) -> &Arc<SectorBasis> {
        &self.sector
    }

    pub fn dim(&self) -> usize {
        self.sector.dim()
    }

    pub fn hamiltonian(&self) -> &ProjectedHamiltonian {
        &self.hamiltonian
    }

    pub fn solve(&mut self, l0: f64) -> Result<ExactGroundState> {
        self.solve_from(l0, None)
    }

    /// Solve at `l0`, seeding Lanczos with `start` when the sector is large.
    pub fn solve_from(&mut self, l0: f64, start: Option<&[f64]>) -> Result<ExactGroundState> {
        if self.hamiltonian.params().l0 != l0 {
            self.hamiltonian.set_l0(l0);
        }
        let state = if self.dim() > DENSE_LIMIT {
            lanczos_ground_state(&self.hamiltonian, &LanczosOptions::default(), start)?
        } else {
            ground_state(&self.hamiltonian)?
        };
        Ok(ExactGroundState {
            sector: self.sector.clone(),
            state,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitstring::Bitstring;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;

    #[test]
    fn two_sites_closed_form() {
        let params = SchwingerParams::standard(2, 0.4).unwrap();
        let gs = exact_ground_state(&params).unwrap();
        let d: Vec<f64> = ["01", "10"]
            .iter()
            .map(|s| crate::hamiltonian::diagonal_energy(s.parse::<Bitstring>().unwrap(), &params))
            .collect();
        let expected = (d[0] + d[1]) / 2.0 - (((d[0] - d[1]) / 2.0).powi(2) + params.x * params.x).sqrt();
        assert_relative_eq!(gs.energy(), expected, max_relative = 1e-14);
    }

    #[test]
    fn matches_full_space_minimum_in_sector() {
        // With a strong penalty the full 2^N ground state lies in the sector.
        let params = SchwingerParams::standard(6, 0.9).unwrap();
        let full = crate::hamiltonian::dense_from_charge_form(&params).unwrap();
        let full_min = SymmetricEigen::new(full).eigenvalues.min();
        assert_relative_eq!(exact_ground_state(&params).unwrap().energy(), full_min, max_relative = 1e-12);
    }

    #[test]
    fn physical_dimensions() {
        for (n, dim) in [(14usize, 3432usize), (20, 184756)] {
            check_exact_feasible(n, DEFAULT_MEMORY_BUDGET).unwrap();
            assert_eq!(crate::sector::sector_dimension(n), dim as u64);
        }
    }

    #[test]
    fn refuses_oversized_sectors() {
        match check_exact_feasible(40, DEFAULT_MEMORY_BUDGET) {
            Err(Error::Infeasible { required_bytes, budget_bytes, .. }) => assert!(required_bytes > budget_bytes),
            other => panic!("expected refusal, got {other:?}"),
        }
        assert!(exact_ground_state(&SchwingerParams::standard(40, 0.0).unwrap()).is_err());
    }
}
