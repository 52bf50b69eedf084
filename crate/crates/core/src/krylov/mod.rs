//! Subspace accumulation, projection and diagonalization.

mod basis;
mod exact;
mod projected;
mod skqd;
mod solver;

pub use basis::{extend_basis, SubspaceBasis};
pub use exact::{
    check_exact_feasible, exact_ground_state, exact_ground_state_with_budget, exact_memory_estimate,
    ExactGroundState, ExactSolver, DEFAULT_MEMORY_BUDGET,
};
pub use projected::{project, project_sector, ProjectedHamiltonian};
pub use skqd::{
    run_skqd, run_skqd_grid, BasisAmplitude, ReplayShots, SampledSteps, ShotSource, SimulatedShots, SkqdConfig, SkqdSession,
    SkqdResult, StepRecord, StoppingMode,
};
pub use solver::{
    dense_ground_state, ground_state, lanczos_ground_state, normalize_sign, residual_norm, GroundState,
    LanczosOptions, SolverKind, DEGENERACY_GAP, DENSE_LIMIT, RESIDUAL_TOL,
};
