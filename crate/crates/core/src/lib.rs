//! Sample-based Krylov quantum diagonalization (SKQD) for the lattice Schwinger
//! model with a topological θ-term.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! * [`hamiltonian`]: model parameters and matrix elements of the penalized
//!   spin Hamiltonian.
//! * [`evolution`]: kinetic Trotter evolution restricted to the zero-charge
//!   sector.
//! * [`sampling`]: shot sampling, readout noise, post-selection, counts files.
//! * [`krylov`]: subspace accumulation, projection, eigensolvers and the
//!   adaptive SKQD loop.
//! * [`observables`]: total charge and particle number.
//! * [`experiments`]: background-field scans, transition detection, the
//!   finite-size fit and report output.

pub mod bitstring;
pub mod error;
pub mod evolution;
pub mod experiments;
pub mod hamiltonian;
pub mod krylov;
pub mod observables;
pub mod sampling;
pub mod sector;

pub use bitstring::Bitstring;
pub use error::{Error, Result};
pub use evolution::{ReferenceState, SectorState};
pub use hamiltonian::SchwingerParams;
pub use krylov::{SkqdConfig, SkqdResult, SubspaceBasis};
pub use sampling::{NoiseSpec, ShotCounts};
pub use sector::SectorBasis;
