//! Total charge and particle number.
//!
//! The particle number is `P = N/2 + (1/2) sum_n (-1)^n Z_n`, which is 0 on the
//! vacuum `|01…01⟩` and `N` on `|10…10⟩`. Both operators are diagonal in the
//! computational basis.

use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::hamiltonian::site_charge;
use crate::krylov::SubspaceBasis;

/// `sum_n Q_n`, an integer in `[-N/2, N/2]`.
pub fn total_charge(b: Bitstring) -> i32 {
    (0..b.len()).map(|site| site_charge(b, site)).sum()
}

/// Number of staggered-fermion excitations in `b`, in `[0, N]`.
pub fn particle_number_of(b: Bitstring) -> u32 {
    let staggered: i32 = (0..b.len())
        .map(|site| if site % 2 == 0 { b.z(site) } else { -b.z(site) })
        .sum();
    ((b.len() as i32 + staggered) / 2) as u32
}

/// `sum_i vec_i^2 P(b_i)` for a real normalized vector over `basis`.
pub fn expected_particle_number(basis: &SubspaceBasis, vector: &[f64]) -> Result<f64> {
    expected_particle_number_over(basis.iter(), vector)
}

/// As [`expected_particle_number`] for any ordered list of strings.
pub fn expected_particle_number_over(
    strings: impl ExactSizeIterator<Item = Bitstring>,
    vector: &[f64],
) -> Result<f64> {
    if strings.len() != vector.len() {
        return Err(Error::SizeMismatch {
            expected: strings.len(),
            found: vector.len(),
        });
    }
    Ok(strings
        .zip(vector)
        .map(|(b, c)| c * c * particle_number_of(b) as f64)
        .sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub l0: f64,
    pub energy: f64,
    pub particle_number: f64,
    pub dim_subspace: usize,
    pub dim_sector: u64,
}
