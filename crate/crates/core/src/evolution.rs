//! Kinetic-only Trotterized time evolution inside the zero-charge sector.
//!
//! One Trotter step applies `exp(i dt/4 (X_n X_{n+1} + Y_n Y_{n+1}))` for
//! `n = 0, 1, ..., N-2` in that order. Each gate is the identity on `|00⟩`,
//! `|11⟩` and rotates `{|01⟩, |10⟩}` by
//! `[[cos(dt/2), i sin(dt/2)], [i sin(dt/2), cos(dt/2)]]`, so the Hamming
//! weight is conserved and the state never leaves its sector.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::sector::SectorBasis;

/// Initial state of the Krylov sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceState {
    Custom(Bitstring),
    /// `|10…10⟩`, maximal particle number.
    Alternating10,
    /// `|01…01⟩`, ground state of the mass term.
    MassGround,
}

impl ReferenceState {
    pub fn bitstring(&self, n_sites: usize) -> Result<Bitstring> {
        match *self {
            ReferenceState::Custom(b) => {
                if b.len() != n_sites {
                    return Err(Error::SizeMismatch {
                        expected: n_sites,
                        found: b.len(),
                    });
                }
                Ok(b)
            }
            ReferenceState::Alternating10 => Ok(Bitstring::alternating_10(n_sites)),
            ReferenceState::MassGround => Ok(Bitstring::alternating_01(n_sites)),
        }
    }
}

impl fmt::Display for ReferenceState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReferenceState::Custom(b) => write!(f, "{b}"),
            ReferenceState::Alternating10 => f.write_str("alternating-10"),
            ReferenceState::MassGround => f.write_str("mass-ground"),
        }
    }
}

impl FromStr for ReferenceState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "alternating-10" => Ok(ReferenceState::Alternating10),
            "mass-ground" => Ok(ReferenceState::MassGround),
            other => Ok(ReferenceState::Custom(other.parse()?)),
        }
    }
}

impl Serialize for ReferenceState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ReferenceState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Normalized amplitudes over a fixed-weight basis.
#[derive(Clone, Debug)]
pub struct SectorState {
    basis: Arc<SectorBasis>,
    amplitudes: Vec<Complex64>,
}

impl SectorState {
    pub fn basis_state(basis: Arc<SectorBasis>, b: Bitstring) -> Result<Self> {
        let index = basis.try_rank(b)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); basis.dim()];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { basis, amplitudes })
    }

    pub fn from_amplitudes(basis: Arc<SectorBasis>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::SizeMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { basis, amplitudes })
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, b: Bitstring) -> Option<Complex64> {
        self.basis.contains(b).then(|| self.amplitudes[self.basis.rank(b)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SectorState) -> Result<f64> {
        if self.amplitudes.len() != other.amplitudes.len() {
            return Err(Error::SizeMismatch {
                expected: self.amplitudes.len(),
                found: other.amplitudes.len(),
            });
        }
        let overlap: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }

    /// Support strings with probability above `threshold`.
    pub fn support(&self, threshold: f64) -> Vec<Bitstring> {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > threshold)
            .map(|(i, _)| self.basis.unrank(i))
            .collect()
    }
}

/// Zero-charge reference state for `n_sites`.
pub fn reference_state(kind: ReferenceState, n_sites: usize) -> Result<SectorState> {
    let basis = Arc::new(SectorBasis::zero_charge(n_sites)?);
    SectorState::basis_state(basis, kind.bitstring(n_sites)?)
}

/// Precomputed pair structure for repeated Trotter steps over one basis.
///
/// For the gate on link `n`, a string with `(bit n, bit n+1) = (1, 0)` at rank
/// `i` pairs with its exchanged partner at rank `i + C(n, t)`, where `t` is the
/// number of set bits below `n`.
#[derive(Clone, Debug)]
pub struct TrotterCircuit {
    basis: Arc<SectorBasis>,
    /// `pairs[n]` lists `(rank of ..01.., rank of ..10..)` for link `n`.
    pairs: Vec<Vec<(u32, u32)>>,
}

impl TrotterCircuit {
    pub fn new(basis: Arc<SectorBasis>) -> Self {
        let n = basis.n_sites();
        let mut pairs: Vec<Vec<(u32, u32)>> = vec![Vec::new(); n.saturating_sub(1)];
        for rank in 0..basis.dim() {
            let bits = basis.unrank(rank).bits();
            for (link, list) in pairs.iter_mut().enumerate() {
                if (bits >> link) & 0b11 == 0b01 {
                    let below = (bits & ((1u64 << link) - 1)).count_ones() as u64;
                    let partner = rank as u64 + crate::sector::binomial(link as u64, below);
                    list.push((rank as u32, partner as u32));
                }
            }
        }
        Self { basis, pairs }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    /// One full staircase `U(dt)` applied in place.
    pub fn step(&self, state: &mut SectorState, dt: f64) {
        debug_assert_eq!(self.basis.n_sites(), state.basis.n_sites());
        debug_assert_eq!(self.basis.weight(), state.basis.weight());
        let c = Complex64::new((dt / 2.0).cos(), 0.0);
        let s = Complex64::new(0.0, (dt / 2.0).sin());
        let amps = &mut state.amplitudes;
        for link in &self.pairs {
            for &(lo, hi) in link {
                let (lo, hi) = (lo as usize, hi as usize);
                let (a, b) = (amps[lo], amps[hi]);
                amps[lo] = c * a + s * b;
                amps[hi] = s * a + c * b;
            }
        }
    }
}

pub fn apply_trotter_step(state: &SectorState, dt: f64) -> SectorState {
    let mut out = state.clone();
    TrotterCircuit::new(state.basis.clone()).step(&mut out, dt);
    out
}

/// `U(dt)^k |psi0⟩`.
pub fn evolve(psi0: &SectorState, dt: f64, k: usize) -> SectorState {
    let mut out = psi0.clone();
    if k > 0 {
        let circuit = TrotterCircuit::new(psi0.basis.clone());
        for _ in 0..k {
            circuit.step(&mut out, dt);
        }
    }
    out
}
