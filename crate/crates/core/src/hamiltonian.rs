//! Penalized lattice Schwinger Hamiltonian in the spin (qubit) formulation.
//!
//! Two independent evaluators are provided. [`diagonal_energy`] and
//! [`hopping_neighbors`] give matrix elements directly from the cumulative
//! staggered charge and are what the solver pipeline uses. [`build_pauli_terms`]
//! expands the same operator into Pauli strings and is kept as a reference for
//! cross-checking the fast path.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bitstring::{Bitstring, MAX_SITES};
use crate::error::{Error, Result};

/// Default penalty strength for the total-charge term.
pub const DEFAULT_PENALTY: f64 = 100.0;

/// Fixed physical volume `N / sqrt(x)`.
pub const DEFAULT_VOLUME: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchwingerParams {
    /// Number of lattice sites (qubits), even.
    pub n_sites: usize,
    /// Inverse lattice spacing squared in units of the coupling, `1/(ag)^2`.
    pub x: f64,
    /// Bare lattice mass over coupling, `m_lat/g`.
    pub mass_ratio: f64,
    /// Background field `theta / 2pi`.
    pub l0: f64,
    /// Coefficient of the `(sum_n Q_n)^2` penalty.
    pub penalty: f64,
}

impl SchwingerParams {
    pub fn new(n_sites: usize, x: f64, mass_ratio: f64, l0: f64, penalty: f64) -> Result<Self> {
        let params = Self {
            n_sites,
            x,
            mass_ratio,
            l0,
            penalty,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters at fixed volume `N / sqrt(x) = volume`, i.e. `x = (N/volume)^2`.
    pub fn with_volume(
        n_sites: usize,
        volume: f64,
        mass_ratio: f64,
        l0: f64,
        penalty: f64,
    ) -> Result<Self> {
        if !(volume > 0.0) || !volume.is_finite() {
            return Err(Error::InvalidParams(format!("volume must be positive, got {volume}")));
        }
        let ratio = n_sites as f64 / volume;
        Self::new(n_sites, ratio * ratio, mass_ratio, l0, penalty)
    }

    /// `N / sqrt(x) = 30`, `m/g = 10`, `lambda = 100`: the production setting.
    pub fn standard(n_sites: usize, l0: f64) -> Result<Self> {
        Self::with_volume(n_sites, DEFAULT_VOLUME, 10.0, l0, DEFAULT_PENALTY)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_sites;
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidParams(format!(
                "n_sites must be even and >= 2, got {n}"
            )));
        }
        if n > MAX_SITES {
            return Err(Error::InvalidParams(format!(
                "n_sites must be <= {MAX_SITES}, got {n}"
            )));
        }
        if !(self.x > 0.0) || !self.x.is_finite() {
            return Err(Error::InvalidParams(format!("x must be positive, got {}", self.x)));
        }
        if !self.mass_ratio.is_finite() || !self.l0.is_finite() {
            return Err(Error::InvalidParams("mass_ratio and l0 must be finite".into()));
        }
        if !(self.penalty >= 0.0) || !self.penalty.is_finite() {
            return Err(Error::InvalidParams(format!(
                "penalty must be finite and >= 0, got {}",
                self.penalty
            )));
        }
        Ok(())
    }

    pub fn with_l0(mut self, l0: f64) -> Self {
        self.l0 = l0;
        self
    }

    /// Coefficient of the staggered mass term, `(m/g) sqrt(x)`.
    #[inline]
    pub fn mass_coefficient(&self) -> f64 {
        self.mass_ratio * self.x.sqrt()
    }

    /// Hamming weight of the zero-charge sector.
    #[inline]
    pub fn sector_weight(&self) -> u32 {
        (self.n_sites / 2) as u32
    }
}

/// Flat key-value model section as found in run configs.
///
/// Exactly one of `x` and `volume` must be given; `volume` sets
/// `x = (n_sites / volume)^2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n_sites: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume: Option<f64>,
    #[serde(default = "default_mass_ratio")]
    pub mass_ratio: f64,
    #[serde(default)]
    pub l0: f64,
    #[serde(default = "default_penalty")]
    pub penalty: f64,
}

fn default_mass_ratio() -> f64 {
    10.0
}

fn default_penalty() -> f64 {
    DEFAULT_PENALTY
}

impl ModelConfig {
    pub fn params(&self) -> Result<SchwingerParams> {
        match (self.x, self.volume) {
            (Some(_), Some(_)) => Err(Error::InvalidParams(
                "give either x or volume, not both".into(),
            )),
            (Some(x), None) => {
                SchwingerParams::new(self.n_sites, x, self.mass_ratio, self.l0, self.penalty)
            }
            (None, volume) => SchwingerParams::with_volume(
                self.n_sites,
                volume.unwrap_or(DEFAULT_VOLUME),
                self.mass_ratio,
                self.l0,
                self.penalty,
            ),
        }
    }
}

impl From<&SchwingerParams> for ModelConfig {
    fn from(p: &SchwingerParams) -> Self {
        Self {
            n_sites: p.n_sites,
            x: Some(p.x),
            volume: None,
            mass_ratio: p.mass_ratio,
            l0: p.l0,
            penalty: p.penalty,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

/// `coefficient * P_{s1} P_{s2} ...`; an empty factor list is the identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub factors: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coefficient: f64, mut factors: Vec<(usize, Pauli)>) -> Self {
        factors.sort_by_key(|&(site, _)| site);
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        Self {
            coefficient,
            factors,
        }
    }

    pub fn identity(coefficient: f64) -> Self {
        Self {
            coefficient,
            factors: Vec::new(),
        }
    }

    /// Image of a basis state: `term |b⟩ = amplitude |b'⟩`.
    pub fn apply(&self, b: Bitstring) -> (Bitstring, Complex64) {
        let mut out = b;
        let mut phase = Complex64::new(self.coefficient, 0.0);
        for &(site, pauli) in &self.factors {
            let sign = if b.bit(site) { -1.0 } else { 1.0 };
            match pauli {
                Pauli::X => out = out.flip(site),
                // Y|0⟩ = i|1⟩, Y|1⟩ = -i|0⟩
                Pauli::Y => {
                    out = out.flip(site);
                    phase *= Complex64::new(0.0, sign);
                }
                Pauli::Z => phase *= sign,
            }
        }
        (out, phase)
    }
}

/// Full Pauli expansion of the Hamiltonian including the charge penalty.
///
/// Electric-field and penalty `Z_n Z_k` couplings are merged per pair, and the
/// mass and electric single-`Z` weights are merged per site. Terms whose
/// coefficient is exactly zero are dropped.
pub fn build_pauli_terms(params: &SchwingerParams) -> Result<Vec<PauliTerm>> {
    params.validate()?;
    let n = params.n_sites;
    let nf = n as f64;
    let (x, l0, lam) = (params.x, params.l0, params.penalty);
    let mass = params.mass_coefficient();
    let mut terms = Vec::new();

    for site in 0..n - 1 {
        terms.push(PauliTerm::new(x / 2.0, vec![(site, Pauli::X), (site + 1, Pauli::X)]));
        terms.push(PauliTerm::new(x / 2.0, vec![(site, Pauli::Y), (site + 1, Pauli::Y)]));
    }

    // The penalty's single-Z weight is lambda/2 * sum_k (-1)^k, zero for even N.
    for site in 0..n {
        let staggered = if site % 2 == 0 { 1.0 } else { -1.0 };
        let mut coefficient = mass * staggered;
        if site < n - 1 {
            let half_ceil = site.div_ceil(2) as f64;
            coefficient += nf / 4.0 - 0.5 * half_ceil + l0 * (nf - site as f64 - 1.0);
        }
        if coefficient != 0.0 {
            terms.push(PauliTerm::new(coefficient, vec![(site, Pauli::Z)]));
        }
    }

    for first in 0..n - 1 {
        for second in first + 1..n {
            let coefficient = 0.5 * (nf - second as f64 - 1.0 + lam);
            if coefficient != 0.0 {
                terms.push(PauliTerm::new(
                    coefficient,
                    vec![(first, Pauli::Z), (second, Pauli::Z)],
                ));
            }
        }
    }

    let constant = l0 * l0 * (nf - 1.0) + 0.5 * l0 * nf + nf * nf / 8.0 + lam * nf / 4.0;
    if constant != 0.0 {
        terms.push(PauliTerm::identity(constant));
    }
    Ok(terms)
}

/// Staggered charge `Q_n = (Z_n + (-1)^n) / 2` as an integer.
#[inline]
pub fn site_charge(b: Bitstring, site: usize) -> i32 {
    let staggered = if site % 2 == 0 { 1 } else { -1 };
    (b.z(site) + staggered) / 2
}

/// `<b|W|b>` from the cumulative-charge form in O(N).
pub fn diagonal_energy(b: Bitstring, params: &SchwingerParams) -> f64 {
    debug_assert_eq!(b.len(), params.n_sites);
    let n = params.n_sites;
    let mut staggered_z = 0i32;
    let mut cumulative = 0i32;
    let mut electric = 0.0;
    for site in 0..n {
        let z = b.z(site);
        staggered_z += if site % 2 == 0 { z } else { -z };
        cumulative += site_charge(b, site);
        if site + 1 < n {
            let field = params.l0 + cumulative as f64;
            electric += field * field;
        }
    }
    let total = cumulative as f64;
    params.mass_coefficient() * staggered_z as f64 + electric + params.penalty * total * total
}

/// Call `f(neighbor, element)` for every off-diagonal `<b'|W|b>`.
///
/// These are exactly the adjacent exchanges `01 <-> 10`, each with element `x`.
#[inline]
pub fn for_each_hop(b: Bitstring, params: &SchwingerParams, mut f: impl FnMut(Bitstring, f64)) {
    let bits = b.bits();
    // sites where bit(n) != bit(n+1)
    let mut movable = (bits ^ (bits >> 1)) & low_mask(params.n_sites - 1);
    while movable != 0 {
        let site = movable.trailing_zeros() as usize;
        movable &= movable - 1;
        f(b.swap_adjacent(site), params.x);
    }
}

pub fn hopping_neighbors(b: Bitstring, params: &SchwingerParams) -> Vec<(Bitstring, f64)> {
    let mut out = Vec::new();
    for_each_hop(b, params, |nb, el| out.push((nb, el)));
    out
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Dense `2^N x 2^N` matrix of a Pauli sum. Reference use only (N <= 12).
///
/// Fails if the assembled operator has a non-negligible imaginary part.
pub fn dense_from_pauli_terms(terms: &[PauliTerm], n_sites: usize) -> Result<DMatrix<f64>> {
    check_dense_size(n_sites)?;
    let dim = 1usize << n_sites;
    let mut re = DMatrix::<f64>::zeros(dim, dim);
    let mut im = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let b = Bitstring::from_raw(col as u64, n_sites);
        for term in terms {
            let (image, amp) = term.apply(b);
            let row = image.bits() as usize;
            re[(row, col)] += amp.re;
            im[(row, col)] += amp.im;
        }
    }
    let max_im = im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_im > 1e-12 {
        return Err(Error::InvalidParams(format!(
            "Pauli sum is not real (max imaginary part {max_im:e})"
        )));
    }
    Ok(re)
}

/// Dense `2^N x 2^N` matrix from [`diagonal_energy`] and [`hopping_neighbors`].
pub fn dense_from_charge_form(params: &SchwingerParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    let n = params.n_sites;
    check_dense_size(n)?;
    let dim = 1usize << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for col in 0..dim {
        let b = Bitstring::from_raw(col as u64, n);
        h[(col, col)] = diagonal_energy(b, params);
        for (nb, el) in hopping_neighbors(b, params) {
            h[(nb.bits() as usize, col)] += el;
        }
    }
    Ok(h)
}

fn check_dense_size(n_sites: usize) -> Result<()> {
    if n_sites == 0 || n_sites > 12 {
        return Err(Error::InvalidParams(format!(
            "dense 2^N assembly limited to 1 <= N <= 12, got {n_sites}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn bs(s: &str) -> Bitstring {
        s.parse().unwrap()
    }

    fn n4(l0: f64, penalty: f64) -> SchwingerParams {
        SchwingerParams::with_volume(4, 30.0, 10.0, l0, penalty).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(SchwingerParams::new(3, 0.1, 10.0, 0.0, 1.0).is_err());
        assert!(SchwingerParams::new(0, 0.1, 10.0, 0.0, 1.0).is_err());
        assert!(SchwingerParams::new(4, 0.0, 10.0, 0.0, 1.0).is_err());
        assert!(SchwingerParams::new(4, -1.0, 10.0, 0.0, 1.0).is_err());
        assert!(SchwingerParams::new(4, 0.1, 10.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn fixed_volume_gives_x() {
        let p = SchwingerParams::standard(14, 0.0).unwrap();
        assert_eq!(p.x, (14.0f64 / 30.0).powi(2));
    }

    #[test]
    fn constant_term_n4() {
        let terms = build_pauli_terms(&n4(0.0, 0.0)).unwrap();
        let identity: Vec<_> = terms.iter().filter(|t| t.factors.is_empty()).collect();
        assert_eq!(identity.len(), 1);
        assert_eq!(identity[0].coefficient, 2.0);
    }

    #[test]
    fn single_link_hopping_n2() {
        let p = SchwingerParams::new(2, 0.37, 1.5, 0.2, 5.0).unwrap();
        let terms = build_pauli_terms(&p).unwrap();
        let hops: Vec<_> = terms
            .iter()
            .filter(|t| t.factors.iter().any(|&(_, q)| q != Pauli::Z))
            .collect();
        assert_eq!(hops.len(), 2);
        assert_eq!(hops[0].factors, vec![(0, Pauli::X), (1, Pauli::X)]);
        assert_eq!(hops[1].factors, vec![(0, Pauli::Y), (1, Pauli::Y)]);
        assert!(hops.iter().all(|t| t.coefficient == 0.37 / 2.0));
    }

    #[test]
    fn vacuum_energy() {
        assert_abs_diff_eq!(diagonal_energy(bs("0101"), &n4(0.0, 100.0)), -16.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn flux_string_energy() {
        assert_abs_diff_eq!(diagonal_energy(bs("0011"), &n4(0.0, 100.0)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn penalty_wiring() {
        // charges (0, -1, 1, -1): total -1
        let b = bs("1011");
        let with = diagonal_energy(b, &n4(0.0, 100.0));
        let without = diagonal_energy(b, &n4(0.0, 0.0));
        assert_abs_diff_eq!(with - without, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn hopping_from_flux_string() {
        let p = n4(0.0, 100.0);
        assert_eq!(hopping_neighbors(bs("0011"), &p), vec![(bs("0101"), p.x)]);
    }

    #[test]
    fn hopping_from_vacuum_matches_hardware_support() {
        let p = n4(0.0, 100.0);
        let mut nbs: Vec<_> = hopping_neighbors(bs("0101"), &p).into_iter().map(|(b, _)| b).collect();
        nbs.sort();
        assert_eq!(nbs, vec![bs("0011"), bs("0110"), bs("1001")]);
        assert!(hopping_neighbors(bs("0101"), &p).iter().all(|&(_, el)| el == p.x));
    }

    #[test]
    fn single_domain_wall_has_one_neighbor() {
        for n in (2..=12).step_by(2) {
            let p = SchwingerParams::standard(n, 0.0).unwrap();
            for ones in 1..n {
                let b = Bitstring::new(((1u64 << ones) - 1) << (n - ones), n).unwrap();
                assert_eq!(hopping_neighbors(b, &p).len(), 1, "{b:?}");
            }
        }
    }

    #[test]
    fn single_domain_wall_matches_dense_hopping() {
        // Dense XX+YY alone for N <= 6.
        for n in [2usize, 4, 6] {
            let p = SchwingerParams::new(n, 0.8, 0.0, 0.0, 0.0).unwrap();
            let hop_terms: Vec<_> = build_pauli_terms(&p)
                .unwrap()
                .into_iter()
                .filter(|t| t.factors.iter().any(|&(_, q)| q != Pauli::Z))
                .collect();
            let dense = dense_from_pauli_terms(&hop_terms, n).unwrap();
            let b = Bitstring::new(((1u64 << (n / 2)) - 1) << (n / 2), n).unwrap();
            let col = b.bits() as usize;
            let nonzero: Vec<usize> = (0..1 << n).filter(|&r| dense[(r, col)] != 0.0).collect();
            let fast: Vec<usize> = hopping_neighbors(b, &p).iter().map(|(nb, _)| nb.bits() as usize).collect();
            assert_eq!(nonzero, fast);
            assert_abs_diff_eq!(dense[(fast[0], col)], p.x, epsilon = 1e-15);
        }
    }

    #[test]
    fn pauli_and_charge_forms_agree_n4_penalized() {
        let p = n4(0.7, 100.0);
        let a = dense_from_pauli_terms(&build_pauli_terms(&p).unwrap(), 4).unwrap();
        let b = dense_from_charge_form(&p).unwrap();
        assert!((a - b).amax() < 1e-12);
    }

    #[test]
    fn mass_ground_state_minimizes_mass_term() {
        let p = SchwingerParams::new(6, 1.0, 1.0, 0.0, 0.0).unwrap();
        let vacuum = Bitstring::alternating_01(6);
        let mass_only = |b: Bitstring| {
            (0..6).map(|s| if s % 2 == 0 { b.z(s) } else { -b.z(s) }).sum::<i32>()
        };
        for bits in 0..64u64 {
            let b = Bitstring::new(bits, 6).unwrap();
            assert!(mass_only(vacuum) <= mass_only(b));
        }
        assert_eq!(mass_only(vacuum), -6);
        assert_eq!(mass_only(Bitstring::alternating_10(6)), 6);
        let _ = p;
    }

    #[test]
    fn model_config_volume_shorthand() {
        let cfg = ModelConfig {
            n_sites: 4,
            x: None,
            volume: Some(30.0),
            mass_ratio: 10.0,
            l0: 0.0,
            penalty: 100.0,
        };
        assert_eq!(cfg.params().unwrap().x, (4.0f64 / 30.0).powi(2));
        let both = ModelConfig { x: Some(1.0), ..cfg };
        assert!(both.params().is_err());
    }
}
