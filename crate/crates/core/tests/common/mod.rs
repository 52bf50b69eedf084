//! Full `2^N` oracles shared by integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use skqd::hamiltonian::{Pauli, PauliTerm};
use skqd::{Bitstring, SectorState};

/// Dense matrix of `(X_n X_{n+1} + Y_n Y_{n+1}) / 2` on the full space.
pub fn exchange_generator(n_sites: usize, link: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_sites;
    let terms = [
        PauliTerm::new(0.5, vec![(link, Pauli::X), (link + 1, Pauli::X)]),
        PauliTerm::new(0.5, vec![(link, Pauli::Y), (link + 1, Pauli::Y)]),
    ];
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for col in 0..dim {
        let b = Bitstring::new(col as u64, n_sites).unwrap();
        for t in &terms {
            let (out, amp) = t.apply(b);
            m[(out.bits() as usize, col)] += amp;
        }
    }
    m
}

/// `U(dt) = prod_n exp(i dt/2 K_n)` for `n = 0..N-2`, later links applied last.
pub fn full_trotter_step(n_sites: usize, dt: f64) -> DMatrix<Complex64> {
    let dim = 1usize << n_sites;
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for link in 0..n_sites - 1 {
        let gate = (exchange_generator(n_sites, link) * Complex64::new(0.0, dt / 2.0)).exp();
        u = gate * u;
    }
    u
}

/// Sector amplitudes placed into the full space.
pub fn embed(state: &SectorState) -> DVector<Complex64> {
    let n = state.basis().n_sites();
    let mut v = DVector::<Complex64>::zeros(1 << n);
    for (b, a) in state.basis().iter().zip(state.amplitudes()) {
        v[b.bits() as usize] = *a;
    }
    v
}
