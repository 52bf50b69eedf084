//! Fixed-Hamming-weight basis with combinatorial ranking.
//!
//! The weight-`w` strings on `N` sites are indexed `0..C(N, w)` in ascending
//! integer order. For a string with set sites `c_1 < c_2 < ... < c_w` the rank
//! is `sum_i C(c_i, i)` (colexicographic order, which coincides with integer
//! order at fixed weight).

use crate::bitstring::{Bitstring, MAX_SITES};
use crate::error::{Error, Result};

/// `C(n, k)` without overflow for `n <= 64` where the result fits in `u64`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Dimension of the zero-charge sector, `C(N, N/2)`.
pub fn sector_dimension(n_sites: usize) -> u64 {
    binomial(n_sites as u64, (n_sites / 2) as u64)
}

#[derive(Clone, Debug)]
pub struct SectorBasis {
    n_sites: usize,
    weight: u32,
    dim: usize,
    /// `table[n][k] = C(n, k)` for `n <= N`, `k <= w`.
    table: Vec<Vec<u64>>,
}

impl SectorBasis {
    pub fn new(n_sites: usize, weight: u32) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES || weight as usize > n_sites {
            return Err(Error::InvalidParams(format!(
                "no sector with N={n_sites}, weight={weight}"
            )));
        }
        let dim = binomial(n_sites as u64, weight as u64);
        let dim = usize::try_from(dim)
            .map_err(|_| Error::InvalidParams(format!("sector dimension {dim} overflows usize")))?;
        let table = (0..=n_sites as u64)
            .map(|n| (0..=weight as u64).map(|k| binomial(n, k)).collect())
            .collect();
        Ok(Self {
            n_sites,
            weight,
            dim,
            table,
        })
    }

    /// The zero-charge sector, weight `N/2`.
    pub fn zero_charge(n_sites: usize) -> Result<Self> {
        if n_sites % 2 != 0 {
            return Err(Error::InvalidParams(format!("N must be even, got {n_sites}")));
        }
        Self::new(n_sites, (n_sites / 2) as u32)
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn weight(&self) -> u32 {
        self.weight
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contains(&self, b: Bitstring) -> bool {
        b.len() == self.n_sites && b.weight() == self.weight
    }

    pub fn check(&self, b: Bitstring) -> Result<()> {
        if b.len() != self.n_sites {
            return Err(Error::SizeMismatch {
                expected: self.n_sites,
                found: b.len(),
            });
        }
        if b.weight() != self.weight {
            return Err(Error::OutOfSector {
                bits: b.to_string(),
                weight: b.weight(),
                expected: self.weight,
            });
        }
        Ok(())
    }

    /// Index of an in-sector string. The caller guarantees membership.
    #[inline]
    pub fn rank(&self, b: Bitstring) -> usize {
        debug_assert!(self.contains(b));
        let mut bits = b.bits();
        let mut rank = 0u64;
        let mut i = 1;
        while bits != 0 {
            let site = bits.trailing_zeros() as usize;
            rank += self.table[site][i];
            bits &= bits - 1;
            i += 1;
        }
        rank as usize
    }

    pub fn try_rank(&self, b: Bitstring) -> Result<usize> {
        self.check(b)?;
        Ok(self.rank(b))
    }

    #[inline]
    pub fn unrank(&self, rank: usize) -> Bitstring {
        debug_assert!(rank < self.dim);
        let mut rest = rank as u64;
        let mut bits = 0u64;
        let mut k = self.weight as usize;
        let mut site = self.n_sites;
        while k > 0 {
            site -= 1;
            let c = self.table[site][k];
            if rest >= c {
                rest -= c;
                bits |= 1 << site;
                k -= 1;
            }
        }
        Bitstring::from_raw(bits, self.n_sites)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Bitstring> + '_ {
        (0..self.dim).map(move |r| self.unrank(r))
    }
}
