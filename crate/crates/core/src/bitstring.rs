//! Computational-basis labels.
//!
//! Bit `n` of the packed integer is lattice site `n`. A set bit is the qubit
//! state |1⟩, i.e. Z eigenvalue −1; a clear bit is |0⟩ with Z = +1. Strings are
//! displayed most-significant site first, `q_{N−1} … q_0`, so `"0011"` has
//! sites 0 and 1 set.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported lattice. Strings are packed into a `u64`.
pub const MAX_SITES: usize = 64;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bitstring {
    bits: u64,
    len: u8,
}

impl Bitstring {
    pub fn new(bits: u64, len: usize) -> Result<Self> {
        if len == 0 || len > MAX_SITES {
            return Err(Error::InvalidParams(format!(
                "bitstring length {len} outside 1..={MAX_SITES}"
            )));
        }
        if len < 64 && bits >> len != 0 {
            return Err(Error::SizeMismatch {
                expected: len,
                found: 64 - bits.leading_zeros() as usize,
            });
        }
        Ok(Self::from_raw(bits, len))
    }

    /// Unchecked constructor for callers that already masked `bits`.
    #[inline]
    pub(crate) fn from_raw(bits: u64, len: usize) -> Self {
        debug_assert!(len >= 1 && len <= MAX_SITES);
        debug_assert!(len == 64 || bits >> len == 0);
        Self {
            bits,
            len: len as u8,
        }
    }

    /// `|10…10⟩`: odd sites set. Maximal particle number.
    pub fn alternating_10(len: usize) -> Self {
        let bits = (0..len).filter(|n| n % 2 == 1).fold(0u64, |b, n| b | 1 << n);
        Self::from_raw(bits, len)
    }

    /// `|01…01⟩`: even sites set. Ground state of the mass term alone.
    pub fn alternating_01(len: usize) -> Self {
        let bits = (0..len).filter(|n| n % 2 == 0).fold(0u64, |b, n| b | 1 << n);
        Self::from_raw(bits, len)
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn len(self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(self) -> bool {
        false
    }

    #[inline]
    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }

    #[inline]
    pub fn bit(self, site: usize) -> bool {
        (self.bits >> site) & 1 == 1
    }

    /// Z eigenvalue on `site`: +1 for a clear bit, −1 for a set bit.
    #[inline]
    pub fn z(self, site: usize) -> i32 {
        1 - 2 * ((self.bits >> site) & 1) as i32
    }

    #[inline]
    pub fn flip(self, site: usize) -> Self {
        Self::from_raw(self.bits ^ (1 << site), self.len())
    }

    /// Exchange the values on sites `site` and `site + 1`.
    #[inline]
    pub fn swap_adjacent(self, site: usize) -> Self {
        Self::from_raw(self.bits ^ (0b11 << site), self.len())
    }
}

impl fmt::Display for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for site in (0..self.len()).rev() {
            f.write_str(if self.bit(site) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for Bitstring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}⟩")
    }
}

impl FromStr for Bitstring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('|')
            .and_then(|t| t.strip_suffix('⟩').or_else(|| t.strip_suffix('>')))
            .unwrap_or(s);
        if s.is_empty() || s.len() > MAX_SITES {
            return Err(Error::Parse {
                line: 0,
                message: format!("bitstring length {} outside 1..={MAX_SITES}", s.len()),
            });
        }
        let mut bits = 0u64;
        for ch in s.chars() {
            bits <<= 1;
            match ch {
                '0' => {}
                '1' => bits |= 1,
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("invalid character {other:?} in bitstring"),
                    })
                }
            }
        }
        Ok(Self::from_raw(bits, s.len()))
    }
}

impl Serialize for Bitstring {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bitstring {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
