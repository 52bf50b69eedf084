use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::sampling::ShotCounts;

/// Insertion-ordered set of zero-charge strings with the Trotter step at which
/// each was first sampled.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    n_sites: usize,
    strings: IndexMap<Bitstring, usize>,
}

impl SubspaceBasis {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 || n_sites % 2 != 0 || n_sites > crate::bitstring::MAX_SITES {
            return Err(Error::InvalidParams(format!("N must be even and in 2..=64, got {n_sites}")));
        }
        Ok(Self {
            n_sites,
            strings: IndexMap::new(),
        })
    }

    /// Basis from explicit strings, all tagged with step `step`.
    pub fn from_strings(n_sites: usize, strings: impl IntoIterator<Item = Bitstring>, step: usize) -> Result<Self> {
        let mut basis = Self::new(n_sites)?;
        for b in strings {
            basis.insert(b, step)?;
        }
        Ok(basis)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<Bitstring> {
        self.strings.get_index(index).map(|(b, _)| *b)
    }

    pub fn index_of(&self, b: Bitstring) -> Option<usize> {
        self.strings.get_index_of(&b)
    }

    pub fn contains(&self, b: Bitstring) -> bool {
        self.strings.contains_key(&b)
    }

    /// Step at which entry `index` first appeared.
    pub fn provenance(&self, index: usize) -> Option<usize> {
        self.strings.get_index(index).map(|(_, k)| *k)
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = Bitstring> + '_ {
        self.strings.keys().copied()
    }

    pub fn strings(&self) -> Vec<Bitstring> {
        self.iter().collect()
    }

    /// Adds `b` unless present. Returns whether it was new.
    pub fn insert(&mut self, b: Bitstring, step: usize) -> Result<bool> {
        if b.len() != self.n_sites {
            return Err(Error::SizeMismatch {
                expected: self.n_sites,
                found: b.len(),
            });
        }
        let weight = (self.n_sites / 2) as u32;
        if b.weight() != weight {
            return Err(Error::OutOfSector {
                bits: b.to_string(),
                weight: b.weight(),
                expected: weight,
            });
        }
        if self.strings.contains_key(&b) {
            return Ok(false);
        }
        self.strings.insert(b, step);
        Ok(true)
    }

    /// In-place union with the support of `counts`. Returns the number of new strings.
    pub fn extend(&mut self, counts: &ShotCounts, step: usize) -> Result<usize> {
        if counts.n_sites != self.n_sites {
            return Err(Error::SizeMismatch {
                expected: self.n_sites,
                found: counts.n_sites,
            });
        }
        let mut added = 0;
        for (&b, &c) in &counts.counts {
            if c > 0 && self.insert(b, step)? {
                added += 1;
            }
        }
        Ok(added)
    }

    /// The first `dim` entries, i.e. the basis as it stood when it had that size.
    pub fn truncated(&self, dim: usize) -> SubspaceBasis {
        Self {
            n_sites: self.n_sites,
            strings: self.strings.iter().take(dim).map(|(b, k)| (*b, *k)).collect(),
        }
    }
}

/// Union of `basis` with the support of post-selected `counts`, new strings
/// tagged with `step`.
pub fn extend_basis(basis: &SubspaceBasis, counts: &ShotCounts, step: usize) -> Result<SubspaceBasis> {
    let mut out = basis.clone();
    out.extend(counts, step)?;
    Ok(out)
}
