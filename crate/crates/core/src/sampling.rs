//! Shot sampling, readout noise, post-selection and the counts file format.
//!
//! Random numbers come from ChaCha20 (`rand_chacha`), seeded with
//! `ChaCha20Rng::seed_from_u64(seed)`. Trotter step `k` of a run samples from
//! stream `k` of the run's master seed, so every step has an independent,
//! reproducible sequence. Uniform variates are `(next_u64 >> 11) * 2^-53`.
//!
//! Counts file:
//!
//! ```text
//! N=4 shots=400
//! 0011,168
//! 0101,40
//! ```
//!
//! Bitstrings are written `q_{N-1} … q_0`.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use indexmap::IndexMap;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::evolution::SectorState;

/// Name recorded in run metadata for the sampling generator.
pub const PRNG_NAME: &str = "ChaCha20 (rand_chacha 0.9, seed_from_u64, stream = Trotter step)";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountsOrigin {
    Simulated { seed: u64, stream: u64 },
    Ingested { file: String },
    Merged,
}

/// Synthetic readout noise: every qubit of every shot flips independently.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub bitflip_prob: f64,
}

impl NoiseSpec {
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn bitflip(prob: f64) -> Result<Self> {
        let spec = Self { bitflip_prob: prob };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.bitflip_prob) {
            return Err(Error::InvalidParams(format!(
                "bitflip_prob must be in [0, 1), got {}",
                self.bitflip_prob
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotCounts {
    pub n_sites: usize,
    pub n_shots: u64,
    /// Insertion-ordered by first occurrence.
    pub counts: IndexMap<Bitstring, u64>,
    pub origin: CountsOrigin,
}

impl ShotCounts {
    pub fn new(n_sites: usize, n_shots: u64, origin: CountsOrigin) -> Self {
        Self {
            n_sites,
            n_shots,
            counts: IndexMap::new(),
            origin,
        }
    }

    /// Build from `(bitstring, count)` pairs, validating widths and totals.
    pub fn from_pairs(
        n_sites: usize,
        n_shots: u64,
        pairs: impl IntoIterator<Item = (Bitstring, u64)>,
        origin: CountsOrigin,
    ) -> Result<Self> {
        let mut out = Self::new(n_sites, n_shots, origin);
        for (b, c) in pairs {
            if b.len() != n_sites {
                return Err(Error::SizeMismatch {
                    expected: n_sites,
                    found: b.len(),
                });
            }
            *out.counts.entry(b).or_insert(0) += c;
        }
        if out.total() > n_shots {
            return Err(Error::InvalidParams(format!(
                "counts sum to {} but only {n_shots} shots were taken",
                out.total()
            )));
        }
        Ok(out)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = Bitstring> + '_ {
        self.counts.keys().copied()
    }

    pub fn probability(&self, b: Bitstring) -> f64 {
        self.counts.get(&b).map_or(0.0, |&c| c as f64 / self.n_shots as f64)
    }

    /// Sum of two count sets over the same register.
    pub fn merge(&self, other: &ShotCounts) -> Result<ShotCounts> {
        if self.n_sites != other.n_sites {
            return Err(Error::SizeMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        let mut out = ShotCounts::new(self.n_sites, self.n_shots + other.n_shots, CountsOrigin::Merged);
        for (&b, &c) in self.counts.iter().chain(other.counts.iter()) {
            *out.counts.entry(b).or_insert(0) += c;
        }
        Ok(out)
    }
}

/// Generator for shots of Trotter step `stream` under master `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial sampling of `n_shots` from `|amplitude|^2`, then readout noise.
pub fn sample(state: &SectorState, n_shots: u64, seed: u64, noise: NoiseSpec) -> Result<ShotCounts> {
    sample_stream(state, n_shots, seed, 0, noise)
}

pub fn sample_stream(
    state: &SectorState,
    n_shots: u64,
    seed: u64,
    stream: u64,
    noise: NoiseSpec,
) -> Result<ShotCounts> {
    let mut rng = stream_rng(seed, stream);
    let mut counts = sample_with_rng(state, n_shots, &mut rng, noise)?;
    counts.origin = CountsOrigin::Simulated { seed, stream };
    Ok(counts)
}

pub fn sample_with_rng<R: Rng + ?Sized>(
    state: &SectorState,
    n_shots: u64,
    rng: &mut R,
    noise: NoiseSpec,
) -> Result<ShotCounts> {
    if n_shots == 0 {
        return Err(Error::InvalidParams("n_shots must be >= 1".into()));
    }
    noise.validate()?;
    let basis = state.basis();
    let n_sites = basis.n_sites();

    let mut cumulative = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    let total = acc;
    let last = cumulative.len() - 1;

    let mut counts = ShotCounts::new(n_sites, n_shots, CountsOrigin::Merged);
    for _ in 0..n_shots {
        let u = rng.random::<f64>() * total;
        let index = cumulative.partition_point(|&c| c <= u).min(last);
        let mut b = basis.unrank(index);
        if noise.bitflip_prob > 0.0 {
            for site in 0..n_sites {
                if rng.random::<f64>() < noise.bitflip_prob {
                    b = b.flip(site);
                }
            }
        }
        *counts.counts.entry(b).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Drop strings with nonzero total charge (weight != N/2), then strings whose
/// empirical probability `count / n_shots` is below `p_min`.
///
/// Probabilities are taken against the original shot total.
pub fn postselect(counts: &ShotCounts, p_min: f64) -> Result<ShotCounts> {
    if !(0.0..1.0).contains(&p_min) {
        return Err(Error::InvalidParams(format!("p_min must be in [0, 1), got {p_min}")));
    }
    if counts.n_sites % 2 != 0 {
        return Err(Error::InvalidParams(format!("N must be even, got {}", counts.n_sites)));
    }
    let weight = (counts.n_sites / 2) as u32;
    let shots = counts.n_shots as f64;
    let kept = counts
        .counts
        .iter()
        .filter(|(b, &c)| b.weight() == weight && c as f64 / shots >= p_min)
        .map(|(&b, &c)| (b, c))
        .collect();
    Ok(ShotCounts {
        n_sites: counts.n_sites,
        n_shots: counts.n_shots,
        counts: kept,
        origin: counts.origin.clone(),
    })
}

/// Parse the counts format from a reader. `source` is recorded as the origin.
pub fn read_counts<R: BufRead>(reader: R, source: &str) -> Result<ShotCounts> {
    let mut lines = reader.lines().enumerate();
    let (n_sites, n_shots) = loop {
        match lines.next() {
            None => {
                return Err(Error::Parse {
                    line: 1,
                    message: "missing header `N=<int> shots=<int>`".into(),
                })
            }
            Some((i, line)) => {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                break parse_header(line.trim(), i + 1)?;
            }
        }
    };

    let mut counts = ShotCounts::new(
        n_sites,
        n_shots,
        CountsOrigin::Ingested {
            file: source.to_string(),
        },
    );
    for (i, line) in lines {
        let line = line?;
        let line_no = i + 1;
        let row = line.trim();
        if row.is_empty() {
            continue;
        }
        let (bits, count) = row.split_once(',').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `bitstring,count`, got {row:?}"),
        })?;
        let b: Bitstring = bits.trim().parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                line: line_no,
                message,
            },
            other => other,
        })?;
        let count: u64 = count.trim().parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid count {:?}", count.trim()),
        })?;
        if b.len() != n_sites {
            return Err(Error::Schema {
                line: line_no,
                message: format!("bitstring {b} has {} bits, header says N={n_sites}", b.len()),
            });
        }
        *counts.counts.entry(b).or_insert(0) += count;
    }
    if counts.total() > n_shots {
        return Err(Error::Schema {
            line: 1,
            message: format!("counts sum to {} but header says shots={n_shots}", counts.total()),
        });
    }
    Ok(counts)
}

fn parse_header(line: &str, line_no: usize) -> Result<(usize, u64)> {
    let bad = |message: String| Error::Parse {
        line: line_no,
        message,
    };
    let mut n = None;
    let mut shots = None;
    for field in line.split_whitespace() {
        match field.split_once('=') {
            Some(("N", v)) => n = Some(v.parse::<usize>().map_err(|_| bad(format!("invalid N {v:?}")))?),
            Some(("shots", v)) => {
                shots = Some(v.parse::<u64>().map_err(|_| bad(format!("invalid shots {v:?}")))?)
            }
            _ => return Err(bad(format!("unexpected header field {field:?}"))),
        }
    }
    match (n, shots) {
        (Some(n), Some(s)) if n >= 1 && n <= crate::bitstring::MAX_SITES && s >= 1 => Ok((n, s)),
        (Some(_), Some(_)) => Err(bad("N and shots must be positive".into())),
        _ => Err(bad("header must be `N=<int> shots=<int>`".into())),
    }
}

pub fn ingest_counts(path: impl AsRef<Path>) -> Result<ShotCounts> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_counts(std::io::BufReader::new(file), &path.display().to_string())
}

pub fn write_counts<W: Write>(counts: &ShotCounts, mut writer: W) -> Result<()> {
    writeln!(writer, "N={} shots={}", counts.n_sites, counts.n_shots)?;
    for (b, c) in &counts.counts {
        writeln!(writer, "{b},{c}")?;
    }
    Ok(())
}

impl fmt::Display for ShotCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N={} shots={}", self.n_sites, self.n_shots)?;
        for (b, c) in &self.counts {
            writeln!(f, "{b},{c}")?;
        }
        Ok(())
    }
}
