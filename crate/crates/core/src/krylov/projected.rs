use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::bitstring::Bitstring;
use crate::error::{Error, Result};
use crate::hamiltonian::{diagonal_energy, for_each_hop, SchwingerParams};
use crate::sector::SectorBasis;

use super::basis::SubspaceBasis;

/// Rows at or above this count are built and multiplied in parallel.
const PARALLEL_ROWS: usize = 4096;

/// `H^P_{mn} = <b_m|W|b_n>` over a subspace, stored as a diagonal plus a
/// compressed-row hopping pattern.
///
/// Every off-diagonal element of the model equals `x`, so only the sparsity
/// pattern is stored.
#[derive(Clone, Debug)]
pub struct ProjectedHamiltonian {
    params: SchwingerParams,
    strings: Vec<Bitstring>,
    diagonal: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
}

impl ProjectedHamiltonian {
    fn assemble(params: &SchwingerParams, strings: Vec<Bitstring>, rows: Vec<Vec<u32>>) -> Self {
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::with_capacity(rows.iter().map(Vec::len).sum());
        for row in rows {
            cols.extend(row);
            row_ptr.push(cols.len());
        }
        let mut hp = Self {
            params: *params,
            strings,
            diagonal: Vec::new(),
            row_ptr,
            cols,
        };
        hp.refresh_diagonal();
        hp
    }

    fn refresh_diagonal(&mut self) {
        let params = self.params;
        self.diagonal = if self.strings.len() >= PARALLEL_ROWS {
            self.strings.par_iter().map(|&b| diagonal_energy(b, &params)).collect()
        } else {
            self.strings.iter().map(|&b| diagonal_energy(b, &params)).collect()
        };
    }

    /// Same subspace at different model parameters. Only the diagonal and the
    /// hopping element depend on them, so the pattern is reused.
    pub fn with_params(&self, params: &SchwingerParams) -> Result<Self> {
        if params.n_sites != self.params.n_sites {
            return Err(Error::SizeMismatch {
                expected: self.params.n_sites,
                found: params.n_sites,
            });
        }
        let mut out = Self {
            params: *params,
            strings: self.strings.clone(),
            diagonal: Vec::new(),
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
        };
        out.refresh_diagonal();
        Ok(out)
    }

    pub fn set_l0(&mut self, l0: f64) {
        self.params.l0 = l0;
        self.refresh_diagonal();
    }

    pub fn params(&self) -> &SchwingerParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn strings(&self) -> &[Bitstring] {
        &self.strings
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn hopping(&self) -> f64 {
        self.params.x
    }

    /// Column indices of the off-diagonal entries in row `i`.
    pub fn row(&self, i: usize) -> &[u32] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.cols.len()
    }

    /// All stored off-diagonal `(i, j, value)` triples; both orientations appear.
    pub fn offdiag(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let x = self.hopping();
        (0..self.dim()).flat_map(move |i| self.row(i).iter().map(move |&j| (i, j as usize, x)))
    }

    /// `y = H^P v`.
    pub fn matvec(&self, v: &[f64], y: &mut [f64]) {
        debug_assert_eq!(v.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        let x = self.hopping();
        let row = |(i, out): (usize, &mut f64)| {
            let hop: f64 = self.row(i).iter().map(|&j| v[j as usize]).sum();
            *out = self.diagonal[i] * v[i] + x * hop;
        };
        if self.dim() >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(row);
        } else {
            y.iter_mut().enumerate().for_each(row);
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut h = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.diagonal));
        for (i, j, x) in self.offdiag() {
            h[(i, j)] = x;
        }
        h
    }
}

/// Projects the Hamiltonian onto a sampled subspace. Neighbors are found by
/// hash lookup, so the cost is `O(dim * N)`.
pub fn project(params: &SchwingerParams, basis: &SubspaceBasis) -> Result<ProjectedHamiltonian> {
    params.validate()?;
    if basis.n_sites() != params.n_sites {
        return Err(Error::SizeMismatch {
            expected: params.n_sites,
            found: basis.n_sites(),
        });
    }
    if basis.is_empty() {
        return Err(Error::EmptySubspace("cannot project onto an empty basis".into()));
    }
    let strings = basis.strings();
    let row = |b: &Bitstring| {
        let mut row = Vec::new();
        for_each_hop(*b, params, |nb, _| {
            if let Some(j) = basis.index_of(nb) {
                row.push(j as u32);
            }
        });
        row
    };
    let rows: Vec<Vec<u32>> = if strings.len() >= PARALLEL_ROWS {
        strings.par_iter().map(row).collect()
    } else {
        strings.iter().map(row).collect()
    };
    Ok(ProjectedHamiltonian::assemble(params, strings, rows))
}

/// The Hamiltonian on the whole fixed-weight sector, with neighbors located by
/// combinatorial rank instead of hashing.
pub fn project_sector(params: &SchwingerParams, sector: &SectorBasis) -> Result<ProjectedHamiltonian> {
    params.validate()?;
    if sector.n_sites() != params.n_sites {
        return Err(Error::SizeMismatch {
            expected: params.n_sites,
            found: sector.n_sites(),
        });
    }
    if u32::try_from(sector.dim()).is_err() {
        return Err(Error::InvalidParams(format!("sector dimension {} exceeds u32 indexing", sector.dim())));
    }
    let strings: Vec<Bitstring> = (0..sector.dim()).into_par_iter().map(|r| sector.unrank(r)).collect();
    let rows: Vec<Vec<u32>> = strings
        .par_iter()
        .map(|&b| {
            let mut row = Vec::new();
            for_each_hop(b, params, |nb, _| row.push(sector.rank(nb) as u32));
            row
        })
        .collect();
    Ok(ProjectedHamiltonian::assemble(params, strings, rows))
}
