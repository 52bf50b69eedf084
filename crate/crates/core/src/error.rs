use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Model or run parameters violate their invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A bitstring outside the zero-charge (weight N/2) sector was supplied
    /// where only in-sector strings are allowed.
    #[error("bitstring {bits} has Hamming weight {weight}, expected {expected}")]
    OutOfSector {
        bits: String,
        weight: u32,
        expected: u32,
    },

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    /// Malformed line in a counts file.
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Well-formed input that contradicts its own header.
    #[error("schema error on line {line}: {message}")]
    Schema { line: usize, message: String },

    /// The requested sector does not fit in the configured memory budget.
    #[error(
        "N={n_sites} needs a sector of dimension {dim} (~{} MiB), over the {} MiB budget",
        required_bytes / (1 << 20),
        budget_bytes / (1 << 20)
    )]
    Infeasible {
        n_sites: usize,
        dim: u64,
        required_bytes: u64,
        budget_bytes: u64,
    },

    #[error("eigensolver did not converge after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Post-selection left nothing to diagonalize.
    #[error("empty subspace: {0}")]
    EmptySubspace(String),

    #[error("phase transition detection failed: {0}")]
    Detection(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
