//! Exact simulation of the states, projectors and measurements the schemes use.

mod bits;
mod dense;
mod sparse;

use thiserror::Error;

pub use bits::{bits, BitError, BitString};
pub use dense::{dense_hadamard_distribution, DenseState, DEFAULT_DENSE_MAX_QUBITS};
pub use sparse::{
    BasisPredicate, FnPredicate, HadamardLaw, ProjectOutcome, Sign, SparseState, Term,
    DEFAULT_MAX_TERMS,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsimError {
    #[error("basis strings of a superposition must differ")]
    EqualBasisStrings,
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },
    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },
    #[error("{count} terms outside the allowed range 1..={max}")]
    TermCount { count: usize, max: usize },
    #[error("closed-form Hadamard sampling supports at most 2 terms, got {0}")]
    UnsupportedTermCount(usize),
    #[error("{n_qubits} qubits exceeds the dense backend limit of {max}")]
    TooManyQubits { n_qubits: usize, max: usize },
    #[error("state has no qubits")]
    NoQubits,
    #[error("amplitudes not normalized (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("state text line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Bits(#[from] BitError),
}
