//! Classical building blocks: toy one-way function, PRF, Toeplitz extractor
//! and seeded randomness streams.

mod owf;
mod prf;
mod rng;
mod toeplitz;

use thiserror::Error;

use crate::qsim::BitError;

pub use owf::{owf_eval, OwfFamily, OwfParams};
pub use prf::{expand_coins, prf_eval, PrfKey};
pub use rng::RngStream;
pub use toeplitz::{hash_eval, hash_sample, ToeplitzHash};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrimitiveError {
    #[error("length mismatch: expected {expected} bits, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Bits(#[from] BitError),
}
