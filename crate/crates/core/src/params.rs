use thiserror::Error;

use crate::ots::{OtsError, OtsParams};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid parameters: {0}")]
pub struct ParamsError(pub String);

/// Knobs shared by every scheme in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeParams {
    /// Security parameter: PRF width, QKD key length.
    pub lambda: usize,
    /// Lamport preimage width; also `s(1)`, the one-bit signature length.
    pub preimage_bits: usize,
    pub owf_rounds: u32,
    /// Coin width for OTS key generation outside the PRF-derandomized path.
    pub ots_seed_bits: usize,
}

impl Default for SchemeParams {
    fn default() -> Self {
        Self {
            lambda: 8,
            preimage_bits: 8,
            owf_rounds: 4,
            ots_seed_bits: 64,
        }
    }
}

impl SchemeParams {
    pub fn new(lambda: usize, preimage_bits: usize) -> Result<Self, ParamsError> {
        let p = Self {
            lambda,
            preimage_bits,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_owf_rounds(mut self, rounds: u32) -> Self {
        self.owf_rounds = rounds;
        self
    }

    pub fn with_ots_seed_bits(mut self, bits: usize) -> Self {
        self.ots_seed_bits = bits;
        self
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(1..=64).contains(&self.lambda) {
            return Err(ParamsError(format!("lambda must lie in 1..=64, got {}", self.lambda)));
        }
        if !(1..=64).contains(&self.preimage_bits) {
            return Err(ParamsError(format!(
                "preimage_bits must lie in 1..=64, got {}",
                self.preimage_bits
            )));
        }
        if !(1..=64).contains(&self.ots_seed_bits) {
            return Err(ParamsError(format!(
                "ots_seed_bits must lie in 1..=64, got {}",
                self.ots_seed_bits
            )));
        }
        Ok(())
    }

    /// `s(1)`.
    pub fn sig_bits(&self) -> usize {
        self.preimage_bits
    }

    /// Width of a public-key register, `1 + s(1)`.
    pub fn register_qubits(&self) -> usize {
        1 + self.sig_bits()
    }

    /// One-bit OTS used by the everlasting scheme and QKD instances.
    pub fn bit_ots(&self) -> Result<OtsParams, OtsError> {
        OtsParams::new(1, self.preimage_bits, self.ots_seed_bits, self.owf_rounds)
    }

    /// One-bit OTS whose coins come from a `λ`-bit PRF output.
    pub fn prf_ots(&self) -> Result<OtsParams, OtsError> {
        OtsParams::new(1, self.preimage_bits, self.lambda, self.owf_rounds)
    }
}
