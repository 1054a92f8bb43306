use std::fmt;
use std::str::FromStr;

use rand::RngCore;

use super::PrimitiveError;
use crate::qsim::BitString;

/// Toeplitz matrix over GF(2) mapping `4λ` bits to `λ` bits.
///
/// The matrix is described by its `5λ - 1` diagonals:
/// `T[i][j] = seed[j - i + λ - 1]`, so row `i` is the window
/// `seed[λ-1-i .. λ-1-i+4λ]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ToeplitzHash {
    lambda: usize,
    seed: BitString,
}

impl ToeplitzHash {
    pub fn seed_len(lambda: usize) -> usize {
        5 * lambda - 1
    }

    pub fn from_seed(lambda: usize, seed: BitString) -> Result<Self, PrimitiveError> {
        if lambda == 0 {
            return Err(PrimitiveError::InvalidParams("λ must be positive".into()));
        }
        if seed.len() != Self::seed_len(lambda) {
            return Err(PrimitiveError::LengthMismatch {
                expected: Self::seed_len(lambda),
                found: seed.len(),
            });
        }
        Ok(Self { lambda, seed })
    }

    pub fn sample<R: RngCore + ?Sized>(rng: &mut R, lambda: usize) -> Result<Self, PrimitiveError> {
        let seed = BitString::random(Self::seed_len(lambda.max(1)), rng);
        Self::from_seed(lambda, seed)
    }

    pub fn lambda(&self) -> usize {
        self.lambda
    }

    pub fn input_bits(&self) -> usize {
        4 * self.lambda
    }

    pub fn seed(&self) -> &BitString {
        &self.seed
    }

    pub fn row(&self, i: usize) -> BitString {
        self.seed
            .slice(self.lambda - 1 - i, 4 * self.lambda)
            .expect("window inside seed")
    }

    pub fn eval(&self, x: &BitString) -> Result<BitString, PrimitiveError> {
        if x.len() != self.input_bits() {
            return Err(PrimitiveError::LengthMismatch {
                expected: self.input_bits(),
                found: x.len(),
            });
        }
        Ok(BitString::from_bits(
            (0..self.lambda).map(|i| self.row(i).dot(x).expect("equal widths")),
        ))
    }
}

/// `toeplitz l=<λ> <seed hex>`.
impl fmt::Display for ToeplitzHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "toeplitz l={} {}", self.lambda, self.seed.to_hex())
    }
}

impl FromStr for ToeplitzHash {
    type Err = PrimitiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PrimitiveError::Parse(format!("bad hash descriptor {s:?}"));
        let mut parts = s.split_whitespace();
        if parts.next() != Some("toeplitz") {
            return Err(bad());
        }
        let lambda: usize = parts
            .next()
            .and_then(|p| p.strip_prefix("l="))
            .and_then(|v| v.parse().ok())
            .filter(|l| *l > 0)
            .ok_or_else(bad)?;
        let seed_hex = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() {
            return Err(bad());
        }
        let seed = BitString::from_hex(seed_hex, Self::seed_len(lambda))?;
        Self::from_seed(lambda, seed)
    }
}

pub fn hash_sample<R: RngCore + ?Sized>(rng: &mut R, lambda: usize) -> Result<ToeplitzHash, PrimitiveError> {
    ToeplitzHash::sample(rng, lambda)
}

pub fn hash_eval(h: &ToeplitzHash, x: &BitString) -> Result<BitString, PrimitiveError> {
    h.eval(x)
}
