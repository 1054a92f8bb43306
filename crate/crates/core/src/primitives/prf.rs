use super::owf::{lane, mix, truncate, DOMAIN_EXPAND, DOMAIN_PRF};
use super::PrimitiveError;
use crate::qsim::BitString;

/// `λ`-bit PRF key. The same width is used for inputs and outputs.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrfKey(BitString);

impl PrfKey {
    pub fn new(key: BitString) -> Result<Self, PrimitiveError> {
        if key.is_empty() || key.len() > 64 {
            return Err(PrimitiveError::InvalidParams(format!(
                "PRF key width must lie in 1..=64, got {}",
                key.len()
            )));
        }
        Ok(Self(key))
    }

    pub fn lambda(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }
}

/// Keyed mixing function: the key is folded into the state every round.
pub fn prf_eval(key: &PrfKey, x: &BitString, rounds: u32) -> Result<BitString, PrimitiveError> {
    let lambda = key.lambda();
    if x.len() != lambda {
        return Err(PrimitiveError::LengthMismatch {
            expected: lambda,
            found: x.len(),
        });
    }
    let k = key.0.to_u64()?;
    let out = mix(x.to_u64()?, lane(DOMAIN_PRF, lambda, lambda), k, rounds);
    Ok(BitString::from_u64(truncate(out, lambda), lambda)?)
}

/// Deterministically stretches `coins` into `blocks` strings of `width` bits each.
/// Block `j` is the keyed mixing function on counter `j`.
pub fn expand_coins(
    coins: &BitString,
    blocks: usize,
    width: usize,
    rounds: u32,
) -> Result<Vec<BitString>, PrimitiveError> {
    if coins.is_empty() || coins.len() > 64 || width == 0 || width > 64 {
        return Err(PrimitiveError::InvalidParams(format!(
            "coin expansion needs 1..=64 coin bits and block width (got {}, {width})",
            coins.len()
        )));
    }
    let key = coins.to_u64()?;
    let lane = lane(DOMAIN_EXPAND, coins.len(), width);
    // at least two rounds so that counters never map to themselves
    let rounds = rounds.max(2);
    (0..blocks as u64)
        .map(|j| {
            let v = truncate(mix(j, lane, key, rounds), width);
            Ok(BitString::from_u64(v, width)?)
        })
        .collect()
}
