//! A pinned, deliberately weak bit-mixing function.
//!
//! It instantiates the one-way function, the PRF and the coin expander used by
//! key generation. It is NOT cryptographically secure; its only job is to make
//! preimage search cost tunable via the input width and the round count.
//!
//! One round on the 128-bit state `(a, b)` with key `k` and round index `r`:
//!
//! ```text
//! a ^= k ^ RC[r mod 16]
//! a  = S(a)
//! b ^= rotl(a, 19) ^ rotl(a, 43)
//! b  = S(b ^ RC[(r + 8) mod 16])
//! a ^= rotl(b, 7) ^ rotr(b, 29)
//! ```
//!
//! `S` applies the 4-bit S-box below to every nibble. The output is `a ^ b`
//! truncated to its low `output_bits`. Inputs enter as the big-endian value of
//! the bit string, so bit 0 of the string is the most significant input bit.

use std::fmt;
use std::str::FromStr;

use super::PrimitiveError;
use crate::qsim::BitString;

const SBOX: [u8; 16] = [
    0xc, 0x5, 0x6, 0xb, 0x9, 0x0, 0xa, 0xd, 0x3, 0xe, 0xf, 0x8, 0x4, 0x7, 0x1, 0x2,
];

const RC: [u64; 16] = [
    0x6a09e667f3bcc908,
    0xbb67ae8584caa73b,
    0x3c6ef372fe94f82b,
    0xa54ff53a5f1d36f1,
    0x510e527fade682d1,
    0x9b05688c2b3e6c1f,
    0x1f83d9abfb41bd6b,
    0x5be0cd19137e2179,
    0x428a2f98d728ae22,
    0x7137449123ef65cd,
    0xb5c0fbcfec4d3b2f,
    0xe9b5dba58189dbbc,
    0x3956c25bf348b538,
    0x59f111f1b605d019,
    0x923f82a4af194f9b,
    0xab1c5ed5da6d8118,
];

/// Domain separators placed in the initial `b` lane.
pub(crate) const DOMAIN_OWF: u64 = 0x4f57_4600_0000_0000;
pub(crate) const DOMAIN_PRF: u64 = 0x5052_4600_0000_0000;
pub(crate) const DOMAIN_EXPAND: u64 = 0x4558_5000_0000_0000;

#[inline]
fn sbox64(x: u64) -> u64 {
    let mut out = 0u64;
    for i in 0..16 {
        let nib = ((x >> (4 * i)) & 0xf) as usize;
        out |= (SBOX[nib] as u64) << (4 * i);
    }
    out
}

/// The raw keyed permutation-and-fold.
pub(crate) fn mix(input: u64, lane: u64, key: u64, rounds: u32) -> u64 {
    let (mut a, mut b) = (input, lane);
    for r in 0..rounds as usize {
        a ^= key ^ RC[r % 16];
        a = sbox64(a);
        b ^= a.rotate_left(19) ^ a.rotate_left(43);
        b = sbox64(b ^ RC[(r + 8) % 16]);
        a ^= b.rotate_left(7) ^ b.rotate_right(29);
    }
    a ^ b
}

#[inline]
pub(crate) fn truncate(v: u64, bits: usize) -> u64 {
    if bits >= 64 {
        v
    } else {
        v & ((1u64 << bits) - 1)
    }
}

pub(crate) fn lane(domain: u64, in_bits: usize, out_bits: usize) -> u64 {
    domain ^ ((in_bits as u64) << 8) ^ out_bits as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OwfFamily {
    /// The rotate/xor/S-box function documented at the top of this module.
    Mix64V1,
}

impl OwfFamily {
    pub fn id(self) -> &'static str {
        match self {
            OwfFamily::Mix64V1 => "mix64-v1",
        }
    }
}

impl fmt::Display for OwfFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for OwfFamily {
    type Err = PrimitiveError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mix64-v1" => Ok(OwfFamily::Mix64V1),
            other => Err(PrimitiveError::InvalidParams(format!("unknown OWF family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OwfParams {
    pub input_bits: usize,
    pub output_bits: usize,
    pub family: OwfFamily,
    pub rounds: u32,
}

impl OwfParams {
    pub const MAX_BITS: usize = 64;

    pub fn new(input_bits: usize, output_bits: usize, rounds: u32) -> Result<Self, PrimitiveError> {
        let p = Self {
            input_bits,
            output_bits,
            family: OwfFamily::Mix64V1,
            rounds,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PrimitiveError> {
        if !(1..=Self::MAX_BITS).contains(&self.input_bits)
            || !(1..=Self::MAX_BITS).contains(&self.output_bits)
        {
            return Err(PrimitiveError::InvalidParams(format!(
                "OWF widths must lie in 1..=64 (got {} -> {})",
                self.input_bits, self.output_bits
            )));
        }
        Ok(())
    }

    /// Evaluation on raw integers; callers guarantee `x < 2^input_bits`.
    #[inline]
    pub fn eval_u64(&self, x: u64) -> u64 {
        let lane = lane(DOMAIN_OWF, self.input_bits, self.output_bits);
        truncate(mix(x, lane, 0, self.rounds), self.output_bits)
    }
}

pub fn owf_eval(params: &OwfParams, x: &BitString) -> Result<BitString, PrimitiveError> {
    if x.len() != params.input_bits {
        return Err(PrimitiveError::LengthMismatch {
            expected: params.input_bits,
            found: x.len(),
        });
    }
    let y = params.eval_u64(x.to_u64()?);
    Ok(BitString::from_u64(y, params.output_bits)?)
}
