//! Fixed-length vectors over GF(2).
//!
//! Bit 0 is the leftmost symbol of a ket as written, so `"1011"` has bit 0 set.
//! Hex encodings pack bits MSB-first: bit 0 is the high bit of the first byte
//! and trailing pad bits of the last byte must be zero.

use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitError {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("invalid bit character {0:?}")]
    InvalidChar(char),
    #[error("empty bit string")]
    Empty,
    #[error("bad hex encoding: {0}")]
    Hex(String),
    #[error("width {0} exceeds 64 bits")]
    TooWide(usize),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitString {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut out = Self::zeros(len);
        for w in out.words.iter_mut() {
            *w = u64::MAX;
        }
        out.clear_tail();
        out
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::zeros(0);
        for b in bits {
            out.push(b);
        }
        out
    }

    /// The low `width` bits of `value`, most significant first.
    pub fn from_u64(value: u64, width: usize) -> Result<Self, BitError> {
        if width > 64 {
            return Err(BitError::TooWide(width));
        }
        let mut out = Self::zeros(width);
        for i in 0..width {
            out.set(i, (value >> (width - 1 - i)) & 1 == 1);
        }
        Ok(out)
    }

    /// Inverse of [`BitString::from_u64`].
    pub fn to_u64(&self) -> Result<u64, BitError> {
        if self.len > 64 {
            return Err(BitError::TooWide(self.len));
        }
        Ok(self.iter().fold(0u64, |acc, b| (acc << 1) | b as u64))
    }

    pub fn random<R: RngCore + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut out = Self::zeros(len);
        for w in out.words.iter_mut() {
            *w = rng.next_u64();
        }
        out.clear_tail();
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        (self.words[index / 64] >> (index % 64)) & 1 == 1
    }

    pub fn try_get(&self, index: usize) -> Result<bool, BitError> {
        if index >= self.len {
            return Err(BitError::IndexOutOfRange { index, len: self.len });
        }
        Ok(self.get(index))
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range {}", self.len);
        let mask = 1u64 << (index % 64);
        if value {
            self.words[index / 64] |= mask;
        } else {
            self.words[index / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, index: usize) {
        let v = self.get(index);
        self.set(index, !v);
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(64) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    /// Index of the first set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn check_len(&self, other: &Self) -> Result<(), BitError> {
        if self.len != other.len {
            return Err(BitError::LengthMismatch {
                left: self.len,
                right: other.len,
            });
        }
        Ok(())
    }

    pub fn xor(&self, other: &Self) -> Result<Self, BitError> {
        self.check_len(other)?;
        Ok(Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        })
    }

    pub fn and(&self, other: &Self) -> Result<Self, BitError> {
        self.check_len(other)?;
        Ok(Self {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        })
    }

    /// Inner product mod 2.
    pub fn dot(&self, other: &Self) -> Result<bool, BitError> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones % 2 == 1)
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    pub fn extend(&mut self, other: &Self) {
        for b in other.iter() {
            self.push(b);
        }
    }

    /// `len` bits starting at `start`.
    pub fn slice(&self, start: usize, len: usize) -> Result<Self, BitError> {
        if start + len > self.len {
            return Err(BitError::IndexOutOfRange {
                index: start + len,
                len: self.len,
            });
        }
        Ok(Self::from_bits((start..start + len).map(|i| self.get(i))))
    }

    /// Splits into `(self[..at], self[at..])`.
    pub fn split_at(&self, at: usize) -> Result<(Self, Self), BitError> {
        Ok((self.slice(0, at)?, self.slice(at, self.len - at)?))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.len.div_ceil(8)];
        for (i, b) in self.iter().enumerate() {
            if b {
                out[i / 8] |= 0x80 >> (i % 8);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8], len: usize) -> Result<Self, BitError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(BitError::Hex(format!(
                "expected {} bytes for {len} bits, got {}",
                len.div_ceil(8),
                bytes.len()
            )));
        }
        let mut out = Self::zeros(len);
        for i in 0..bytes.len() * 8 {
            let bit = bytes[i / 8] & (0x80 >> (i % 8)) != 0;
            if i < len {
                out.set(i, bit);
            } else if bit {
                return Err(BitError::Hex("nonzero padding bits".into()));
            }
        }
        Ok(out)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }

    pub fn from_hex(s: &str, len: usize) -> Result<Self, BitError> {
        let bytes = hex::decode(s).map_err(|e| BitError::Hex(e.to_string()))?;
        Self::from_bytes(&bytes, len)
    }

    fn clear_tail(&mut self) {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(BitError::Empty);
        }
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(BitError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bits)
    }
}

/// Shorthand for literal bit strings in tests and examples. Panics on bad input.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("valid bit literal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn literal_ordering() {
        let b = bits("1011");
        assert_eq!(b.len(), 4);
        assert!(b.get(0) && !b.get(1) && b.get(2) && b.get(3));
        assert_eq!(b.to_u64().unwrap(), 0b1011);
        assert_eq!(BitString::from_u64(0b1011, 4).unwrap(), b);
    }

    #[test]
    fn gf2_ops() {
        let a = bits("1100");
        let b = bits("1010");
        assert_eq!(a.xor(&b).unwrap(), bits("0110"));
        assert_eq!(a.and(&b).unwrap(), bits("1000"));
        assert!(a.dot(&b).unwrap());
        assert!(!bits("101").dot(&bits("101")).unwrap());
        assert_eq!(
            a.dot(&bits("1")),
            Err(BitError::LengthMismatch { left: 4, right: 1 })
        );
    }

    #[test]
    fn hex_layout() {
        let b = bits("101");
        assert_eq!(b.to_hex(), "a0");
        assert_eq!(BitString::from_hex("a0", 3).unwrap(), b);
        assert!(BitString::from_hex("a1", 3).is_err());
        assert!(BitString::from_hex("a0a0", 3).is_err());
    }

    #[test]
    fn parse_rejects_junk() {
        assert_eq!("".parse::<BitString>(), Err(BitError::Empty));
        assert_eq!("10x".parse::<BitString>(), Err(BitError::InvalidChar('x')));
    }

    #[test]
    fn wide_strings_span_words() {
        let mut b = BitString::zeros(130);
        b.set(129, true);
        b.set(64, true);
        assert_eq!(b.count_ones(), 2);
        assert_eq!(b.first_one(), Some(64));
        let (l, r) = b.split_at(65).unwrap();
        assert_eq!(l.len(), 65);
        assert_eq!(r.len(), 65);
        assert_eq!(l.concat(&r), b);
    }

    fn arb_pair() -> impl Strategy<Value = (Vec<bool>, Vec<bool>)> {
        (1usize..150).prop_flat_map(|n| {
            (
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
        })
    }

    proptest! {
        #[test]
        fn dot_is_bilinear((a, b) in arb_pair(), c in any::<u64>()) {
            let a = BitString::from_bits(a);
            let b = BitString::from_bits(b);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(c);
            let x = BitString::random(a.len(), &mut rng);
            let lhs = a.xor(&b).unwrap().dot(&x).unwrap();
            prop_assert_eq!(lhs, a.dot(&x).unwrap() ^ b.dot(&x).unwrap());
        }

        #[test]
        fn text_and_hex_round_trip(v in proptest::collection::vec(any::<bool>(), 1..200)) {
            let b = BitString::from_bits(v);
            prop_assert_eq!(b.to_string().parse::<BitString>().unwrap(), b.clone());
            prop_assert_eq!(BitString::from_hex(&b.to_hex(), b.len()).unwrap(), b);
        }
    }

    use rand::SeedableRng;
}
