//! Lamport one-time signatures over the toy one-way function.
//!
//! A signing key holds `2 × message_bits` preimages of `preimage_bits` each;
//! signing message bit `i` with value `b` reveals `preimages[b][i]`. The
//! signature is the concatenation of revealed preimages, slot 0 first. That
//! layout matters: signature bits are fed into inner products by the
//! everlasting encryption scheme.
//!
//! Plain Lamport is strongly unforgeable only while the OWF has no second
//! preimages in the searched space, so the OWF output width equals the
//! preimage width and forgery rates are measured rather than assumed.

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::primitives::{expand_coins, OwfParams, PrimitiveError};
use crate::qsim::{BasisPredicate, BitError, BitString};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OtsError {
    #[error("coin length mismatch: expected {expected}, found {found}")]
    CoinLengthMismatch { expected: usize, found: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("keys were generated under different parameters")]
    ParamsMismatch,
    #[error("invalid OTS parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Bits(#[from] BitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OtsParams {
    pub message_bits: usize,
    pub preimage_bits: usize,
    /// Width of the coin string key generation is derived from.
    pub seed_bits: usize,
    pub owf: OwfParams,
}

impl OtsParams {
    pub fn new(
        message_bits: usize,
        preimage_bits: usize,
        seed_bits: usize,
        owf_rounds: u32,
    ) -> Result<Self, OtsError> {
        if message_bits == 0 {
            return Err(OtsError::InvalidParams("message_bits must be positive".into()));
        }
        if !(1..=64).contains(&seed_bits) {
            return Err(OtsError::InvalidParams(format!(
                "seed_bits must lie in 1..=64, got {seed_bits}"
            )));
        }
        let owf = OwfParams::new(preimage_bits, preimage_bits, owf_rounds)?;
        Ok(Self {
            message_bits,
            preimage_bits,
            seed_bits,
            owf,
        })
    }

    /// Same key material parameters, different message width.
    pub fn with_message_bits(&self, message_bits: usize) -> Result<Self, OtsError> {
        Self::new(message_bits, self.preimage_bits, self.seed_bits, self.owf.rounds)
    }

    /// `s(message_bits)`: signature length in bits.
    pub fn signature_bits(&self) -> usize {
        self.message_bits * self.preimage_bits
    }

    pub fn coin_bits(&self) -> usize {
        self.seed_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OtsSigningKey {
    params: OtsParams,
    preimages: [Vec<u64>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OtsVerifyKey {
    params: OtsParams,
    images: [Vec<u64>; 2],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OtsSignature(BitString);

impl OtsSignature {
    pub fn from_bits(bits: BitString) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &BitString {
        &self.0
    }

    pub fn into_bits(self) -> BitString {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn slot(&self, i: usize, width: usize) -> u64 {
        (0..width).fold(0u64, |acc, j| (acc << 1) | self.0.get(i * width + j) as u64)
    }

    fn from_slots(slots: &[u64], width: usize) -> Self {
        let mut bits = BitString::zeros(0);
        for s in slots {
            bits.extend(&BitString::from_u64(*s, width).expect("width <= 64"));
        }
        Self(bits)
    }
}

impl OtsSigningKey {
    pub fn params(&self) -> &OtsParams {
        &self.params
    }

    pub fn preimage(&self, b: bool, i: usize) -> BitString {
        BitString::from_u64(self.preimages[b as usize][i], self.params.preimage_bits)
            .expect("width <= 64")
    }
}

impl OtsVerifyKey {
    pub fn params(&self) -> &OtsParams {
        &self.params
    }

    pub fn image(&self, b: bool, i: usize) -> BitString {
        BitString::from_u64(self.images[b as usize][i], self.params.owf.output_bits)
            .expect("width <= 64")
    }

    fn check_slot(&self, m_i: bool, i: usize, preimage: u64) -> bool {
        self.params.owf.eval_u64(preimage) == self.images[m_i as usize][i]
    }

    /// Hex body: all images for message value 0, then all for value 1.
    fn image_bits(&self) -> BitString {
        let w = self.params.owf.output_bits;
        let mut out = BitString::zeros(0);
        for b in 0..2 {
            for v in &self.images[b] {
                out.extend(&BitString::from_u64(*v, w).expect("width <= 64"));
            }
        }
        out
    }

    /// Parses the text produced by `Display`, checking the header against `params`.
    pub fn parse(s: &str, params: &OtsParams) -> Result<Self, OtsError> {
        let body = parse_header(s, "vk", params)?;
        let w = params.owf.output_bits;
        let bits = BitString::from_hex(body, 2 * params.message_bits * w)?;
        let mut images = [Vec::new(), Vec::new()];
        for (b, imgs) in images.iter_mut().enumerate() {
            for i in 0..params.message_bits {
                let start = (b * params.message_bits + i) * w;
                imgs.push(bits.slice(start, w)?.to_u64()?);
            }
        }
        Ok(Self {
            params: *params,
            images,
        })
    }
}

impl OtsSignature {
    pub fn parse(s: &str, params: &OtsParams) -> Result<Self, OtsError> {
        let body = parse_header(s, "sig", params)?;
        Ok(Self(BitString::from_hex(body, params.signature_bits())?))
    }

    pub fn display_with<'a>(&'a self, params: &'a OtsParams) -> impl fmt::Display + 'a {
        SigDisplay(self, params)
    }
}

struct SigDisplay<'a>(&'a OtsSignature, &'a OtsParams);

impl fmt::Display for SigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "sig m={} p={} {}",
            self.1.message_bits,
            self.1.preimage_bits,
            self.0 .0.to_hex()
        )
    }
}

/// `vk m=<message_bits> p=<preimage_bits> <hex>`.
impl fmt::Display for OtsVerifyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "vk m={} p={} {}",
            self.params.message_bits,
            self.params.preimage_bits,
            self.image_bits().to_hex()
        )
    }
}

fn parse_header<'a>(s: &'a str, tag: &str, params: &OtsParams) -> Result<&'a str, OtsError> {
    let bad = |why: &str| OtsError::Parse(format!("{tag}: {why} in {s:?}"));
    let mut parts = s.split_whitespace();
    if parts.next() != Some(tag) {
        return Err(bad("missing tag"));
    }
    let m: usize = parts
        .next()
        .and_then(|p| p.strip_prefix("m="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("bad m= field"))?;
    let p: usize = parts
        .next()
        .and_then(|p| p.strip_prefix("p="))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("bad p= field"))?;
    if m != params.message_bits || p != params.preimage_bits {
        return Err(OtsError::ParamsMismatch);
    }
    let body = parts.next().ok_or_else(|| bad("missing body"))?;
    if parts.next().is_some() {
        return Err(bad("trailing tokens"));
    }
    Ok(body)
}

/// Derandomized key generation: the key pair is a pure function of `coins`.
pub fn sgen(params: &OtsParams, coins: &BitString) -> Result<(OtsVerifyKey, OtsSigningKey), OtsError> {
    if coins.len() != params.coin_bits() {
        return Err(OtsError::CoinLengthMismatch {
            expected: params.coin_bits(),
            found: coins.len(),
        });
    }
    let mb = params.message_bits;
    let blocks = expand_coins(coins, 2 * mb, params.preimage_bits, params.owf.rounds)?;
    let mut preimages = [Vec::with_capacity(mb), Vec::with_capacity(mb)];
    for (j, block) in blocks.iter().enumerate() {
        preimages[j / mb].push(block.to_u64()?);
    }
    let images = [
        preimages[0].iter().map(|x| params.owf.eval_u64(*x)).collect(),
        preimages[1].iter().map(|x| params.owf.eval_u64(*x)).collect(),
    ];
    Ok((
        OtsVerifyKey {
            params: *params,
            images,
        },
        OtsSigningKey {
            params: *params,
            preimages,
        },
    ))
}

pub fn sgen_random<R: RngCore + ?Sized>(
    params: &OtsParams,
    rng: &mut R,
) -> Result<(OtsVerifyKey, OtsSigningKey), OtsError> {
    let coins = BitString::random(params.coin_bits(), rng);
    sgen(params, &coins)
}

pub fn sign(sk: &OtsSigningKey, m: &BitString) -> Result<OtsSignature, OtsError> {
    let p = &sk.params;
    if m.len() != p.message_bits {
        return Err(OtsError::LengthMismatch {
            expected: p.message_bits,
            found: m.len(),
        });
    }
    let slots: Vec<u64> = m
        .iter()
        .enumerate()
        .map(|(i, b)| sk.preimages[b as usize][i])
        .collect();
    Ok(OtsSignature::from_slots(&slots, p.preimage_bits))
}

pub fn ver(vk: &OtsVerifyKey, m: &BitString, sig: &OtsSignature) -> Result<bool, OtsError> {
    let p = &vk.params;
    if m.len() != p.message_bits {
        return Err(OtsError::LengthMismatch {
            expected: p.message_bits,
            found: m.len(),
        });
    }
    if sig.len() != p.signature_bits() {
        return Err(OtsError::LengthMismatch {
            expected: p.signature_bits(),
            found: sig.len(),
        });
    }
    Ok(m
        .iter()
        .enumerate()
        .all(|(i, b)| vk.check_slot(b, i, sig.slot(i, p.preimage_bits))))
}

/// Membership in the span of valid `(b, σ)` strings under `(vk_0, vk_1)`,
/// the diagonal projector the encryption schemes measure.
#[derive(Debug, Clone)]
pub struct SignaturePredicate<'a> {
    vk0: &'a OtsVerifyKey,
    vk1: &'a OtsVerifyKey,
}

impl SignaturePredicate<'_> {
    pub fn sig_bits(&self) -> usize {
        self.vk0.params.signature_bits()
    }
}

impl BasisPredicate for SignaturePredicate<'_> {
    fn width(&self) -> usize {
        1 + self.sig_bits()
    }

    fn accepts(&self, basis: &BitString) -> bool {
        if basis.len() != self.width() {
            return false;
        }
        let b = basis.get(0);
        let vk = if b { self.vk1 } else { self.vk0 };
        let w = vk.params.preimage_bits;
        let preimage = (0..w).fold(0u64, |acc, j| (acc << 1) | basis.get(1 + j) as u64);
        vk.check_slot(b, 0, preimage)
    }
}

pub fn accepts_pred<'a>(
    vk0: &'a OtsVerifyKey,
    vk1: &'a OtsVerifyKey,
) -> Result<SignaturePredicate<'a>, OtsError> {
    if vk0.params != vk1.params || vk0.params.message_bits != 1 {
        return Err(OtsError::ParamsMismatch);
    }
    Ok(SignaturePredicate { vk0, vk1 })
}

fn search_slot(vk: &OtsVerifyKey, m_i: bool, i: usize, budget: u64, skip: Option<u64>) -> Option<u64> {
    let space = 1u64.checked_shl(vk.params.preimage_bits as u32).unwrap_or(u64::MAX);
    (0..budget.min(space)).find(|x| Some(*x) != skip && vk.check_slot(m_i, i, *x))
}

/// Exhaustive preimage search, trying candidates `0, 1, ...` for at most
/// `budget` values per signature slot.
pub fn brute_force_forge(vk: &OtsVerifyKey, m: &BitString, budget: u64) -> Option<OtsSignature> {
    let p = &vk.params;
    if m.len() != p.message_bits {
        return None;
    }
    let slots: Option<Vec<u64>> = m
        .iter()
        .enumerate()
        .map(|(i, b)| search_slot(vk, b, i, budget, None))
        .collect();
    slots.map(|s| OtsSignature::from_slots(&s, p.preimage_bits))
}

/// Strong-forgery game against a fixed message: given one honest `(m, σ)`,
/// output a different valid pair. The attempt targets `m` with bit 0 flipped,
/// reusing every revealed slot that still applies.
pub fn strong_forgery_attempt(
    vk: &OtsVerifyKey,
    m: &BitString,
    sig: &OtsSignature,
    budget: u64,
) -> Option<(BitString, OtsSignature)> {
    let p = &vk.params;
    if m.len() != p.message_bits || sig.len() != p.signature_bits() {
        return None;
    }
    let mut target = m.clone();
    target.flip(0);
    let mut slots: Vec<u64> = (0..p.message_bits).map(|i| sig.slot(i, p.preimage_bits)).collect();
    slots[0] = search_slot(vk, target.get(0), 0, budget, None)?;
    Some((target, OtsSignature::from_slots(&slots, p.preimage_bits)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::RngStream;
    use crate::qsim::bits;

    fn params(mb: usize, p: usize) -> OtsParams {
        OtsParams::new(mb, p, 32, 4).unwrap()
    }

    #[test]
    fn same_coins_same_keys() {
        let p = params(4, 8);
        let coins = bits("10110011100011110000111100001111");
        assert_eq!(sgen(&p, &coins).unwrap(), sgen(&p, &coins).unwrap());
        assert_eq!(
            sgen(&p, &bits("1")),
            Err(OtsError::CoinLengthMismatch { expected: 32, found: 1 })
        );
    }

    #[test]
    fn lamport_dimensions() {
        let p = params(1, 3);
        assert_eq!(p.signature_bits(), 3);
        let mut rng = RngStream::new(1, 0);
        let (vk, sk) = sgen_random(&p, &mut rng).unwrap();
        let sig = sign(&sk, &bits("0")).unwrap();
        assert_eq!(sig.len(), 3);
        assert_eq!(sig.bits(), &sk.preimage(false, 0));
        assert!(ver(&vk, &bits("0"), &sig).unwrap());
        assert_eq!(sign(&sk, &bits("0")).unwrap(), sig);
    }

    #[test]
    fn correctness_exhaustive_messages() {
        let mut rng = RngStream::new(2, 0);
        for mb in 1..=8 {
            let p = params(mb, 8);
            let (vk, sk) = sgen_random(&p, &mut rng).unwrap();
            for m in 0..1u64 << mb {
                let m = BitString::from_u64(m, mb).unwrap();
                let sig = sign(&sk, &m).unwrap();
                assert!(ver(&vk, &m, &sig).unwrap(), "mb={mb} m={m}");
            }
        }
    }

    #[test]
    fn distinct_coins_distinct_keys() {
        let p = OtsParams::new(1, 8, 16, 4).unwrap();
        let mut rng = RngStream::new(3, 0);
        let mut same = 0;
        for _ in 0..1000 {
            let (a, _) = sgen_random(&p, &mut rng).unwrap();
            let (b, _) = sgen_random(&p, &mut rng).unwrap();
            same += (a == b) as u32;
        }
        // 2^-16 per trial for a pair of 8-bit images; allow the 2^-8 budget
        assert!(same as f64 / 1000.0 <= 1.0 / 256.0, "{same}");
    }

    #[test]
    fn tampered_signatures_rejected() {
        let p = params(1, 16);
        let mut rng = RngStream::new(4, 0);
        let trials = 10_000;
        let mut rejected_flip = 0;
        let mut rejected_msg = 0;
        for t in 0..trials {
            let (vk, sk) = sgen_random(&p, &mut rng).unwrap();
            let m = BitString::from_bits([t % 2 == 1]);
            let sig = sign(&sk, &m).unwrap();
            let mut bad = sig.bits().clone();
            bad.flip(rng.below(16) as usize);
            if !ver(&vk, &m, &OtsSignature::from_bits(bad)).unwrap() {
                rejected_flip += 1;
            }
            let mut other = m.clone();
            other.flip(0);
            if !ver(&vk, &other, &sig).unwrap() {
                rejected_msg += 1;
            }
        }
        assert!(rejected_flip as f64 >= 0.999 * trials as f64, "{rejected_flip}");
        assert!(rejected_msg as f64 >= 0.999 * trials as f64, "{rejected_msg}");
    }

    #[test]
    fn ver_length_errors() {
        let p = params(2, 4);
        let mut rng = RngStream::new(5, 0);
        let (vk, sk) = sgen_random(&p, &mut rng).unwrap();
        let sig = sign(&sk, &bits("01")).unwrap();
        assert!(matches!(ver(&vk, &bits("0"), &sig), Err(OtsError::LengthMismatch { .. })));
        let short = OtsSignature::from_bits(bits("0101"));
        assert!(matches!(ver(&vk, &bits("01"), &short), Err(OtsError::LengthMismatch { .. })));
        assert!(sign(&sk, &bits("011")).is_err());
    }

    #[test]
    fn predicate_cases() {
        let p = params(1, 16);
        let mut rng = RngStream::new(6, 0);
        let mut zero_hits = 0;
        for _ in 0..1000 {
            let (vk0, sk0) = sgen_random(&p, &mut rng).unwrap();
            let (vk1, _) = sgen_random(&p, &mut rng).unwrap();
            let pred = accepts_pred(&vk0, &vk1).unwrap();
            let s0 = sign(&sk0, &bits("0")).unwrap();
            assert!(pred.accepts(&bits("0").concat(s0.bits())));
            assert!(!pred.accepts(&bits("1").concat(s0.bits())) || vk1.image(true, 0) == vk0.image(false, 0));
            if pred.accepts(&BitString::zeros(17)) {
                zero_hits += 1;
            }
        }
        assert!(zero_hits <= 1, "{zero_hits}");
        let (wide, _) = sgen_random(&params(2, 16), &mut rng).unwrap();
        assert!(accepts_pred(&wide, &wide).is_err());
    }

    #[test]
    fn brute_force_full_budget_always_finds() {
        let p = params(1, 6);
        let mut rng = RngStream::new(7, 0);
        for _ in 0..100 {
            let (vk, _) = sgen_random(&p, &mut rng).unwrap();
            let m = BitString::from_bits([rng.bit()]);
            let forged = brute_force_forge(&vk, &m, 1 << 6).expect("exhaustive search");
            assert!(ver(&vk, &m, &forged).unwrap());
        }
        let (vk, _) = sgen_random(&p, &mut rng).unwrap();
        assert!(brute_force_forge(&vk, &bits("0"), 0).is_none());
    }

    #[test]
    fn brute_force_small_budget_fails_on_wide_preimages() {
        let p = params(1, 24);
        let mut rng = RngStream::new(8, 0);
        let found = (0..1000)
            .filter(|_| {
                let (vk, _) = sgen_random(&p, &mut rng).unwrap();
                brute_force_forge(&vk, &bits("1"), 1 << 10).is_some()
            })
            .count();
        assert!(found <= 1, "{found}");
    }

    #[test]
    fn text_round_trip() {
        let p = params(3, 5);
        let mut rng = RngStream::new(9, 0);
        let (vk, sk) = sgen_random(&p, &mut rng).unwrap();
        let text = vk.to_string();
        assert!(text.starts_with("vk m=3 p=5 "));
        assert_eq!(OtsVerifyKey::parse(&text, &p).unwrap(), vk);
        assert_eq!(OtsVerifyKey::parse(&text, &params(2, 5)), Err(OtsError::ParamsMismatch));
        let sig = sign(&sk, &bits("101")).unwrap();
        let text = sig.display_with(&p).to_string();
        assert_eq!(OtsSignature::parse(&text, &p).unwrap(), sig);
    }
}
