//! Everlasting-secure QPKE.
//!
//! The quantum public key is `(|0,σ0> + (-1)^{d0} |1,σ1>) / sqrt(2)` where
//! `σb` signs the bit `b` under a fresh one-time key `vk_b`. Encryption keeps
//! only valid message/signature strings, measures everything in the Hadamard
//! basis and masks `m` with the first outcome bit. The outcome `(d1, d2)`
//! always satisfies `d1 ^ <d2, σ0 ^ σ1> = d0`, which is what decryption uses.

use std::fmt;

use rand::RngCore;

use super::QpkeError;
use crate::ots::{accepts_pred, sgen, sign, OtsSignature, OtsVerifyKey};
use crate::params::SchemeParams;
use crate::qsim::{BitString, ProjectOutcome, SparseState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvSecretKey {
    pub vk0: OtsVerifyKey,
    pub vk1: OtsVerifyKey,
    pub sig0: OtsSignature,
    pub sig1: OtsSignature,
    pub d0: bool,
}

/// Classical half of the public key, `(vk0, vk1)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvClassicalKey {
    pub vk0: OtsVerifyKey,
    pub vk1: OtsVerifyKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvPublicKey {
    pub state: SparseState,
    pub classical: EvClassicalKey,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EvCiphertext {
    Valid { ct1: bool, ct2: BitString },
    Abort,
}

impl EvCiphertext {
    pub fn is_abort(&self) -> bool {
        matches!(self, EvCiphertext::Abort)
    }

    /// Parses `EV <bit> <hex>` or `ABORT`.
    pub fn parse(s: &str, sig_bits: usize) -> Result<Self, QpkeError> {
        let bad = || QpkeError::Parse(format!("bad everlasting ciphertext {s:?}"));
        let mut parts = s.split_whitespace();
        match parts.next() {
            Some("ABORT") if parts.next().is_none() => Ok(EvCiphertext::Abort),
            Some("EV") => {
                let ct1 = match parts.next() {
                    Some("0") => false,
                    Some("1") => true,
                    _ => return Err(bad()),
                };
                let ct2 = BitString::from_hex(parts.next().ok_or_else(bad)?, sig_bits)
                    .map_err(|_| bad())?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(EvCiphertext::Valid { ct1, ct2 })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for EvCiphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvCiphertext::Valid { ct1, ct2 } => write!(f, "EV {} {}", *ct1 as u8, ct2.to_hex()),
            EvCiphertext::Abort => f.write_str("ABORT"),
        }
    }
}

impl EvSecretKey {
    pub fn classical(&self) -> EvClassicalKey {
        EvClassicalKey {
            vk0: self.vk0.clone(),
            vk1: self.vk1.clone(),
        }
    }

    /// `σ0 ^ σ1`, the direction of the parity constraint.
    pub fn sig_xor(&self) -> BitString {
        self.sig0.bits().xor(self.sig1.bits()).expect("signatures share a width")
    }

    pub fn basis_string(&self, b: bool) -> BitString {
        let sig = if b { &self.sig1 } else { &self.sig0 };
        BitString::from_bits([b]).concat(sig.bits())
    }

    /// Whether a valid ciphertext of `m` obeys `ct1 ^ <ct2, σ0 ^ σ1> ^ m = d0`.
    pub fn parity_holds(&self, ct: &EvCiphertext, m: bool) -> bool {
        match ct {
            EvCiphertext::Valid { ct1, ct2 } => {
                let dot = ct2.dot(&self.sig_xor()).unwrap_or(!self.d0);
                (*ct1 ^ dot ^ m) == self.d0
            }
            EvCiphertext::Abort => false,
        }
    }
}

/// Coins consumed by [`ev_skgen_from_coins`]: two OTS coin strings and `d0`.
pub fn ev_skgen_coin_bits(params: &SchemeParams) -> usize {
    2 * params.ots_seed_bits + 1
}

/// Key generation as a pure function of its coins `(c0 || c1 || d0)`.
pub fn ev_skgen_from_coins(params: &SchemeParams, coins: &BitString) -> Result<EvSecretKey, QpkeError> {
    let seed = params.ots_seed_bits;
    if coins.len() != ev_skgen_coin_bits(params) {
        return Err(QpkeError::Dimension {
            what: "key generation coins",
            expected: ev_skgen_coin_bits(params),
            found: coins.len(),
        });
    }
    let ots = params.bit_ots()?;
    let (vk0, sk0) = sgen(&ots, &coins.slice(0, seed)?)?;
    let (vk1, sk1) = sgen(&ots, &coins.slice(seed, seed)?)?;
    let sig0 = sign(&sk0, &BitString::from_bits([false]))?;
    let sig1 = sign(&sk1, &BitString::from_bits([true]))?;
    Ok(EvSecretKey {
        vk0,
        vk1,
        sig0,
        sig1,
        d0: coins.get(2 * seed),
    })
}

/// Signing keys are dropped once `σ0` and `σ1` exist.
pub fn ev_skgen<R: RngCore + ?Sized>(params: &SchemeParams, rng: &mut R) -> Result<EvSecretKey, QpkeError> {
    let coins = BitString::random(ev_skgen_coin_bits(params), rng);
    ev_skgen_from_coins(params, &coins)
}

pub fn ev_pkgen(sk: &EvSecretKey) -> Result<EvPublicKey, QpkeError> {
    let state = SparseState::superpose2(sk.basis_string(false), sk.basis_string(true), sk.d0)?;
    Ok(EvPublicKey {
        state,
        classical: sk.classical(),
    })
}

fn check_register(state: &SparseState, pk: &EvClassicalKey) -> Result<(), QpkeError> {
    let expected = 1 + pk.vk0.params().signature_bits();
    if state.n_qubits() != expected {
        return Err(QpkeError::Dimension {
            what: "public-key register",
            expected,
            found: state.n_qubits(),
        });
    }
    Ok(())
}

pub fn ev_enc<R: RngCore + ?Sized>(
    state: &SparseState,
    pk: &EvClassicalKey,
    m: bool,
    rng: &mut R,
) -> Result<EvCiphertext, QpkeError> {
    check_register(state, pk)?;
    let pred = accepts_pred(&pk.vk0, &pk.vk1)?;
    let post = match state.project(&pred, rng)? {
        ProjectOutcome::Accept(post) => post,
        ProjectOutcome::Reject => return Ok(EvCiphertext::Abort),
    };
    let d = post.measure_hadamard_all(rng)?;
    let (d1, d2) = d.split_at(1)?;
    Ok(EvCiphertext::Valid {
        ct1: m ^ d1.get(0),
        ct2: d2,
    })
}

/// `m = d0 ^ ct1 ^ <ct2, σ0 ^ σ1>`.
pub fn ev_dec(sk: &EvSecretKey, ct: &EvCiphertext) -> Result<bool, QpkeError> {
    match ct {
        EvCiphertext::Abort => Err(QpkeError::AbortCiphertext),
        EvCiphertext::Valid { ct1, ct2 } => {
            let dot = ct2.dot(&sk.sig_xor()).map_err(|_| QpkeError::Dimension {
                what: "ciphertext",
                expected: sk.sig0.len(),
                found: ct2.len(),
            })?;
            Ok(sk.d0 ^ ct1 ^ dot)
        }
    }
}

/// Exact output law of [`ev_enc`] on `state`, as `(ciphertext, probability)`
/// pairs with nonzero mass. Enumerates all `2^n` Hadamard outcomes.
pub fn ev_ciphertext_law(
    state: &SparseState,
    pk: &EvClassicalKey,
    m: bool,
) -> Result<Vec<(EvCiphertext, f64)>, QpkeError> {
    check_register(state, pk)?;
    let pred = accepts_pred(&pk.vk0, &pk.vk1)?;
    let (hits, total) = state.accept_ratio(&pred);
    let p_accept = hits as f64 / total as f64;
    let mut out = Vec::new();
    if hits < total {
        out.push((EvCiphertext::Abort, 1.0 - p_accept));
    }
    if hits == 0 {
        return Ok(out);
    }
    let kept = state
        .terms()
        .iter()
        .filter(|t| crate::qsim::BasisPredicate::accepts(&pred, &t.basis))
        .cloned()
        .collect();
    let post = SparseState::from_terms(state.n_qubits(), kept)?;
    let law = post.hadamard_law()?;
    let n = state.n_qubits();
    if n > 24 {
        return Err(QpkeError::InvalidParams(format!("{n}-qubit law is too large to enumerate")));
    }
    for v in 0..1u64 << n {
        let d = BitString::from_u64(v, n)?;
        let p = law.probability(&d);
        if p > 0.0 {
            let (d1, d2) = d.split_at(1)?;
            out.push((
                EvCiphertext::Valid {
                    ct1: m ^ d1.get(0),
                    ct2: d2,
                },
                p * p_accept,
            ));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::RngStream;
    use crate::qsim::{bits, Sign};

    fn params() -> SchemeParams {
        SchemeParams::new(8, 8).unwrap()
    }

    #[test]
    fn skgen_signatures_verify() {
        let mut rng = RngStream::new(1, 0);
        let sk = ev_skgen(&params(), &mut rng).unwrap();
        assert!(crate::ots::ver(&sk.vk0, &bits("0"), &sk.sig0).unwrap());
        assert!(crate::ots::ver(&sk.vk1, &bits("1"), &sk.sig1).unwrap());
        let again = ev_skgen(&params(), &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(sk, again);
    }

    #[test]
    fn d0_is_balanced() {
        let p = params();
        let n = 10_000u32;
        let ones: u32 = (0..n)
            .map(|i| ev_skgen(&p, &mut RngStream::new(77, i as u64)).unwrap().d0 as u32)
            .sum();
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones as f64 - n as f64 / 2.0).abs() <= 3.0 * sigma, "{ones}");
    }

    #[test]
    fn pkgen_register() {
        let mut rng = RngStream::new(2, 0);
        loop {
            let sk = ev_skgen(&params(), &mut rng).unwrap();
            let pk = ev_pkgen(&sk).unwrap();
            assert_eq!(pk.state.n_qubits(), 9);
            let pred = accepts_pred(&pk.classical.vk0, &pk.classical.vk1).unwrap();
            assert_eq!(pk.state.accept_ratio(&pred), (2, 2));
            if !sk.d0 {
                assert!(pk.state.terms().iter().all(|t| t.sign == Sign::Plus));
                break;
            }
        }
    }

    #[test]
    fn dec_examples() {
        // d0=1, ct=(1, 101), σ0 ^ σ1 = 110: <101,110> = 1 so m = 1 ^ 1 ^ 1 = 1
        let p = SchemeParams::new(8, 3).unwrap();
        let mut sk = ev_skgen(&p, &mut RngStream::new(3, 0)).unwrap();
        sk.d0 = true;
        sk.sig0 = OtsSignature::from_bits(bits("000"));
        sk.sig1 = OtsSignature::from_bits(bits("110"));
        let ct = EvCiphertext::Valid { ct1: true, ct2: bits("101") };
        assert!(ev_dec(&sk, &ct).unwrap());
        sk.d0 = false;
        let ct = EvCiphertext::Valid { ct1: false, ct2: bits("000") };
        assert!(!ev_dec(&sk, &ct).unwrap());
        assert_eq!(ev_dec(&sk, &EvCiphertext::Abort), Err(QpkeError::AbortCiphertext));
    }

    #[test]
    fn round_trip_and_parity() {
        let p = params();
        for i in 0..2000u64 {
            let mut rng = RngStream::new(4, i);
            let sk = ev_skgen(&p, &mut rng).unwrap();
            let pk = ev_pkgen(&sk).unwrap();
            let m = i % 2 == 1;
            let ct = ev_enc(&pk.state, &pk.classical, m, &mut rng).unwrap();
            assert!(sk.parity_holds(&ct, m));
            assert_eq!(ev_dec(&sk, &ct).unwrap(), m);
        }
    }

    #[test]
    fn invalid_register_aborts() {
        let p = params();
        let mut rng = RngStream::new(5, 0);
        let sk = ev_skgen(&p, &mut rng).unwrap();
        let pk = ev_pkgen(&sk).unwrap();
        let pred = accepts_pred(&pk.classical.vk0, &pk.classical.vk1).unwrap();
        let mut garbage = sk.basis_string(true);
        garbage.flip(1);
        assert!(!crate::qsim::BasisPredicate::accepts(&pred, &garbage));
        let bad = SparseState::basis(garbage);
        for _ in 0..20 {
            assert_eq!(ev_enc(&bad, &pk.classical, false, &mut rng).unwrap(), EvCiphertext::Abort);
        }
        let wrong = SparseState::basis(BitString::zeros(4));
        assert!(matches!(
            ev_enc(&wrong, &pk.classical, false, &mut rng),
            Err(QpkeError::Dimension { .. })
        ));
    }

    #[test]
    fn law_sums_to_one_and_matches_parity() {
        let p = SchemeParams::new(8, 3).unwrap();
        let mut rng = RngStream::new(6, 0);
        let sk = ev_skgen(&p, &mut rng).unwrap();
        let pk = ev_pkgen(&sk).unwrap();
        for m in [false, true] {
            let law = ev_ciphertext_law(&pk.state, &pk.classical, m).unwrap();
            assert_eq!(law.len(), 8);
            assert!((law.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(law.iter().all(|(ct, _)| sk.parity_holds(ct, m)));
        }
    }

    #[test]
    fn ciphertext_text() {
        let ct = EvCiphertext::Valid { ct1: true, ct2: bits("101") };
        assert_eq!(ct.to_string(), "EV 1 a0");
        assert_eq!(EvCiphertext::parse("EV 1 a0", 3).unwrap(), ct);
        assert_eq!(EvCiphertext::parse("ABORT", 3).unwrap(), EvCiphertext::Abort);
        assert!(EvCiphertext::parse("EV 2 a0", 3).is_err());
        assert!(EvCiphertext::parse("EV 1 a1", 3).is_err());
    }
}
