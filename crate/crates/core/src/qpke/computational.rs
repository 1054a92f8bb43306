//! Computationally secure QPKE with reusable secret key.
//!
//! The secret key is a PRF key `k`. Each public key draws fresh `(r0, r1)` and
//! derives its one-time keys from `PRF(k, r_b)`, so any number of public-key
//! copies can be issued. Encryption applies `Z^m` to the first qubit of the
//! (projected) register; decryption measures in the `|0,σ0> ± |1,σ1>` basis.

use std::fmt;

use rand::RngCore;

use super::QpkeError;
use crate::ots::{accepts_pred, sgen, sign, OtsSignature, OtsVerifyKey};
use crate::params::SchemeParams;
use crate::primitives::{prf_eval, PrfKey};
use crate::qsim::{BitString, ProjectOutcome, SparseState};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompSecretKey {
    pub k: PrfKey,
    pub params: SchemeParams,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompClassicalKey {
    pub vk0: OtsVerifyKey,
    pub vk1: OtsVerifyKey,
    pub r0: BitString,
    pub r1: BitString,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompPublicKey {
    pub state: SparseState,
    pub classical: CompClassicalKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompCiphertext {
    Valid {
        state: SparseState,
        r0: BitString,
        r1: BitString,
    },
    Abort,
}

/// Key material a secret key regenerates for one `(r0, r1)` pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivedKeys {
    pub vk0: OtsVerifyKey,
    pub vk1: OtsVerifyKey,
    pub sig0: OtsSignature,
    pub sig1: OtsSignature,
}

impl DerivedKeys {
    pub fn basis_string(&self, b: bool) -> BitString {
        let sig = if b { &self.sig1 } else { &self.sig0 };
        BitString::from_bits([b]).concat(sig.bits())
    }
}

impl CompCiphertext {
    pub fn is_abort(&self) -> bool {
        matches!(self, CompCiphertext::Abort)
    }

    pub fn parse(s: &str, lambda: usize) -> Result<Self, QpkeError> {
        let bad = |why: &str| QpkeError::Parse(format!("computational ciphertext: {why}"));
        let lines: Vec<&str> = s.lines().filter(|l| !l.trim().is_empty()).collect();
        match lines.as_slice() {
            ["ABORT"] => Ok(CompCiphertext::Abort),
            [head, state @ .., tail] if head.trim() == "COMP" => {
                let state: SparseState = state.join("\n").parse()?;
                let mut rs = tail.split_whitespace();
                let r0 = BitString::from_hex(rs.next().ok_or_else(|| bad("missing r0"))?, lambda)
                    .map_err(|_| bad("bad r0"))?;
                let r1 = BitString::from_hex(rs.next().ok_or_else(|| bad("missing r1"))?, lambda)
                    .map_err(|_| bad("bad r1"))?;
                if rs.next().is_some() {
                    return Err(bad("trailing tokens"));
                }
                Ok(CompCiphertext::Valid { state, r0, r1 })
            }
            _ => Err(bad("unrecognized layout")),
        }
    }
}

/// `COMP`, then the state block, then `<r0 hex> <r1 hex>`; or `ABORT`.
impl fmt::Display for CompCiphertext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompCiphertext::Valid { state, r0, r1 } => {
                write!(f, "COMP\n{state}\n{} {}", r0.to_hex(), r1.to_hex())
            }
            CompCiphertext::Abort => f.write_str("ABORT"),
        }
    }
}

pub fn comp_skgen<R: RngCore + ?Sized>(params: &SchemeParams, rng: &mut R) -> Result<CompSecretKey, QpkeError> {
    params.validate()?;
    Ok(CompSecretKey {
        k: PrfKey::new(BitString::random(params.lambda, rng))?,
        params: *params,
    })
}

/// Regenerates `(vk_b, σ_b)` from `SGen(PRF(k, r_b))`.
pub fn comp_derive(sk: &CompSecretKey, r0: &BitString, r1: &BitString) -> Result<DerivedKeys, QpkeError> {
    let ots = sk.params.prf_ots()?;
    let rounds = sk.params.owf_rounds;
    let (vk0, sk0) = sgen(&ots, &prf_eval(&sk.k, r0, rounds)?)?;
    let (vk1, sk1) = sgen(&ots, &prf_eval(&sk.k, r1, rounds)?)?;
    Ok(DerivedKeys {
        sig0: sign(&sk0, &BitString::from_bits([false]))?,
        sig1: sign(&sk1, &BitString::from_bits([true]))?,
        vk0,
        vk1,
    })
}

pub fn comp_pkgen<R: RngCore + ?Sized>(sk: &CompSecretKey, rng: &mut R) -> Result<CompPublicKey, QpkeError> {
    let r0 = BitString::random(sk.params.lambda, rng);
    let r1 = BitString::random(sk.params.lambda, rng);
    let keys = comp_derive(sk, &r0, &r1)?;
    let state = SparseState::superpose2(keys.basis_string(false), keys.basis_string(true), false)?;
    Ok(CompPublicKey {
        state,
        classical: CompClassicalKey {
            vk0: keys.vk0,
            vk1: keys.vk1,
            r0,
            r1,
        },
    })
}

pub fn comp_enc<R: RngCore + ?Sized>(
    state: &SparseState,
    pk: &CompClassicalKey,
    m: bool,
    rng: &mut R,
) -> Result<CompCiphertext, QpkeError> {
    let expected = 1 + pk.vk0.params().signature_bits();
    if state.n_qubits() != expected {
        return Err(QpkeError::Dimension {
            what: "public-key register",
            expected,
            found: state.n_qubits(),
        });
    }
    let pred = accepts_pred(&pk.vk0, &pk.vk1)?;
    match state.project(&pred, rng)? {
        ProjectOutcome::Reject => Ok(CompCiphertext::Abort),
        ProjectOutcome::Accept(post) => Ok(CompCiphertext::Valid {
            state: post.apply_z_phase(0, m)?,
            r0: pk.r0.clone(),
            r1: pk.r1.clone(),
        }),
    }
}

/// Probability that decryption returns 1, i.e. `|<ψ-|state>|^2` with
/// `ψ± = (|0,σ0> ± |1,σ1>)/sqrt(2)`. Fails on support outside that span.
pub fn comp_dec_probability_one(sk: &CompSecretKey, ct: &CompCiphertext) -> Result<f64, QpkeError> {
    let (state, r0, r1) = match ct {
        CompCiphertext::Abort => return Err(QpkeError::AbortCiphertext),
        CompCiphertext::Valid { state, r0, r1 } => (state, r0, r1),
    };
    let keys = comp_derive(sk, r0, r1)?;
    let x0 = keys.basis_string(false);
    let x1 = keys.basis_string(true);
    if state.terms().iter().any(|t| t.basis != x0 && t.basis != x1) {
        return Err(QpkeError::SupportMismatch);
    }
    let a0 = state.sign_of(&x0).map_or(0.0, |s| s.as_f64());
    let a1 = state.sign_of(&x1).map_or(0.0, |s| s.as_f64());
    // equal-magnitude terms: amplitudes are a_b / sqrt(k)
    let k = state.num_terms() as f64;
    let minus = (a0 - a1) * (a0 - a1) / (2.0 * k);
    Ok(minus)
}

pub fn comp_dec<R: RngCore + ?Sized>(
    sk: &CompSecretKey,
    ct: &CompCiphertext,
    rng: &mut R,
) -> Result<bool, QpkeError> {
    let p1 = comp_dec_probability_one(sk, ct)?;
    Ok(if p1 == 0.0 {
        false
    } else if p1 == 1.0 {
        true
    } else {
        // only dyadic values reach here; a 53-bit uniform draw is exact for them
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < p1
    })
}
