//! Two-message QKD built from everlasting QPKE.
//!
//! Alice publishes `N = 4λ + s(4λ)` everlasting public keys. Bob picks a raw
//! key `k` of `4λ` bits, a Toeplitz hash and a `4λ`-bit one-time key pair,
//! signs `k`, and encrypts `k || σ` bit by bit. Both sides output `Hash(k)`.
//! Alice rejects unless the decrypted signature verifies.

mod wire;

use std::fmt;

use rand::RngCore;
use thiserror::Error;

use crate::ots::{sgen_random, sign, ver, OtsError, OtsParams, OtsSignature, OtsVerifyKey};
use crate::params::{ParamsError, SchemeParams};
use crate::primitives::{hash_eval, hash_sample, PrimitiveError, ToeplitzHash};
use crate::qpke::{ev_dec, ev_enc, ev_pkgen, ev_skgen, EvCiphertext, EvClassicalKey, EvSecretKey, QpkeError};
use crate::qsim::{BitError, BitString, SparseState};

pub use wire::{
    decode_first, decode_response, encode_first, encode_response, read_frames, write_frame,
    QkdTranscript, WireError, BLOCKED,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QkdError {
    #[error("{what}: expected {expected} entries, found {found}")]
    Length {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Qpke(#[from] QpkeError),
    #[error(transparent)]
    Ots(#[from] OtsError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Bits(#[from] BitError),
}

impl From<ParamsError> for QkdError {
    fn from(e: ParamsError) -> Self {
        QkdError::InvalidParams(e.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QkdParams {
    pub scheme: SchemeParams,
    /// One-time signature over the `4λ`-bit raw key.
    pub ots: OtsParams,
}

impl QkdParams {
    pub fn new(scheme: SchemeParams) -> Result<Self, QkdError> {
        scheme.validate()?;
        let ots = scheme.bit_ots()?.with_message_bits(4 * scheme.lambda)?;
        Ok(Self { scheme, ots })
    }

    pub fn lambda(&self) -> usize {
        self.scheme.lambda
    }

    /// Raw key length `4λ`, also the number of key-carrying instances.
    pub fn raw_key_bits(&self) -> usize {
        4 * self.scheme.lambda
    }

    /// `s(4λ)`.
    pub fn sig_bits(&self) -> usize {
        self.ots.signature_bits()
    }

    /// `N = 4λ + s(4λ)`.
    pub fn instances(&self) -> usize {
        self.raw_key_bits() + self.sig_bits()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FirstMessage {
    pub pks: Vec<EvClassicalKey>,
    pub states: Vec<SparseState>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AliceState {
    pub params: QkdParams,
    pub sks: Vec<EvSecretKey>,
}

/// Purely classical; the quantum part of the response is empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub hash: ToeplitzHash,
    pub vk: OtsVerifyKey,
    pub cts: Vec<EvCiphertext>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SessionOutcome {
    Key(BitString),
    Reject,
}

impl SessionOutcome {
    pub fn key(&self) -> Option<&BitString> {
        match self {
            SessionOutcome::Key(k) => Some(k),
            SessionOutcome::Reject => None,
        }
    }

    pub fn is_reject(&self) -> bool {
        matches!(self, SessionOutcome::Reject)
    }

    pub fn parse(s: &str, lambda: usize) -> Result<Self, BitError> {
        match s.trim() {
            "REJECT" => Ok(SessionOutcome::Reject),
            other => {
                let hex = other
                    .strip_prefix("key ")
                    .ok_or_else(|| BitError::Hex(format!("bad session outcome {other:?}")))?;
                Ok(SessionOutcome::Key(BitString::from_hex(hex.trim(), lambda)?))
            }
        }
    }
}

/// `key <hex>` or `REJECT`.
impl fmt::Display for SessionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SessionOutcome::Key(k) => write!(f, "key {}", k.to_hex()),
            SessionOutcome::Reject => f.write_str("REJECT"),
        }
    }
}

/// Bob's side of the exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecondOutcome {
    Sent { response: Response, key: BitString },
    Reject,
}

impl SecondOutcome {
    pub fn outcome(&self) -> SessionOutcome {
        match self {
            SecondOutcome::Sent { key, .. } => SessionOutcome::Key(key.clone()),
            SecondOutcome::Reject => SessionOutcome::Reject,
        }
    }

    pub fn response(&self) -> Option<&Response> {
        match self {
            SecondOutcome::Sent { response, .. } => Some(response),
            SecondOutcome::Reject => None,
        }
    }
}

pub fn qkd_first<R: RngCore + ?Sized>(
    params: &QkdParams,
    rng: &mut R,
) -> Result<(FirstMessage, AliceState), QkdError> {
    let n = params.instances();
    let mut sks = Vec::with_capacity(n);
    let mut pks = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for _ in 0..n {
        let sk = ev_skgen(&params.scheme, rng)?;
        let pk = ev_pkgen(&sk)?;
        pks.push(pk.classical);
        states.push(pk.state);
        sks.push(sk);
    }
    Ok((FirstMessage { pks, states }, AliceState { params: *params, sks }))
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<(), QkdError> {
    if expected != found {
        return Err(QkdError::Length { what, expected, found });
    }
    Ok(())
}

/// Randomness is consumed in a fixed order: `k`, the hash seed, the OTS
/// coins, then one encryption per instance. Stops at the first abort.
pub fn qkd_second<R: RngCore + ?Sized>(
    msg: &FirstMessage,
    params: &QkdParams,
    rng: &mut R,
) -> Result<SecondOutcome, QkdError> {
    let n = params.instances();
    check_len("public keys", n, msg.pks.len())?;
    check_len("public-key registers", n, msg.states.len())?;

    let k = BitString::random(params.raw_key_bits(), rng);
    let hash = hash_sample(rng, params.lambda())?;
    let (vk, zk) = sgen_random(&params.ots, rng)?;
    let sig = sign(&zk, &k)?;
    let payload = k.concat(sig.bits());

    let mut cts = Vec::with_capacity(n);
    for (i, bit) in payload.iter().enumerate() {
        let ct = ev_enc(&msg.states[i], &msg.pks[i], bit, rng)?;
        if ct.is_abort() {
            return Ok(SecondOutcome::Reject);
        }
        cts.push(ct);
    }
    let key = hash_eval(&hash, &k)?;
    Ok(SecondOutcome::Sent {
        response: Response { hash, vk, cts },
        key,
    })
}

/// Instance `i < 4λ` carries key bit `i`; instance `4λ + j` carries
/// signature bit `j`.
pub fn qkd_decode(st: &AliceState, resp: &Response) -> Result<SessionOutcome, QkdError> {
    let params = &st.params;
    let n = params.instances();
    check_len("secret keys", n, st.sks.len())?;
    check_len("ciphertexts", n, resp.cts.len())?;
    if *resp.vk.params() != params.ots || resp.hash.lambda() != params.lambda() {
        return Ok(SessionOutcome::Reject);
    }
    let mut payload = BitString::zeros(0);
    for (sk, ct) in st.sks.iter().zip(&resp.cts) {
        match ev_dec(sk, ct) {
            Ok(bit) => payload.push(bit),
            Err(QpkeError::AbortCiphertext) | Err(QpkeError::Dimension { .. }) => {
                return Ok(SessionOutcome::Reject)
            }
            Err(e) => return Err(e.into()),
        }
    }
    let (k, sig) = payload.split_at(params.raw_key_bits())?;
    if !ver(&resp.vk, &k, &OtsSignature::from_bits(sig))? {
        return Ok(SessionOutcome::Reject);
    }
    Ok(SessionOutcome::Key(hash_eval(&resp.hash, &k)?))
}

/// Honest session on one stream. Alice's randomness comes first.
pub fn honest_session<R: RngCore + ?Sized>(params: &QkdParams, rng: &mut R) -> Result<QkdTranscript, QkdError> {
    let (first, st) = qkd_first(params, rng)?;
    let second = qkd_second(&first, params, rng)?;
    let alice = match second.response() {
        Some(resp) => qkd_decode(&st, resp)?,
        None => SessionOutcome::Reject,
    };
    Ok(QkdTranscript {
        params: *params,
        first,
        response: second.response().cloned(),
        alice,
        bob: second.outcome(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ots::accepts_pred;
    use crate::primitives::RngStream;

    fn params(lambda: usize, p: usize) -> QkdParams {
        QkdParams::new(SchemeParams::new(lambda, p).unwrap()).unwrap()
    }

    #[test]
    fn instance_count() {
        let q = params(4, 5);
        assert_eq!(q.raw_key_bits(), 16);
        assert_eq!(q.sig_bits(), 16 * 5);
        assert_eq!(q.instances(), 16 + 80);
        let (first, st) = qkd_first(&q, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(first.pks.len(), 96);
        assert_eq!(first.states.len(), 96);
        assert_eq!(st.sks.len(), 96);
    }

    #[test]
    fn first_message_is_honest_and_reproducible() {
        let q = params(2, 6);
        let (first, _) = qkd_first(&q, &mut RngStream::new(2, 0)).unwrap();
        for (pk, state) in first.pks.iter().zip(&first.states) {
            let pred = accepts_pred(&pk.vk0, &pk.vk1).unwrap();
            assert_eq!(state.accept_ratio(&pred), (2, 2));
        }
        assert_eq!(first, qkd_first(&q, &mut RngStream::new(2, 0)).unwrap().0);
    }

    #[test]
    fn honest_sessions_agree() {
        for lambda in [2, 4] {
            let q = params(lambda, 6);
            for s in 0..50 {
                let t = honest_session(&q, &mut RngStream::new(3, s)).unwrap();
                let key = t.bob.key().expect("honest Bob never rejects");
                assert_eq!(key.len(), lambda);
                assert_eq!(t.alice, t.bob);
            }
        }
    }

    #[test]
    fn invalid_register_rejects() {
        let q = params(2, 6);
        let mut rng = RngStream::new(4, 0);
        let (mut first, _) = qkd_first(&q, &mut rng).unwrap();
        let mut bogus = first.states[5].terms()[0].basis.clone();
        bogus.flip(1);
        first.states[5] = SparseState::basis(bogus);
        assert_eq!(qkd_second(&first, &q, &mut rng).unwrap(), SecondOutcome::Reject);
    }

    #[test]
    fn length_errors() {
        let q = params(2, 6);
        let mut rng = RngStream::new(5, 0);
        let (mut first, st) = qkd_first(&q, &mut rng).unwrap();
        let second = qkd_second(&first, &q, &mut rng).unwrap();
        let mut resp = second.response().unwrap().clone();
        resp.cts.pop();
        assert!(matches!(qkd_decode(&st, &resp), Err(QkdError::Length { .. })));
        first.pks.pop();
        assert!(matches!(qkd_second(&first, &q, &mut rng), Err(QkdError::Length { .. })));
    }

    #[test]
    fn flipped_ciphertext_rejects() {
        let q = params(2, 16);
        let mut rejects = 0;
        let trials = 200;
        for s in 0..trials {
            let mut rng = RngStream::new(6, s);
            let (first, st) = qkd_first(&q, &mut rng).unwrap();
            let mut resp = qkd_second(&first, &q, &mut rng).unwrap().response().unwrap().clone();
            let i = rng.below(q.instances() as u64) as usize;
            if let EvCiphertext::Valid { ct1, .. } = &mut resp.cts[i] {
                *ct1 = !*ct1;
            }
            rejects += qkd_decode(&st, &resp).unwrap().is_reject() as u32;
        }
        assert_eq!(rejects, trials as u32);
    }

    #[test]
    fn outcome_text() {
        let k = SessionOutcome::Key(BitString::from_u64(0b1010, 4).unwrap());
        assert_eq!(k.to_string(), "key a0");
        assert_eq!(SessionOutcome::parse("key a0", 4).unwrap(), k);
        assert_eq!(SessionOutcome::parse("REJECT", 4).unwrap(), SessionOutcome::Reject);
        assert!(SessionOutcome::parse("nope", 4).is_err());
    }
}
