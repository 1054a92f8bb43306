//! Quantum public-key encryption of single bits, and the bit-by-bit wrapper.

mod computational;
mod everlasting;

use rand::RngCore;
use thiserror::Error;

use crate::ots::OtsError;
use crate::params::ParamsError;
use crate::primitives::PrimitiveError;
use crate::qsim::{BitError, BitString, QsimError};

pub use computational::{
    comp_dec, comp_dec_probability_one, comp_derive, comp_enc, comp_pkgen, comp_skgen,
    CompCiphertext, CompClassicalKey, CompPublicKey, CompSecretKey, DerivedKeys,
};
pub use everlasting::{
    ev_ciphertext_law, ev_dec, ev_enc, ev_pkgen, ev_skgen, ev_skgen_coin_bits,
    ev_skgen_from_coins, EvCiphertext, EvClassicalKey, EvPublicKey, EvSecretKey,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QpkeError {
    #[error("cannot decrypt an aborted ciphertext")]
    AbortCiphertext,
    #[error("ciphertext at position {0} is an abort")]
    AbortAt(usize),
    #[error("ciphertext register has support outside the signature span")]
    SupportMismatch,
    #[error("{what}: expected width {expected}, found {found}")]
    Dimension {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} keys, found {found}")]
    KeyCount { expected: usize, found: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Ots(#[from] OtsError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Primitive(#[from] PrimitiveError),
    #[error(transparent)]
    Bits(#[from] BitError),
}

impl From<ParamsError> for QpkeError {
    fn from(e: ParamsError) -> Self {
        QpkeError::InvalidParams(e.0)
    }
}

/// Common shape of the two one-bit schemes.
pub trait OneBitQpke {
    type SecretKey;
    type PublicKey;
    type Ciphertext;

    fn encrypt<R: RngCore + ?Sized>(
        pk: &Self::PublicKey,
        m: bool,
        rng: &mut R,
    ) -> Result<Self::Ciphertext, QpkeError>;

    fn decrypt<R: RngCore + ?Sized>(
        sk: &Self::SecretKey,
        ct: &Self::Ciphertext,
        rng: &mut R,
    ) -> Result<bool, QpkeError>;

    fn is_abort(ct: &Self::Ciphertext) -> bool;
}

pub struct Everlasting;

pub struct Computational;

impl OneBitQpke for Everlasting {
    type SecretKey = EvSecretKey;
    type PublicKey = EvPublicKey;
    type Ciphertext = EvCiphertext;

    fn encrypt<R: RngCore + ?Sized>(pk: &EvPublicKey, m: bool, rng: &mut R) -> Result<EvCiphertext, QpkeError> {
        ev_enc(&pk.state, &pk.classical, m, rng)
    }

    fn decrypt<R: RngCore + ?Sized>(sk: &EvSecretKey, ct: &EvCiphertext, _rng: &mut R) -> Result<bool, QpkeError> {
        ev_dec(sk, ct)
    }

    fn is_abort(ct: &EvCiphertext) -> bool {
        ct.is_abort()
    }
}

impl OneBitQpke for Computational {
    type SecretKey = CompSecretKey;
    type PublicKey = CompPublicKey;
    type Ciphertext = CompCiphertext;

    fn encrypt<R: RngCore + ?Sized>(pk: &CompPublicKey, m: bool, rng: &mut R) -> Result<CompCiphertext, QpkeError> {
        comp_enc(&pk.state, &pk.classical, m, rng)
    }

    fn decrypt<R: RngCore + ?Sized>(sk: &CompSecretKey, ct: &CompCiphertext, rng: &mut R) -> Result<bool, QpkeError> {
        comp_dec(sk, ct, rng)
    }

    fn is_abort(ct: &CompCiphertext) -> bool {
        ct.is_abort()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MultiCiphertext<C> {
    Valid(Vec<C>),
    /// First position whose encryption aborted.
    Abort { position: usize },
}

/// Encrypts bit `i` of `m` under `pks[i]`; stops at the first abort.
pub fn multibit_enc<S: OneBitQpke, R: RngCore + ?Sized>(
    pks: &[S::PublicKey],
    m: &BitString,
    rng: &mut R,
) -> Result<MultiCiphertext<S::Ciphertext>, QpkeError> {
    if pks.len() != m.len() {
        return Err(QpkeError::KeyCount {
            expected: m.len(),
            found: pks.len(),
        });
    }
    let mut cts = Vec::with_capacity(m.len());
    for (i, (pk, bit)) in pks.iter().zip(m.iter()).enumerate() {
        let ct = S::encrypt(pk, bit, rng)?;
        if S::is_abort(&ct) {
            return Ok(MultiCiphertext::Abort { position: i });
        }
        cts.push(ct);
    }
    Ok(MultiCiphertext::Valid(cts))
}

pub fn multibit_dec<S: OneBitQpke, R: RngCore + ?Sized>(
    sks: &[S::SecretKey],
    ct: &MultiCiphertext<S::Ciphertext>,
    rng: &mut R,
) -> Result<BitString, QpkeError> {
    let cts = match ct {
        MultiCiphertext::Abort { position } => return Err(QpkeError::AbortAt(*position)),
        MultiCiphertext::Valid(cts) => cts,
    };
    if sks.len() != cts.len() {
        return Err(QpkeError::KeyCount {
            expected: cts.len(),
            found: sks.len(),
        });
    }
    let mut out = BitString::zeros(0);
    for (i, (sk, c)) in sks.iter().zip(cts).enumerate() {
        if S::is_abort(c) {
            return Err(QpkeError::AbortAt(i));
        }
        out.push(S::decrypt(sk, c, rng)?);
    }
    Ok(out)
}
