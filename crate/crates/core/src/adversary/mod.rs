//! Security experiments and the adversarial channels that run inside them.
//!
//! A channel sees every public classical value but can only rewrite quantum
//! registers; the classical half of each flow travels over an authenticated
//! channel and is handed to the adversary by shared reference. Side
//! information is a classical log plus any states the adversary chose to keep.

mod channels;
mod experiments;
mod keysearch;

use std::fmt;

use thiserror::Error;

use crate::ots::{OtsError, OtsVerifyKey};
use crate::params::{ParamsError, SchemeParams};
use crate::primitives::RngStream;
use crate::qkd::{QkdError, Response};
use crate::qpke::{CompCiphertext, CompClassicalKey, EvCiphertext, EvClassicalKey, QpkeError};
use crate::qsim::{BitError, BitString, QsimError, SparseState};

pub use channels::{
    catalog, scenario, BlockSecondMessage, FlipCiphertextBit, Identity, KeysearchWrapper,
    MeasureResend, SubstituteBasisState, SubstituteGarbage, SCENARIOS,
};
pub use experiments::{
    run_exp_computational, run_exp_everlasting, run_qkdsec, ChannelModel, ExperimentKind,
    ExperimentRecord, Outcome,
};
pub use keysearch::{
    comp_keysearch_attack, ev_keyspace_bits, keysearch_attack, CompSearchHit, EvSearchHit,
    SearchMode, SearchOutcome,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("record line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Qpke(#[from] QpkeError),
    #[error(transparent)]
    Qkd(#[from] QkdError),
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Ots(#[from] OtsError),
    #[error(transparent)]
    Bits(#[from] BitError),
}

impl From<ParamsError> for AdversaryError {
    fn from(e: ParamsError) -> Self {
        AdversaryError::InvalidParams(e.0)
    }
}

/// Read-only view of one public key's classical part.
#[derive(Debug, Clone, Copy)]
pub enum PkView<'a> {
    Everlasting(&'a EvClassicalKey),
    Computational(&'a CompClassicalKey),
}

impl<'a> PkView<'a> {
    pub fn vks(&self) -> (&'a OtsVerifyKey, &'a OtsVerifyKey) {
        match self {
            PkView::Everlasting(pk) => (&pk.vk0, &pk.vk1),
            PkView::Computational(pk) => (&pk.vk0, &pk.vk1),
        }
    }
}

/// Ciphertext handed back to the adversary at the end of a QPKE experiment.
#[derive(Debug, Clone, Copy)]
pub enum Challenge<'a> {
    Everlasting(&'a EvCiphertext),
    Computational(&'a CompCiphertext),
}

/// What happens to Bob's response on its way to Alice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SecondAction {
    Deliver,
    Block,
    Replace(Response),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InternalRegister {
    pub log: Vec<String>,
    pub states: Vec<SparseState>,
    /// Recovered key material, if any: everlasting key-generation coins or a PRF key.
    pub secret: Option<BitString>,
}

impl InternalRegister {
    pub fn note(&mut self, line: impl Into<String>) {
        let line = line.into();
        debug_assert!(!line.contains('\n'));
        self.log.push(line);
    }
}

/// `log <text>`, `secret <len> <hex>` and `reg <state>` lines, with state
/// lines joined by `;`.
impl fmt::Display for InternalRegister {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.log {
            writeln!(f, "log {l}")?;
        }
        if let Some(s) = &self.secret {
            writeln!(f, "secret {} {}", s.len(), s.to_hex())?;
        }
        for st in &self.states {
            writeln!(f, "reg {}", st.to_string().replace('\n', ";"))?;
        }
        Ok(())
    }
}

pub struct Ctx<'a> {
    pub params: &'a SchemeParams,
}

/// An adversary sitting on the quantum channel.
///
/// Channels are stateless; all per-run memory lives in the
/// [`InternalRegister`] the experiment threads through the calls.
pub trait AdversaryChannel: Send + Sync {
    fn name(&self) -> &'static str;

    /// May replace any register; classical keys are visible but immutable.
    fn tamper_first(
        &self,
        _ctx: &Ctx<'_>,
        _views: &[PkView<'_>],
        _registers: &mut [SparseState],
        _internal: &mut InternalRegister,
        _rng: &mut RngStream,
    ) -> Result<(), AdversaryError> {
        Ok(())
    }

    fn tamper_second(
        &self,
        _ctx: &Ctx<'_>,
        _response: &Response,
        _internal: &mut InternalRegister,
        _rng: &mut RngStream,
    ) -> SecondAction {
        SecondAction::Deliver
    }

    /// Optional message guess once the challenge ciphertext is revealed.
    fn guess(
        &self,
        _ctx: &Ctx<'_>,
        _challenge: Challenge<'_>,
        _internal: &InternalRegister,
        _rng: &mut RngStream,
    ) -> Option<bool> {
        None
    }
}
