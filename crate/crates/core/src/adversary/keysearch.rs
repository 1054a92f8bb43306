//! Unbounded key search: resample secret keys until the public key matches.
//!
//! Any matching secret key is functionally equivalent to the real one: the
//! adversary hands its own honestly generated register to the challenger, so
//! encryption runs on a valid pair and the recovered key decrypts with
//! certainty. The budget counts candidate keys tried.

use super::AdversaryError;
use crate::params::SchemeParams;
use crate::primitives::{PrfKey, RngStream};
use crate::qpke::{
    comp_derive, ev_pkgen, ev_skgen_coin_bits, ev_skgen_from_coins, CompClassicalKey, CompPublicKey,
    CompSecretKey, EvClassicalKey, EvPublicKey, EvSecretKey,
};
use crate::qsim::{BitString, SparseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Candidates `0, 1, 2, ...` in order; never repeats.
    Enumerate,
    /// Independent uniform candidates, as in the textbook loop.
    Sample,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome<H> {
    pub hit: Option<H>,
    pub iterations: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvSearchHit {
    pub coins: BitString,
    pub sk: EvSecretKey,
    pub pk: EvPublicKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompSearchHit {
    pub sk: CompSecretKey,
    pub pk: CompPublicKey,
}

pub fn ev_keyspace_bits(params: &SchemeParams) -> usize {
    ev_skgen_coin_bits(params)
}

fn space(bits: usize) -> u64 {
    1u64.checked_shl(bits as u32).unwrap_or(u64::MAX)
}

/// Candidate `i` of a `bits`-wide space, zero-extended on the left.
fn indexed(i: u64, bits: usize) -> BitString {
    let low = bits.min(64);
    BitString::zeros(bits - low).concat(&BitString::from_u64(i, low).expect("width <= 64"))
}

fn search<H>(
    bits: usize,
    budget: u64,
    mode: SearchMode,
    rng: &mut RngStream,
    mut test: impl FnMut(BitString) -> Result<Option<H>, AdversaryError>,
) -> Result<SearchOutcome<H>, AdversaryError> {
    let limit = match mode {
        SearchMode::Enumerate => budget.min(space(bits)),
        SearchMode::Sample => budget,
    };
    for i in 0..limit {
        let candidate = match mode {
            SearchMode::Enumerate => indexed(i, bits),
            SearchMode::Sample => rng.bits(bits),
        };
        if let Some(hit) = test(candidate)? {
            return Ok(SearchOutcome {
                hit: Some(hit),
                iterations: i + 1,
            });
        }
    }
    Ok(SearchOutcome {
        hit: None,
        iterations: limit,
    })
}

pub fn keysearch_attack(
    pk: &EvClassicalKey,
    params: &SchemeParams,
    budget: u64,
    mode: SearchMode,
    rng: &mut RngStream,
) -> Result<SearchOutcome<EvSearchHit>, AdversaryError> {
    search(ev_keyspace_bits(params), budget, mode, rng, |coins| {
        let sk = ev_skgen_from_coins(params, &coins)?;
        if sk.vk0 != pk.vk0 || sk.vk1 != pk.vk1 {
            return Ok(None);
        }
        let pk = ev_pkgen(&sk)?;
        Ok(Some(EvSearchHit { coins, sk, pk }))
    })
}

/// Searches PRF keys `k` whose derived verification keys match `pk` at its
/// public `(r0, r1)`.
pub fn comp_keysearch_attack(
    pk: &CompClassicalKey,
    params: &SchemeParams,
    budget: u64,
    mode: SearchMode,
    rng: &mut RngStream,
) -> Result<SearchOutcome<CompSearchHit>, AdversaryError> {
    search(params.lambda, budget, mode, rng, |k| {
        let sk = CompSecretKey {
            k: PrfKey::new(k).map_err(crate::qpke::QpkeError::from)?,
            params: *params,
        };
        let keys = comp_derive(&sk, &pk.r0, &pk.r1)?;
        if keys.vk0 != pk.vk0 || keys.vk1 != pk.vk1 {
            return Ok(None);
        }
        let state = SparseState::superpose2(keys.basis_string(false), keys.basis_string(true), false)?;
        Ok(Some(CompSearchHit {
            pk: CompPublicKey {
                state,
                classical: pk.clone(),
            },
            sk,
        }))
    })
}
