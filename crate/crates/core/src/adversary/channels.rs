use super::{
    comp_keysearch_attack, keysearch_attack, AdversaryChannel, AdversaryError, Challenge, Ctx,
    InternalRegister, PkView, SearchMode, SecondAction,
};
use crate::ots::accepts_pred;
use crate::primitives::{PrfKey, RngStream};
use crate::qkd::Response;
use crate::qpke::{comp_dec, ev_dec, ev_skgen_from_coins, CompSecretKey, EvCiphertext};
use crate::qsim::{BasisPredicate, SparseState};

pub const SCENARIOS: [&str; 7] = [
    "identity",
    "measure_resend",
    "substitute_basis_state",
    "substitute_garbage",
    "flip_ciphertext_bit",
    "block_second_message",
    "keysearch_wrapper",
];

/// Every catalog scenario; `budget` only affects `keysearch_wrapper`.
pub fn catalog(budget: u64) -> Vec<Box<dyn AdversaryChannel>> {
    SCENARIOS
        .iter()
        .map(|n| scenario(n, budget).expect("catalog names resolve"))
        .collect()
}

pub fn scenario(name: &str, budget: u64) -> Result<Box<dyn AdversaryChannel>, AdversaryError> {
    Ok(match name {
        "identity" => Box::new(Identity),
        "measure_resend" => Box::new(MeasureResend),
        "substitute_basis_state" => Box::new(SubstituteBasisState),
        "substitute_garbage" => Box::new(SubstituteGarbage),
        "flip_ciphertext_bit" => Box::new(FlipCiphertextBit),
        "block_second_message" => Box::new(BlockSecondMessage),
        "keysearch_wrapper" => Box::new(KeysearchWrapper { budget }),
        other => return Err(AdversaryError::UnknownScenario(other.to_string())),
    })
}

pub struct Identity;

impl AdversaryChannel for Identity {
    fn name(&self) -> &'static str {
        "identity"
    }
}

/// Measures each register in the computational basis and forwards the
/// outcome; only the classical result is remembered.
pub struct MeasureResend;

impl AdversaryChannel for MeasureResend {
    fn name(&self) -> &'static str {
        "measure_resend"
    }

    fn tamper_first(
        &self,
        _ctx: &Ctx<'_>,
        _views: &[PkView<'_>],
        registers: &mut [SparseState],
        internal: &mut InternalRegister,
        rng: &mut RngStream,
    ) -> Result<(), AdversaryError> {
        for (i, reg) in registers.iter_mut().enumerate() {
            let x = reg.measure_computational(rng);
            internal.note(format!("measured {i} {x}"));
            *reg = SparseState::basis(x);
        }
        Ok(())
    }
}

/// Collapses each register to a valid basis string `|b, σ_b>` and keeps a
/// copy of the substituted state.
pub struct SubstituteBasisState;

impl AdversaryChannel for SubstituteBasisState {
    fn name(&self) -> &'static str {
        "substitute_basis_state"
    }

    fn tamper_first(
        &self,
        _ctx: &Ctx<'_>,
        _views: &[PkView<'_>],
        registers: &mut [SparseState],
        internal: &mut InternalRegister,
        rng: &mut RngStream,
    ) -> Result<(), AdversaryError> {
        for reg in registers.iter_mut() {
            let collapsed = SparseState::basis(reg.measure_computational(rng));
            internal.states.push(collapsed.clone());
            *reg = collapsed;
        }
        Ok(())
    }
}

/// Replaces every register with a uniformly random invalid basis string.
pub struct SubstituteGarbage;

impl AdversaryChannel for SubstituteGarbage {
    fn name(&self) -> &'static str {
        "substitute_garbage"
    }

    fn tamper_first(
        &self,
        _ctx: &Ctx<'_>,
        views: &[PkView<'_>],
        registers: &mut [SparseState],
        internal: &mut InternalRegister,
        rng: &mut RngStream,
    ) -> Result<(), AdversaryError> {
        for (i, (view, reg)) in views.iter().zip(registers.iter_mut()).enumerate() {
            let (vk0, vk1) = view.vks();
            let pred = accepts_pred(vk0, vk1)?;
            let garbage = loop {
                let x = rng.bits(reg.n_qubits());
                if !pred.accepts(&x) {
                    break x;
                }
            };
            internal.note(format!("garbage {i} {garbage}"));
            *reg = SparseState::basis(garbage);
        }
        Ok(())
    }
}

/// Flips the message-carrying bit of one uniformly chosen ciphertext in the
/// response. Only takes effect on an unauthenticated classical channel.
pub struct FlipCiphertextBit;

impl AdversaryChannel for FlipCiphertextBit {
    fn name(&self) -> &'static str {
        "flip_ciphertext_bit"
    }

    fn tamper_second(
        &self,
        _ctx: &Ctx<'_>,
        response: &Response,
        internal: &mut InternalRegister,
        rng: &mut RngStream,
    ) -> SecondAction {
        let mut forged = response.clone();
        if forged.cts.is_empty() {
            return SecondAction::Deliver;
        }
        let i = rng.below(forged.cts.len() as u64) as usize;
        if let EvCiphertext::Valid { ct1, .. } = &mut forged.cts[i] {
            *ct1 = !*ct1;
        }
        internal.note(format!("flipped {i}"));
        SecondAction::Replace(forged)
    }
}

pub struct BlockSecondMessage;

impl AdversaryChannel for BlockSecondMessage {
    fn name(&self) -> &'static str {
        "block_second_message"
    }

    fn tamper_second(
        &self,
        _ctx: &Ctx<'_>,
        _response: &Response,
        internal: &mut InternalRegister,
        _rng: &mut RngStream,
    ) -> SecondAction {
        internal.note("blocked");
        SecondAction::Block
    }
}

/// Key search against the first public key with a bounded candidate budget.
/// On success the real register is swapped for the adversary's own, and the
/// recovered key decrypts the challenge.
pub struct KeysearchWrapper {
    pub budget: u64,
}

impl AdversaryChannel for KeysearchWrapper {
    fn name(&self) -> &'static str {
        "keysearch_wrapper"
    }

    fn tamper_first(
        &self,
        ctx: &Ctx<'_>,
        views: &[PkView<'_>],
        registers: &mut [SparseState],
        internal: &mut InternalRegister,
        rng: &mut RngStream,
    ) -> Result<(), AdversaryError> {
        let (Some(view), Some(reg)) = (views.first(), registers.first_mut()) else {
            return Ok(());
        };
        let mode = SearchMode::Enumerate;
        let (found, iterations) = match view {
            PkView::Everlasting(pk) => {
                let out = keysearch_attack(pk, ctx.params, self.budget, mode, rng)?;
                let found = out.hit.map(|h| (h.coins, h.pk.state));
                (found, out.iterations)
            }
            PkView::Computational(pk) => {
                let out = comp_keysearch_attack(pk, ctx.params, self.budget, mode, rng)?;
                let found = out.hit.map(|h| (h.sk.k.bits().clone(), h.pk.state));
                (found, out.iterations)
            }
        };
        internal.note(format!("searched {iterations}"));
        if let Some((secret, state)) = found {
            *reg = state;
            internal.secret = Some(secret);
        }
        Ok(())
    }

    fn guess(
        &self,
        ctx: &Ctx<'_>,
        challenge: Challenge<'_>,
        internal: &InternalRegister,
        rng: &mut RngStream,
    ) -> Option<bool> {
        let secret = internal.secret.as_ref()?;
        match challenge {
            Challenge::Everlasting(ct) => {
                let sk = ev_skgen_from_coins(ctx.params, secret).ok()?;
                ev_dec(&sk, ct).ok()
            }
            Challenge::Computational(ct) => {
                let sk = CompSecretKey {
                    k: PrfKey::new(secret.clone()).ok()?,
                    params: *ctx.params,
                };
                comp_dec(&sk, ct, rng).ok()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names() {
        let c = catalog(0);
        assert!(c.len() >= 7);
        let names: Vec<_> = c.iter().map(|a| a.name()).collect();
        assert_eq!(names, SCENARIOS.to_vec());
        assert!(matches!(scenario("nope", 0), Err(AdversaryError::UnknownScenario(_))));
    }
}
