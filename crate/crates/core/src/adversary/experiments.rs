use std::fmt;

use super::{AdversaryChannel, AdversaryError, Challenge, Ctx, InternalRegister, PkView, SecondAction};
use crate::params::SchemeParams;
use crate::primitives::RngStream;
use crate::qkd::{qkd_decode, qkd_first, qkd_second, QkdParams, SecondOutcome, SessionOutcome};
use crate::qpke::{
    comp_dec, comp_enc, comp_pkgen, comp_skgen, ev_dec, ev_enc, ev_pkgen, ev_skgen, CompCiphertext,
    EvCiphertext,
};
use crate::qsim::{BitString, SparseState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentKind {
    Everlasting,
    Computational,
    Qkd,
}

impl ExperimentKind {
    pub fn id(self) -> &'static str {
        match self {
            ExperimentKind::Everlasting => "ev-qpke",
            ExperimentKind::Computational => "comp-qpke",
            ExperimentKind::Qkd => "qkd",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        [Self::Everlasting, Self::Computational, Self::Qkd]
            .into_iter()
            .find(|k| k.id() == s)
    }
}

/// How the classical half of the response is carried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelModel {
    /// Modified classical data is detected and dropped, so a replacement
    /// behaves like a block.
    #[default]
    Authenticated,
    /// Replacements reach Alice; the signature check is all that stands in
    /// the way.
    Unauthenticated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Everlasting {
        m: bool,
        ct: EvCiphertext,
        /// Challenger's decryption with the real key; `None` on abort.
        dec: Option<bool>,
        guess: Option<bool>,
    },
    Computational {
        m: bool,
        copies: usize,
        /// Whether all issued copies carry distinct `(r0, r1)`.
        distinct_r: bool,
        ct: CompCiphertext,
        dec: Option<bool>,
        guess: Option<bool>,
    },
    Qkd {
        /// Bob's key.
        k0: SessionOutcome,
        /// Alice's key.
        k1: SessionOutcome,
        /// Classical bytes at each receiver equal the sender's.
        classical_intact: bool,
    },
}

impl Outcome {
    pub fn is_abort(&self) -> bool {
        match self {
            Outcome::Everlasting { ct, .. } => ct.is_abort(),
            Outcome::Computational { ct, .. } => ct.is_abort(),
            Outcome::Qkd { k0, .. } => k0.is_reject(),
        }
    }
}

/// One trial of one experiment under one scenario; reproducible from
/// `(scenario, seed, trial)` and the parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRecord {
    pub kind: ExperimentKind,
    pub scenario: String,
    pub seed: u64,
    pub trial: u64,
    pub params: SchemeParams,
    pub outcome: Outcome,
    pub internal: InternalRegister,
}

fn record(
    kind: ExperimentKind,
    adv: &dyn AdversaryChannel,
    params: &SchemeParams,
    rng: &RngStream,
    outcome: Outcome,
    internal: InternalRegister,
) -> ExperimentRecord {
    ExperimentRecord {
        kind,
        scenario: adv.name().to_string(),
        seed: rng.seed(),
        trial: rng.stream_id(),
        params: *params,
        outcome,
        internal,
    }
}

/// Key generation, the adversary's pass over `(ρ, pk)`, encryption of `m`
/// with the returned register, then the adversary's guess.
pub fn run_exp_everlasting(
    adv: &dyn AdversaryChannel,
    m: bool,
    params: &SchemeParams,
    rng: &mut RngStream,
) -> Result<ExperimentRecord, AdversaryError> {
    let ctx = Ctx { params };
    let sk = ev_skgen(params, rng)?;
    let pk = ev_pkgen(&sk)?;
    let mut internal = InternalRegister::default();
    let mut regs = [pk.state.clone()];
    adv.tamper_first(&ctx, &[PkView::Everlasting(&pk.classical)], &mut regs, &mut internal, rng)?;
    let ct = ev_enc(&regs[0], &pk.classical, m, rng)?;
    let dec = ev_dec(&sk, &ct).ok();
    let guess = adv.guess(&ctx, Challenge::Everlasting(&ct), &internal, rng);
    let outcome = Outcome::Everlasting { m, ct, dec, guess };
    Ok(record(ExperimentKind::Everlasting, adv, params, rng, outcome, internal))
}

/// `n` public keys from one secret key; the challenge uses the first.
pub fn run_exp_computational(
    adv: &dyn AdversaryChannel,
    m: bool,
    n: usize,
    params: &SchemeParams,
    rng: &mut RngStream,
) -> Result<ExperimentRecord, AdversaryError> {
    if n == 0 {
        return Err(AdversaryError::InvalidParams("at least one public key copy".into()));
    }
    let ctx = Ctx { params };
    let sk = comp_skgen(params, rng)?;
    let pks = (0..n).map(|_| comp_pkgen(&sk, rng)).collect::<Result<Vec<_>, _>>()?;
    let mut rs: Vec<(&BitString, &BitString)> = pks.iter().map(|p| (&p.classical.r0, &p.classical.r1)).collect();
    rs.sort();
    rs.dedup();
    let distinct_r = rs.len() == n;

    let views: Vec<_> = pks.iter().map(|p| PkView::Computational(&p.classical)).collect();
    let mut regs: Vec<SparseState> = pks.iter().map(|p| p.state.clone()).collect();
    let mut internal = InternalRegister::default();
    adv.tamper_first(&ctx, &views, &mut regs, &mut internal, rng)?;
    let ct = comp_enc(&regs[0], &pks[0].classical, m, rng)?;
    let dec = comp_dec(&sk, &ct, rng).ok();
    let guess = adv.guess(&ctx, Challenge::Computational(&ct), &internal, rng);
    let outcome = Outcome::Computational {
        m,
        copies: n,
        distinct_r,
        ct,
        dec,
        guess,
    };
    Ok(record(ExperimentKind::Computational, adv, params, rng, outcome, internal))
}

/// Full session with the adversary on both flows. `k0` is Bob's output and
/// `k1` Alice's; both are rejections when Bob aborts.
pub fn run_qkdsec(
    adv: &dyn AdversaryChannel,
    model: ChannelModel,
    params: &QkdParams,
    rng: &mut RngStream,
) -> Result<ExperimentRecord, AdversaryError> {
    let ctx = Ctx { params: &params.scheme };
    let (mut first, st) = qkd_first(params, rng)?;
    let sent_pks: Vec<String> = first.pks.iter().map(|p| format!("{}{}", p.vk0, p.vk1)).collect();

    let mut internal = InternalRegister::default();
    let views: Vec<_> = first.pks.iter().map(PkView::Everlasting).collect();
    adv.tamper_first(&ctx, &views, &mut first.states, &mut internal, rng)?;
    let received_pks: Vec<String> = first.pks.iter().map(|p| format!("{}{}", p.vk0, p.vk1)).collect();
    let mut classical_intact = sent_pks == received_pks;

    let (k0, k1) = match qkd_second(&first, params, rng)? {
        SecondOutcome::Reject => (SessionOutcome::Reject, SessionOutcome::Reject),
        SecondOutcome::Sent { response, key } => {
            let k1 = match adv.tamper_second(&ctx, &response, &mut internal, rng) {
                SecondAction::Deliver => qkd_decode(&st, &response)?,
                SecondAction::Block => SessionOutcome::Reject,
                SecondAction::Replace(forged) => match model {
                    ChannelModel::Authenticated if forged != response => SessionOutcome::Reject,
                    _ => {
                        classical_intact &= forged == response;
                        qkd_decode(&st, &forged)?
                    }
                },
            };
            (SessionOutcome::Key(key), k1)
        }
    };
    let outcome = Outcome::Qkd {
        k0,
        k1,
        classical_intact,
    };
    Ok(record(ExperimentKind::Qkd, adv, &params.scheme, rng, outcome, internal))
}

fn opt_bit(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "1",
        Some(false) => "0",
        None => "-",
    }
}

impl fmt::Display for ExperimentRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(
            f,
            "record {} scenario={} seed={} trial={}",
            self.kind.id(),
            self.scenario,
            self.seed,
            self.trial
        )?;
        writeln!(
            f,
            "params lambda={} preimage_bits={} owf_rounds={} ots_seed_bits={}",
            p.lambda, p.preimage_bits, p.owf_rounds, p.ots_seed_bits
        )?;
        match &self.outcome {
            Outcome::Everlasting { m, ct, dec, guess } => {
                writeln!(f, "m {}", *m as u8)?;
                writeln!(f, "ct {ct}")?;
                writeln!(f, "dec {}", opt_bit(*dec))?;
                writeln!(f, "guess {}", opt_bit(*guess))?;
            }
            Outcome::Computational {
                m,
                copies,
                distinct_r,
                ct,
                dec,
                guess,
            } => {
                writeln!(f, "m {}", *m as u8)?;
                writeln!(f, "copies {copies}")?;
                writeln!(f, "distinct_r {}", *distinct_r as u8)?;
                writeln!(f, "ct {}", ct.to_string().replace('\n', ";"))?;
                writeln!(f, "dec {}", opt_bit(*dec))?;
                writeln!(f, "guess {}", opt_bit(*guess))?;
            }
            Outcome::Qkd {
                k0,
                k1,
                classical_intact,
            } => {
                writeln!(f, "k0 {k0}")?;
                writeln!(f, "k1 {k1}")?;
                writeln!(f, "classical_intact {}", *classical_intact as u8)?;
            }
        }
        write!(f, "{}", self.internal)?;
        writeln!(f, "end")
    }
}

struct Lines<'a> {
    inner: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> AdversaryError {
        AdversaryError::Parse {
            line: self.last,
            msg: msg.into(),
        }
    }

    /// Next line, which must start with `tag `; returns the rest.
    fn field(&mut self, tag: &str) -> Result<&'a str, AdversaryError> {
        let (i, line) = self.inner.next().ok_or_else(|| self.err(format!("missing {tag:?} line")))?;
        self.last = i + 1;
        line.strip_prefix(tag)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected {tag:?}")))
    }

    fn bit(&mut self, tag: &str) -> Result<bool, AdversaryError> {
        match self.field(tag)? {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(self.err(format!("bad {tag} bit"))),
        }
    }

    fn opt_bit(&mut self, tag: &str) -> Result<Option<bool>, AdversaryError> {
        match self.field(tag)? {
            "0" => Ok(Some(false)),
            "1" => Ok(Some(true)),
            "-" => Ok(None),
            _ => Err(self.err(format!("bad {tag} value"))),
        }
    }

    fn peek_tag(&mut self) -> Option<&'a str> {
        self.inner.peek().map(|(_, l)| l.split(' ').next().unwrap_or(""))
    }
}

fn key_values<'a>(s: &'a str, lines: &Lines<'_>) -> Result<Vec<(&'a str, &'a str)>, AdversaryError> {
    s.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| lines.err(format!("bad field {kv:?}"))))
        .collect()
}

impl ExperimentRecord {
    /// Parses a sequence of records as written by `Display`.
    pub fn parse_all(text: &str) -> Result<Vec<Self>, AdversaryError> {
        let mut lines = Lines {
            inner: text.lines().enumerate().peekable(),
            last: 0,
        };
        let mut out = Vec::new();
        while lines.inner.peek().is_some() {
            out.push(Self::parse_one(&mut lines)?);
        }
        Ok(out)
    }

    fn parse_one(lines: &mut Lines<'_>) -> Result<Self, AdversaryError> {
        let head = lines.field("record")?;
        let (kind, rest) = head.split_once(' ').ok_or_else(|| lines.err("bad record header"))?;
        let kind = ExperimentKind::from_id(kind).ok_or_else(|| lines.err(format!("unknown experiment {kind:?}")))?;
        let (mut scenario, mut seed, mut trial) = (None, None, None);
        for (k, v) in key_values(rest, lines)? {
            match k {
                "scenario" => scenario = Some(v.to_string()),
                "seed" => seed = v.parse().ok(),
                "trial" => trial = v.parse().ok(),
                _ => return Err(lines.err(format!("unknown field {k:?}"))),
            }
        }
        let (Some(scenario), Some(seed), Some(trial)) = (scenario, seed, trial) else {
            return Err(lines.err("incomplete record header"));
        };

        let mut params = SchemeParams::default();
        for (k, v) in key_values(lines.field("params")?, lines)? {
            let v: usize = v.parse().map_err(|_| lines.err(format!("bad value for {k}")))?;
            match k {
                "lambda" => params.lambda = v,
                "preimage_bits" => params.preimage_bits = v,
                "owf_rounds" => params.owf_rounds = v as u32,
                "ots_seed_bits" => params.ots_seed_bits = v,
                _ => return Err(lines.err(format!("unknown field {k:?}"))),
            }
        }
        params.validate().map_err(|e| lines.err(e.0))?;

        let outcome = match kind {
            ExperimentKind::Everlasting => {
                let m = lines.bit("m")?;
                let ct = EvCiphertext::parse(lines.field("ct")?, params.sig_bits())
                    .map_err(|e| lines.err(e.to_string()))?;
                Outcome::Everlasting {
                    m,
                    ct,
                    dec: lines.opt_bit("dec")?,
                    guess: lines.opt_bit("guess")?,
                }
            }
            ExperimentKind::Computational => {
                let m = lines.bit("m")?;
                let copies = lines.field("copies")?.parse().map_err(|_| lines.err("bad copies"))?;
                let distinct_r = lines.bit("distinct_r")?;
                let ct = CompCiphertext::parse(&lines.field("ct")?.replace(';', "\n"), params.lambda)
                    .map_err(|e| lines.err(e.to_string()))?;
                Outcome::Computational {
                    m,
                    copies,
                    distinct_r,
                    ct,
                    dec: lines.opt_bit("dec")?,
                    guess: lines.opt_bit("guess")?,
                }
            }
            ExperimentKind::Qkd => {
                let k0 = SessionOutcome::parse(lines.field("k0")?, params.lambda).map_err(|e| lines.err(e.to_string()))?;
                let k1 = SessionOutcome::parse(lines.field("k1")?, params.lambda).map_err(|e| lines.err(e.to_string()))?;
                Outcome::Qkd {
                    k0,
                    k1,
                    classical_intact: lines.bit("classical_intact")?,
                }
            }
        };

        let mut internal = InternalRegister::default();
        loop {
            match lines.peek_tag() {
                Some("log") => internal.log.push(lines.field("log")?.to_string()),
                Some("secret") => {
                    let s = lines.field("secret")?;
                    let (len, hex) = s.split_once(' ').ok_or_else(|| lines.err("bad secret"))?;
                    let len = len.parse().map_err(|_| lines.err("bad secret length"))?;
                    internal.secret = Some(BitString::from_hex(hex, len).map_err(|e| lines.err(e.to_string()))?);
                }
                Some("reg") => {
                    let s = lines.field("reg")?.replace(';', "\n");
                    internal.states.push(s.parse().map_err(|e: crate::qsim::QsimError| lines.err(e.to_string()))?);
                }
                Some("end") => {
                    let (i, _) = lines.inner.next().expect("peeked");
                    lines.last = i + 1;
                    break;
                }
                _ => {
                    lines.last += 1;
                    return Err(lines.err("expected log, secret, reg or end"));
                }
            }
        }
        Ok(Self {
            kind,
            scenario,
            seed,
            trial,
            params,
            outcome,
            internal,
        })
    }
}
