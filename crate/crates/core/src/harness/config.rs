//! Run configuration: per-experiment defaults, an optional `key=value`
//! file, and command-line overrides, merged in that order.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use super::HarnessError;
use crate::adversary::{ChannelModel, SCENARIOS};
use crate::params::SchemeParams;

/// Environment variable consulted for the default seed.
pub const SEED_ENV: &str = "QPKE_SIM_SEED";

/// Largest key space the CLI will enumerate exhaustively.
pub const MAX_FULL_BUDGET_BITS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    EvQpke,
    CompQpke,
    Qkd,
    AppendixAttack,
    Extractor,
    OtsForgery,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::EvQpke,
        Experiment::CompQpke,
        Experiment::Qkd,
        Experiment::AppendixAttack,
        Experiment::Extractor,
        Experiment::OtsForgery,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Experiment::EvQpke => "ev-qpke",
            Experiment::CompQpke => "comp-qpke",
            Experiment::Qkd => "qkd",
            Experiment::AppendixAttack => "appendix-attack",
            Experiment::Extractor => "extractor",
            Experiment::OtsForgery => "ots-forgery",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Experiment {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|e| e.id() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// Exhaust the relevant search space.
    Full,
    Limited(u64),
}

impl Budget {
    /// Candidate count for a space of `bits` bits.
    pub fn resolve(self, bits: usize) -> u64 {
        match self {
            Budget::Full => 1u64.checked_shl(bits as u32).unwrap_or(u64::MAX),
            Budget::Limited(n) => n,
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Budget::Full => f.write_str("full"),
            Budget::Limited(n) => write!(f, "{n}"),
        }
    }
}

impl FromStr for Budget {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Budget::Full),
            n => n
                .parse()
                .map(Budget::Limited)
                .map_err(|_| HarnessError::Config(format!("budget must be an integer or \"full\", got {n:?}"))),
        }
    }
}

fn parse_channel(s: &str) -> Result<ChannelModel, HarnessError> {
    match s {
        "authenticated" => Ok(ChannelModel::Authenticated),
        "unauthenticated" => Ok(ChannelModel::Unauthenticated),
        _ => Err(HarnessError::Config(format!("unknown channel model {s:?}"))),
    }
}

fn channel_id(c: ChannelModel) -> &'static str {
    match c {
        ChannelModel::Authenticated => "authenticated",
        ChannelModel::Unauthenticated => "unauthenticated",
    }
}

/// Partially specified configuration, from a file or the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub experiment: Option<Experiment>,
    pub scenario: Option<String>,
    pub lambda: Option<usize>,
    pub preimage_bits: Option<usize>,
    pub owf_rounds: Option<u32>,
    pub ots_seed_bits: Option<usize>,
    pub trials: Option<u64>,
    pub budget: Option<Budget>,
    pub seed: Option<u64>,
    pub copies: Option<usize>,
    pub channel: Option<ChannelModel>,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// Parses `key=value` lines; `#` starts a comment.
    pub fn parse_file(text: &str) -> Result<Self, HarnessError> {
        let mut o = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| HarnessError::Config(format!("config line {}: {msg}", i + 1));
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let num = |v: &str| v.parse::<u64>().map_err(|_| err(format!("bad number for {k}: {v:?}")));
            match k {
                "experiment" => o.experiment = Some(v.parse().map_err(|e: HarnessError| err(e.to_string()))?),
                "scenario" => o.scenario = Some(v.to_string()),
                "lambda" => o.lambda = Some(num(v)? as usize),
                "preimage_bits" => o.preimage_bits = Some(num(v)? as usize),
                "owf_rounds" => o.owf_rounds = Some(num(v)? as u32),
                "ots_seed_bits" => o.ots_seed_bits = Some(num(v)? as usize),
                "trials" => o.trials = Some(num(v)?),
                "budget" => o.budget = Some(v.parse().map_err(|e: HarnessError| err(e.to_string()))?),
                "seed" => o.seed = Some(num(v)?),
                "copies" => o.copies = Some(num(v)? as usize),
                "channel" => o.channel = Some(parse_channel(v).map_err(|e| err(e.to_string()))?),
                "out" => o.out = Some(PathBuf::from(v)),
                _ => return Err(err(format!("unknown key {k:?}"))),
            }
        }
        Ok(o)
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: Overrides) -> Overrides {
        Overrides {
            experiment: other.experiment.or(self.experiment),
            scenario: other.scenario.or(self.scenario),
            lambda: other.lambda.or(self.lambda),
            preimage_bits: other.preimage_bits.or(self.preimage_bits),
            owf_rounds: other.owf_rounds.or(self.owf_rounds),
            ots_seed_bits: other.ots_seed_bits.or(self.ots_seed_bits),
            trials: other.trials.or(self.trials),
            budget: other.budget.or(self.budget),
            seed: other.seed.or(self.seed),
            copies: other.copies.or(self.copies),
            channel: other.channel.or(self.channel),
            out: other.out.or(self.out),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub scenario: String,
    pub params: SchemeParams,
    pub trials: u64,
    pub budget: Budget,
    pub seed: u64,
    /// Public-key copies in the computational experiment.
    pub copies: usize,
    pub channel: ChannelModel,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Defaults suited to `experiment`: toy sizes where a search must finish.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut params = SchemeParams::default();
        let mut scenario = "identity";
        let mut budget = Budget::Limited(1 << 10);
        let mut trials = 1000;
        match experiment {
            Experiment::EvQpke | Experiment::CompQpke => {}
            Experiment::Qkd => {
                params.lambda = 4;
                trials = 100;
            }
            Experiment::AppendixAttack => {
                params.lambda = 4;
                params.preimage_bits = 6;
                params.ots_seed_bits = 5;
                scenario = "keysearch_wrapper";
                budget = Budget::Full;
                trials = 100;
            }
            Experiment::Extractor => {
                params.lambda = 4;
                trials = 200;
            }
            Experiment::OtsForgery => {
                params.preimage_bits = 6;
                budget = Budget::Full;
            }
        }
        Self {
            experiment,
            scenario: scenario.to_string(),
            params,
            trials,
            budget,
            seed: 0,
            copies: 3,
            channel: ChannelModel::Authenticated,
            out: None,
        }
    }

    /// Applies `o` over the defaults of `o.experiment` (ev-qpke if unset).
    pub fn from_overrides(o: Overrides) -> Result<Self, HarnessError> {
        let mut c = Self::defaults(o.experiment.unwrap_or(Experiment::EvQpke));
        if let Some(s) = o.scenario {
            c.scenario = s;
        }
        if let Some(v) = o.lambda {
            c.params.lambda = v;
        }
        if let Some(v) = o.preimage_bits {
            c.params.preimage_bits = v;
        }
        if let Some(v) = o.owf_rounds {
            c.params.owf_rounds = v;
        }
        if let Some(v) = o.ots_seed_bits {
            c.params.ots_seed_bits = v;
        }
        if let Some(v) = o.trials {
            c.trials = v;
        }
        if let Some(v) = o.budget {
            c.budget = v;
        }
        if let Some(v) = o.seed {
            c.seed = v;
        }
        if let Some(v) = o.copies {
            c.copies = v;
        }
        if let Some(v) = o.channel {
            c.channel = v;
        }
        c.out = o.out;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        self.params.validate().map_err(|e| HarnessError::Config(e.0))?;
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.copies == 0 {
            return bad("copies must be positive".into());
        }
        if self.params.owf_rounds == 0 {
            return bad("owf_rounds must be positive".into());
        }
        if !SCENARIOS.contains(&self.scenario.as_str()) {
            return bad(format!(
                "unknown scenario {:?}; expected one of {}",
                self.scenario,
                SCENARIOS.join(", ")
            ));
        }
        let search_bits = match self.experiment {
            Experiment::AppendixAttack => Some(2 * self.params.ots_seed_bits + 1),
            Experiment::OtsForgery => Some(self.params.preimage_bits),
            Experiment::Extractor if self.params.lambda > 6 => {
                return bad("extractor experiment enumerates sources; lambda must be at most 6".into())
            }
            _ if self.scenario == "keysearch_wrapper" => Some(match self.experiment {
                Experiment::CompQpke => self.params.lambda,
                _ => 2 * self.params.ots_seed_bits + 1,
            }),
            _ => None,
        };
        if let (Some(bits), Budget::Full) = (search_bits, self.budget) {
            if bits > MAX_FULL_BUDGET_BITS {
                return bad(format!(
                    "a full budget would enumerate 2^{bits} candidates; lower the key size or pass a number"
                ));
            }
        }
        Ok(())
    }

    /// `key=value` lines accepted back by [`Overrides::parse_file`].
    pub fn to_config_text(&self) -> String {
        let p = &self.params;
        let mut s = format!(
            "experiment={}\nscenario={}\nlambda={}\npreimage_bits={}\nowf_rounds={}\nots_seed_bits={}\ntrials={}\nbudget={}\nseed={}\ncopies={}\nchannel={}\n",
            self.experiment,
            self.scenario,
            p.lambda,
            p.preimage_bits,
            p.owf_rounds,
            p.ots_seed_bits,
            self.trials,
            self.budget,
            self.seed,
            self.copies,
            channel_id(self.channel)
        );
        if let Some(out) = &self.out {
            s.push_str(&format!("out={}\n", out.display()));
        }
        s
    }

    pub fn channel_id(&self) -> &'static str {
        channel_id(self.channel)
    }
}
