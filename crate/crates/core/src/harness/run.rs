//! Experiment dispatch. Trials fan out over rayon, each on its own
//! `RngStream::new(seed, trial)`, and are merged in trial order.

use std::fmt;

use rayon::prelude::*;

use super::config::{Budget, Experiment, RunConfig};
use super::stats::{chi_square_uniform, DistTable};
use super::HarnessError;
use crate::adversary::{
    ev_keyspace_bits, run_exp_computational, run_exp_everlasting, run_qkdsec, scenario, ExperimentRecord,
    Outcome,
};
use crate::ots::{sgen_random, sign, strong_forgery_attempt, ver};
use crate::primitives::{RngStream, ToeplitzHash};
use crate::qkd::QkdParams;
use crate::qsim::BitString;

/// Stable `name value` lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    lines: Vec<(String, String)>,
}

impl Report {
    pub fn push(&mut self, name: &str, value: impl fmt::Display) {
        self.lines.push((name.to_string(), value.to_string()));
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.lines.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_str())
    }

    pub fn lines(&self) -> &[(String, String)] {
        &self.lines
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in &self.lines {
            writeln!(f, "{n} {v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Report,
    pub records: Vec<ExperimentRecord>,
    /// Names of in-run assertions that failed.
    pub failures: Vec<String>,
}

impl RunOutput {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    /// The machine-readable form: report, then every record.
    pub fn machine_readable(&self) -> String {
        let mut s = self.report.to_string();
        for r in &self.records {
            s.push_str(&r.to_string());
        }
        s
    }
}

struct Checks {
    failures: Vec<String>,
}

impl Checks {
    fn expect(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failures.push(name.to_string());
        }
    }
}

fn par_trials<T: Send>(
    cfg: &RunConfig,
    f: impl Fn(&mut RngStream) -> Result<T, HarnessError> + Sync,
) -> Result<Vec<T>, HarnessError> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| f(&mut RngStream::new(cfg.seed, t)))
        .collect()
}

fn frac(k: u64, n: u64) -> String {
    format!("{k}/{n}")
}

/// Whether `k` successes in `n` fair trials lie within three sigma of `n/2`.
fn near_half(k: u64, n: u64) -> bool {
    let sigma = (n as f64 * 0.25).sqrt();
    (k as f64 - n as f64 / 2.0).abs() <= 3.0 * sigma
}

pub fn run_cli(cfg: &RunConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let mut report = Report::default();
    report.push("experiment", cfg.experiment);
    report.push("scenario", &cfg.scenario);
    report.push("seed", cfg.seed);
    report.push("trials", cfg.trials);
    report.push("lambda", cfg.params.lambda);
    report.push("preimage_bits", cfg.params.preimage_bits);
    report.push("owf_rounds", cfg.params.owf_rounds);
    report.push("ots_seed_bits", cfg.params.ots_seed_bits);
    report.push("budget", cfg.budget);
    let mut checks = Checks { failures: Vec::new() };
    let records = match cfg.experiment {
        Experiment::EvQpke => qpke_experiment(cfg, false, &mut report, &mut checks)?,
        Experiment::CompQpke => qpke_experiment(cfg, true, &mut report, &mut checks)?,
        Experiment::Qkd => qkd_experiment(cfg, &mut report, &mut checks)?,
        Experiment::AppendixAttack => appendix_attack(cfg, &mut report, &mut checks)?,
        Experiment::Extractor => {
            extractor(cfg, &mut report, &mut checks)?;
            Vec::new()
        }
        Experiment::OtsForgery => {
            ots_forgery(cfg, &mut report, &mut checks)?;
            Vec::new()
        }
    };
    report.push("failed_checks", if checks.failures.is_empty() { "none".to_string() } else { checks.failures.join(",") });
    report.push("status", if checks.failures.is_empty() { "pass" } else { "fail" });
    Ok(RunOutput {
        report,
        records,
        failures: checks.failures,
    })
}

fn search_budget(cfg: &RunConfig, comp: bool) -> u64 {
    let bits = if comp {
        cfg.params.lambda
    } else {
        ev_keyspace_bits(&cfg.params)
    };
    cfg.budget.resolve(bits)
}

fn qpke_experiment(
    cfg: &RunConfig,
    comp: bool,
    report: &mut Report,
    checks: &mut Checks,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let adv = scenario(&cfg.scenario, search_budget(cfg, comp))?;
    let records = par_trials(cfg, |rng| {
        let m = rng.stream_id() % 2 == 1;
        Ok(if comp {
            run_exp_computational(adv.as_ref(), m, cfg.copies, &cfg.params, rng)?
        } else {
            run_exp_everlasting(adv.as_ref(), m, &cfg.params, rng)?
        })
    })?;

    let (mut aborts, mut successes, mut rejects) = (0u64, 0u64, 0u64);
    let (mut guesses, mut guess_correct, mut ct1_ones, mut distinct) = (0u64, 0u64, 0u64, 0u64);
    for r in &records {
        let (m, dec, guess) = match &r.outcome {
            Outcome::Everlasting { m, ct, dec, guess } => {
                if let crate::qpke::EvCiphertext::Valid { ct1: true, .. } = ct {
                    ct1_ones += 1;
                }
                (*m, *dec, *guess)
            }
            Outcome::Computational {
                m,
                dec,
                guess,
                distinct_r,
                ..
            } => {
                distinct += *distinct_r as u64;
                (*m, *dec, *guess)
            }
            Outcome::Qkd { .. } => unreachable!("QPKE experiment"),
        };
        if r.outcome.is_abort() {
            aborts += 1;
        } else if dec == Some(m) {
            successes += 1;
        } else {
            rejects += 1;
        }
        if let Some(g) = guess {
            guesses += 1;
            guess_correct += (g == m) as u64;
        }
    }
    let n = cfg.trials;
    report.push("successes", successes);
    report.push("aborts", aborts);
    report.push("rejects", rejects);
    report.push("decryption_agreement", frac(successes, n));
    // With an untouched register a wrong decryption is exactly a parity violation.
    let honest_register = matches!(
        cfg.scenario.as_str(),
        "identity" | "flip_ciphertext_bit" | "block_second_message"
    );
    if honest_register {
        report.push("parity_violations", rejects + aborts);
    }
    if comp {
        report.push("copies", cfg.copies);
        report.push("distinct_copies", frac(distinct, n));
    } else {
        report.push("ct1_ones", frac(ct1_ones, n - aborts));
    }
    report.push("guesses", guesses);
    report.push("guess_correct", frac(guess_correct, guesses));

    checks.expect("totals", aborts + successes + rejects == n);
    match cfg.scenario.as_str() {
        s if honest_register => checks.expect(&format!("{s}_correct"), successes == n),
        "substitute_garbage" => checks.expect("garbage_aborts", aborts == n),
        "measure_resend" | "substitute_basis_state" => {
            checks.expect("collapsed_no_aborts", aborts == 0);
            if comp {
                checks.expect("collapsed_coin_flip", near_half(successes, n));
            } else {
                checks.expect("ciphertext_bit_balanced", near_half(ct1_ones, n));
            }
        }
        _ => {}
    }
    if comp && cfg.copies > 1 {
        checks.expect("copies_distinct", distinct == n);
    }
    Ok(records)
}

fn qkd_experiment(
    cfg: &RunConfig,
    report: &mut Report,
    checks: &mut Checks,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let q = QkdParams::new(cfg.params)?;
    let adv = scenario(&cfg.scenario, search_budget(cfg, false))?;
    let records = par_trials(cfg, |rng| Ok(run_qkdsec(adv.as_ref(), cfg.channel, &q, rng)?))?;

    let (mut aborts, mut rejects, mut successes, mut agree, mut mismatches, mut intact) = (0, 0, 0, 0, 0, 0);
    for r in &records {
        let Outcome::Qkd {
            k0,
            k1,
            classical_intact,
        } = &r.outcome
        else {
            unreachable!("QKD experiment")
        };
        intact += *classical_intact as u64;
        if k0.is_reject() {
            aborts += 1;
        } else if k1.is_reject() {
            rejects += 1;
        } else {
            successes += 1;
            if k0 == k1 {
                agree += 1;
            } else {
                mismatches += 1;
            }
        }
    }
    let n = cfg.trials;
    report.push("channel", cfg.channel_id());
    report.push("instances", q.instances());
    report.push("successes", successes);
    report.push("aborts", aborts);
    report.push("rejects", rejects);
    report.push("agreements", frac(agree, n));
    report.push("silent_mismatches", frac(mismatches, n));
    report.push("classical_intact", frac(intact, n));

    checks.expect("totals", aborts + rejects + successes == n);
    checks.expect("silent_mismatch_rate", mismatches as f64 <= 0.01 * n as f64);
    match cfg.scenario.as_str() {
        "identity" => checks.expect("honest_agreement", agree == n),
        "block_second_message" => checks.expect("blocked_alice_rejects", rejects == n),
        "substitute_garbage" => checks.expect("garbage_bob_rejects", aborts == n),
        _ => {}
    }
    if cfg.channel == crate::adversary::ChannelModel::Authenticated {
        checks.expect("authenticated_classical", intact == n);
    }
    Ok(records)
}

fn appendix_attack(
    cfg: &RunConfig,
    report: &mut Report,
    checks: &mut Checks,
) -> Result<Vec<ExperimentRecord>, HarnessError> {
    let bits = ev_keyspace_bits(&cfg.params);
    let budget = cfg.budget.resolve(bits);
    let adv = scenario("keysearch_wrapper", budget)?;
    let records = par_trials(cfg, |rng| {
        let m = rng.stream_id() % 2 == 1;
        Ok(run_exp_everlasting(adv.as_ref(), m, &cfg.params, rng)?)
    })?;
    let mut success = 0u64;
    let mut found = 0u64;
    let mut iterations = 0u64;
    for r in &records {
        let Outcome::Everlasting { m, guess, .. } = &r.outcome else {
            unreachable!("everlasting experiment")
        };
        found += r.internal.secret.is_some() as u64;
        success += (*guess == Some(*m)) as u64;
        iterations += r
            .internal
            .log
            .iter()
            .find_map(|l| l.strip_prefix("searched ")?.parse::<u64>().ok())
            .unwrap_or(0);
    }
    let n = cfg.trials;
    report.push("keyspace_bits", bits);
    report.push("keys_found", frac(found, n));
    report.push("success", frac(success, n));
    report.push("mean_iterations", format!("{:.3}", iterations as f64 / n as f64));
    if cfg.budget == Budget::Full || budget >= 1u64.checked_shl(bits as u32).unwrap_or(u64::MAX) {
        checks.expect("full_budget_always_wins", success == n);
    }
    Ok(records)
}

/// Average over sampled hash seeds of the exact distance between
/// `(z, Hash(x))` and `(z, U)`, for `x` uniform on strings whose last `λ`
/// bits are zero (min-entropy `3λ`) and `z` the parity of `x`.
fn extractor(cfg: &RunConfig, report: &mut Report, checks: &mut Checks) -> Result<(), HarnessError> {
    let lambda = cfg.params.lambda;
    let n_in = 4 * lambda;
    let src_bits = 3 * lambda;
    let out_cells = 1usize << lambda;
    let tvs = par_trials(cfg, |rng| {
        let h = ToeplitzHash::sample(rng, lambda)?;
        let mut joint = vec![[0u64; 2]; out_cells];
        for v in 0..1u64 << src_bits {
            let x = BitString::from_u64(v << lambda, n_in)?;
            let z = x.count_ones() % 2;
            let y = h.eval(&x)?.to_u64()? as usize;
            joint[y][z] += 1;
        }
        let total = (1u64 << src_bits) as f64;
        let mut pz = [0f64; 2];
        for cell in &joint {
            pz[0] += cell[0] as f64 / total;
            pz[1] += cell[1] as f64 / total;
        }
        let tv: f64 = joint
            .iter()
            .flat_map(|cell| (0..2).map(move |z| (cell[z] as f64 / total - pz[z] / out_cells as f64).abs()))
            .sum::<f64>()
            / 2.0;
        Ok(tv)
    })?;
    let mean = tvs.iter().sum::<f64>() / tvs.len() as f64;
    let max = tvs.iter().cloned().fold(0.0, f64::max);
    // conditional min-entropy is at least 3λ - 1 given one bit of side information
    let eps = 0.5 * 2f64.powf((lambda as f64 - (src_bits as f64 - 1.0)) / 2.0);
    report.push("source_min_entropy", src_bits);
    report.push("side_information_bits", 1);
    report.push("mean_distance", format!("{mean:.6}"));
    report.push("max_distance", format!("{max:.6}"));
    report.push("epsilon", format!("{eps:.6}"));
    checks.expect("leftover_hash_bound", mean <= eps);

    if lambda == 2 {
        let worst = toeplitz_worst_collision(2)?;
        report.push("universality_max_collision", format!("{worst:.6}"));
        checks.expect("universality", worst <= 0.25);
    }

    // the extracted key itself, over fresh seeds and sources
    let keys = par_trials(cfg, |rng| {
        let h = ToeplitzHash::sample(rng, lambda)?;
        let x = BitString::random(n_in, rng);
        Ok(h.eval(&x)?.to_hex())
    })?;
    let table = DistTable::tally(keys);
    if cfg.trials >= 5 * out_cells as u64 {
        let labels = (0..out_cells as u64).map(|v| BitString::from_u64(v, lambda).expect("lambda <= 6").to_hex());
        let p = chi_square_uniform(&table.with_labels(labels))?;
        report.push("key_chi_square_p", format!("{p:.6}"));
        checks.expect("key_uniformity", p > 0.001);
    }
    Ok(())
}

/// Exact `max_{x != x'} Pr_seed[h(x) = h(x')]` by enumerating every seed.
pub fn toeplitz_worst_collision(lambda: usize) -> Result<f64, HarnessError> {
    let n_in = 4 * lambda;
    let seeds = 1u64 << ToeplitzHash::seed_len(lambda);
    let inputs = 1usize << n_in;
    let mut collisions = vec![0u32; inputs * inputs];
    for s in 0..seeds {
        let h = ToeplitzHash::from_seed(lambda, BitString::from_u64(s, ToeplitzHash::seed_len(lambda))?)?;
        let ys: Vec<u64> = (0..inputs as u64)
            .map(|x| Ok(h.eval(&BitString::from_u64(x, n_in)?)?.to_u64()?))
            .collect::<Result<_, HarnessError>>()?;
        for a in 0..inputs {
            for b in a + 1..inputs {
                if ys[a] == ys[b] {
                    collisions[a * inputs + b] += 1;
                }
            }
        }
    }
    let worst = (0..inputs)
        .flat_map(|a| (a + 1..inputs).map(move |b| (a, b)))
        .map(|(a, b)| collisions[a * inputs + b])
        .max()
        .unwrap_or(0);
    Ok(worst as f64 / seeds as f64)
}

fn ots_forgery(cfg: &RunConfig, report: &mut Report, checks: &mut Checks) -> Result<(), HarnessError> {
    let ots = cfg.params.bit_ots()?;
    let budget = cfg.budget.resolve(cfg.params.preimage_bits);
    let wins = par_trials(cfg, |rng| {
        let (vk, sk) = sgen_random(&ots, rng)?;
        let m = BitString::from_bits([rng.bit()]);
        let sig = sign(&sk, &m)?;
        Ok(match strong_forgery_attempt(&vk, &m, &sig, budget) {
            Some((m2, s2)) => ver(&vk, &m2, &s2)? && (m2, s2) != (m, sig),
            None => false,
        })
    })?;
    let k = wins.iter().filter(|w| **w).count() as u64;
    let n = cfg.trials;
    report.push("forgeries", frac(k, n));
    report.push("forgery_rate", format!("{:.6}", k as f64 / n as f64));
    if budget >= 1u64 << cfg.params.preimage_bits.min(63) {
        checks.expect("full_budget_forges", k == n);
    }
    Ok(())
}
