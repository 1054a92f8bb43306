use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use qpke_sim::adversary::ChannelModel;
use qpke_sim::harness::{
    read_transcript, run_cli, write_transcript, Budget, Experiment, HarnessError, Overrides, RunConfig, SEED_ENV,
};
use qpke_sim::primitives::RngStream;
use qpke_sim::qkd::{honest_session, QkdParams};

/// Seeded experiments for quantum public-key encryption and key distribution.
#[derive(Debug, Parser)]
#[command(name = "qpke-sim", version)]
struct Cli {
    /// ev-qpke, comp-qpke, qkd, appendix-attack, extractor or ots-forgery.
    #[arg(long, value_parser = parse_experiment)]
    experiment: Option<Experiment>,
    /// Adversary scenario from the catalog.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    preimage_bits: Option<usize>,
    #[arg(long)]
    owf_rounds: Option<u32>,
    /// Coin width for one-time key generation.
    #[arg(long)]
    ots_seed_bits: Option<usize>,
    #[arg(long)]
    trials: Option<u64>,
    /// Candidate count for searches, or "full".
    #[arg(long, value_parser = parse_budget)]
    budget: Option<Budget>,
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Public-key copies in the computational experiment.
    #[arg(long)]
    copies: Option<usize>,
    /// Deliver tampered classical responses instead of dropping them.
    #[arg(long)]
    unauthenticated: bool,
    /// Machine-readable output: the report followed by every record.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Also write an honest QKD session transcript for the configured seed.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Decode a QKD transcript and print both parties' outcomes.
    #[arg(long, conflicts_with = "experiment")]
    replay: Option<PathBuf>,
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn parse_budget(s: &str) -> Result<Budget, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn replay(path: &Path) -> Result<bool, HarnessError> {
    let t = read_transcript(path)?;
    println!("lambda {}", t.params.lambda());
    println!("instances {}", t.params.instances());
    println!("blocked {}", t.response.is_none() as u8);
    println!("bob {}", t.bob);
    println!("alice {}", t.alice);
    println!("agree {}", t.agree() as u8);
    Ok(true)
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    if let Some(path) = &cli.replay {
        return replay(path);
    }
    let file = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| HarnessError::Io(format!("{}: {e}", p.display())))?;
            Overrides::parse_file(&text)?
        }
        None => Overrides::default(),
    };
    let flags = Overrides {
        experiment: cli.experiment,
        scenario: cli.scenario,
        lambda: cli.lambda,
        preimage_bits: cli.preimage_bits,
        owf_rounds: cli.owf_rounds,
        ots_seed_bits: cli.ots_seed_bits,
        trials: cli.trials,
        budget: cli.budget,
        seed: cli.seed,
        copies: cli.copies,
        channel: cli.unauthenticated.then_some(ChannelModel::Unauthenticated),
        out: cli.out,
    };
    let cfg = RunConfig::from_overrides(file.merge(flags))?;
    let out = run_cli(&cfg)?;
    print!("{}", out.report);
    if let Some(path) = &cfg.out {
        fs::write(path, out.machine_readable()).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
    }
    if let Some(path) = &cli.transcript {
        let t = honest_session(&QkdParams::new(cfg.params)?, &mut RngStream::new(cfg.seed, 0))?;
        write_transcript(path, &t)?;
    }
    Ok(out.passed())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
