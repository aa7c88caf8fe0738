//! `wcauth`: certify hash families, evaluate attack bounds, and run
//! authentication-round simulations.
//!
//! Exit codes: 0 success, 1 family is not ε-ASU₂, 2 usage/domain/config
//! error, 3 enumeration budget exceeded, 4 `--assert` disagreement.

mod args;
mod paper;
mod render;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use wcauth_core::bounds::Rates;
use wcauth_core::protocol::{monte_carlo_with_transcripts, trial_rng, Scenario};
use wcauth_core::{
    monte_carlo, verify_asu2, BoundParams, BoundReport, CampaignConfig, Epsilon, FamilySpec,
};

use args::ScenarioArgs;

/// Environment variable read for the default `--seed`.
pub const SEED_ENV: &str = "WCAUTH_SEED";

#[derive(Parser)]
#[command(
    name = "wcauth",
    version,
    about = "Wegman–Carter authentication under partial key knowledge"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exhaustively check the ε-ASU₂ conditions of a family.
    VerifyFamily(VerifyArgs),
    /// Evaluate every bound at one or more parameter points.
    Bounds(BoundsArgs),
    /// Run a Monte Carlo campaign.
    Simulate(SimulateArgs),
    /// Play one round and print its transcript.
    Demo(DemoArgs),
    /// Recompute the headline numbers and compare them to the published ones.
    ReproducePaper(paper::ReproduceArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// JSON family spec, e.g. {"kind":"affine","p":5}.
    #[arg(conflicts_with = "affine", required_unless_present = "affine")]
    spec: Option<PathBuf>,
    /// Affine family modulo a prime p.
    #[arg(long)]
    affine: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args)]
struct BoundsArgs {
    /// log₂|𝓗|; comma-separated values sweep.
    #[arg(
        long = "log2H",
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    log2_keys: Vec<f64>,
    /// log₂|𝓣|; comma-separated values sweep.
    #[arg(long = "log2T", value_delimiter = ',', required = true)]
    log2_tags: Vec<f64>,
    /// ε as "num/den" or a decimal; comma-separated values sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    epsilon: Vec<Epsilon>,
    /// Fraction of keys the adversary cannot eliminate; comma-separated values sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    r: Vec<f64>,
    /// Authentication rounds per second for the certain-forgery attacks.
    #[arg(long, default_value_t = 1000.0)]
    rounds_per_sec: f64,
    /// Tag guesses per second for the guessing attack.
    #[arg(long, default_value_t = 0.1)]
    guesses_per_sec: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Campaign config JSON; scenario flags are ignored when given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; overrides the config file.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Exit with status 4 unless the rate agrees with the prediction.
    #[arg(long = "assert")]
    assert_agreement: bool,
    /// Write every round as JSON lines, one event per line.
    #[arg(long)]
    dump_transcripts: Option<PathBuf>,
    /// Omit the `generated_at` field.
    #[arg(long)]
    no_timestamp: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct DemoArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Debug)]
enum Failure {
    Core(wcauth_core::Error),
    Usage(String),
    Io(io::Error),
}

impl From<wcauth_core::Error> for Failure {
    fn from(e: wcauth_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        let msg = e.to_string();
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Failure::Io(io),
            _ => Failure::Usage(msg),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Failure::Io(e.into())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(wcauth_core::Error::Budget(_)) => 3,
            _ => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn verify_family(a: VerifyArgs) -> Outcome {
    let spec = match (a.affine, a.spec) {
        (Some(p), _) => FamilySpec::Affine { p, epsilon: None },
        (None, Some(path)) => read_json(&path)?,
        (None, None) => return Err(Failure::Usage("give a spec file or --affine".into())),
    };
    let family = spec.build()?;
    let cert = verify_asu2(&family)?;
    #[derive(Serialize)]
    struct Report<'a> {
        family: &'a FamilySpec,
        keys: u64,
        messages: u64,
        tags: u64,
        epsilon: Epsilon,
        certificate: &'a wcauth_core::Asu2Certificate,
    }
    print_json(&Report {
        family: &spec,
        keys: family.num_keys(),
        messages: family.num_messages(),
        tags: family.num_tags(),
        epsilon: family.epsilon(),
        certificate: &cert,
    })?;
    Ok(if cert.holds { 0 } else { 1 })
}

fn bounds(a: BoundsArgs) -> Outcome {
    let rates = Rates {
        rounds_per_second: a.rounds_per_sec,
        guesses_per_second: a.guesses_per_sec,
    };
    let mut reports = Vec::new();
    for &h in &a.log2_keys {
        for &t in &a.log2_tags {
            for &e in &a.epsilon {
                for &r in &a.r {
                    let params = BoundParams::new(h, t, e, r)?;
                    reports.push(BoundReport::evaluate(&params, rates)?);
                }
            }
        }
    }
    match a.format {
        Format::Json => print_json(&reports)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(BoundReport::CSV_COLUMNS)?;
            for rep in &reports {
                w.write_record(rep.csv_record())?;
            }
            w.flush()?;
        }
        Format::Table => {
            let mut out = io::stdout().lock();
            for (i, rep) in reports.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                render::bound_table(&mut out, rep)?;
            }
        }
    }
    Ok(0)
}

fn campaign_config(a: &SimulateArgs) -> Result<CampaignConfig, Failure> {
    let mut cfg = match &a.config {
        Some(path) => read_json::<CampaignConfig>(path)?,
        None => a
            .scenario
            .campaign(a.trials.unwrap_or(10_000), a.seed.unwrap_or(0))?,
    };
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    if let Some(s) = a.seed {
        cfg.master_seed = s;
    }
    Ok(cfg)
}

fn simulate(a: SimulateArgs) -> Outcome {
    let cfg = campaign_config(&a)?;
    let stats = match &a.dump_transcripts {
        Some(path) => {
            let (stats, transcripts) = monte_carlo_with_transcripts(&cfg)?;
            let mut w = BufWriter::new(File::create(path)?);
            render::transcript_lines(&mut w, &transcripts)?;
            w.flush()?;
            stats
        }
        None => monte_carlo(&cfg)?,
    };
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                config: &'a CampaignConfig,
                stats: &'a wcauth_core::SuccessStats,
                #[serde(skip_serializing_if = "Option::is_none")]
                generated_at: Option<u64>,
            }
            let generated_at = (!a.no_timestamp).then(|| {
                SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0)
            });
            print_json(&Report {
                config: &cfg,
                stats: &stats,
                generated_at,
            })?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(wcauth_core::SuccessStats::CSV_COLUMNS)?;
            w.write_record(stats.csv_record())?;
            w.flush()?;
        }
        Format::Table => render::stats_table(&mut io::stdout().lock(), &cfg, &stats)?,
    }
    Ok(if a.assert_agreement && !stats.agrees() {
        4
    } else {
        0
    })
}

fn demo(a: DemoArgs) -> Outcome {
    let cfg = a.scenario.campaign(1, a.seed)?;
    let scenario = Scenario::new(
        cfg.family.build()?,
        cfg.variant,
        cfg.strategy,
        cfg.r,
        cfg.noise,
        cfg.message_influence,
    )?;
    let (transcript, outcome) = scenario.play_trial(&mut trial_rng(a.seed, 0), true)?;
    match a.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Report<'a> {
                config: &'a CampaignConfig,
                transcript: &'a wcauth_core::RoundTranscript,
                outcome: &'a wcauth_core::RoundOutcome,
            }
            print_json(&Report {
                config: &cfg,
                transcript: &transcript,
                outcome: &outcome,
            })?;
        }
        _ => render::demo_table(&mut io::stdout().lock(), &transcript, &outcome)?,
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyFamily(a) => verify_family(a),
        Command::Bounds(a) => bounds(a),
        Command::Simulate(a) => simulate(a),
        Command::Demo(a) => demo(a),
        Command::ReproducePaper(a) => paper::run(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        // Reader went away, e.g. `| head`.
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wcauth: {e}");
            ExitCode::from(e.code())
        }
    }
}
