//! `relay-dmt`: DMT curves, oracle checks, outage sweeps and code simulations
//! for cooperative relay protocols, all emitted as CSV.

mod commands;
mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "relay-dmt", version, about, args_override_self = true)]
pub struct Cli {
    /// Master seed for every Monte Carlo command.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub workers: Option<u64>,
    /// Plain-text `key = value` file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print a DMT curve d(r).
    Dmt(DmtArgs),
    /// Compare closed-form curves against the brute-force optimizer.
    Verify(VerifyArgs),
    /// Monte Carlo outage probability sweep.
    Outage(OutageArgs),
    /// Word-error simulation of an explicit space-time code.
    Codesim(CodesimArgs),
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value = "oaf")]
    pub protocol: String,
    /// Number of nodes: the source plus n - 1 relays.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=16))]
    pub n: u64,
    /// Broadcast phase length; the protocol's natural choice when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=64))]
    pub p: Option<u64>,
    /// Relaying phase length.
    #[arg(long, value_parser = clap::value_parser!(u64).range(0..=64))]
    pub q: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DmtArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// One column per protocol family instead of `r,d`.
    #[arg(long)]
    pub all: bool,
    #[arg(long, default_value_t = 0.0)]
    pub r_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 0.01)]
    pub r_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyProtocol {
    All,
    Oaf,
    Nsdf,
    Osdf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = VerifyProtocol::All)]
    pub protocol: VerifyProtocol,
    /// Node counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,3,4", value_parser = clap::value_parser!(u64).range(2..=8))]
    pub n: Vec<u64>,
    /// Phase splits as `p:q`, comma separated; `n:n-1` is added per n when omitted.
    #[arg(long, value_delimiter = ',')]
    pub pq: Vec<String>,
    /// Shorthand for a single split together with `--q`.
    #[arg(long, requires = "q", value_parser = clap::value_parser!(u64).range(1..=64))]
    pub p: Option<u64>,
    #[arg(long, requires = "p", value_parser = clap::value_parser!(u64).range(1..=64))]
    pub q: Option<u64>,
    #[arg(long, default_value_t = 101, value_parser = clap::value_parser!(u64).range(2..=100_001))]
    pub samples: u64,
    /// Offset the optimizer values to exercise the failure path.
    #[arg(long)]
    pub perturb: bool,
}

#[derive(Debug, Args)]
pub struct SnrArgs {
    /// Explicit SNR points in dB, comma separated; overrides the range.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr: Vec<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub snr_max: Option<f64>,
    #[arg(long)]
    pub snr_step: Option<f64>,
    /// Trials per SNR point.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: Option<u64>,
}

#[derive(Debug, Args)]
pub struct OutageArgs {
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// Multiplexing gain: the rate is r log2(rho) bits per use.
    #[arg(long, conflicts_with = "rate")]
    pub r: Option<f64>,
    /// Fixed rate in bits per channel use.
    #[arg(long)]
    pub rate: Option<f64>,
    #[command(flatten)]
    pub snr: SnrArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CodeChoice {
    OafDiag,
    Naf,
}

#[derive(Debug, Args)]
pub struct CodesimArgs {
    #[arg(long, value_enum)]
    pub code: CodeChoice,
    /// Protocol carrying the code; defaults to the one the code is built for.
    #[arg(long)]
    pub protocol: Option<String>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=3))]
    pub n: u64,
    /// QAM points per real dimension.
    #[arg(long = "M", default_value = "2", value_parser = PossibleValuesParser::new(["2", "4", "8", "16"]).map(|s| s.parse::<u64>().expect("listed values are integers")))]
    pub m: u64,
    /// Also write the scaled codebook as `index,row,col,re,im`.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    #[command(flatten)]
    pub snr: SnrArgs,
}

/// A failed run, carrying its exit status.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1: a verification found a discrepancy.
    Check(String),
    /// Exit 2: bad arguments, configuration or I/O.
    Usage(String),
    /// Exit 3: too few usable points for the slope regression.
    Fit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Fit(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Check(m) | Failure::Usage(m) | Failure::Fit(m) => m,
        }
    }
}

impl From<relay_dmt::Error> for Failure {
    fn from(e: relay_dmt::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(format!("i/o: {e}"))
    }
}

fn parse() -> Result<Cli, Failure> {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::path_in(&argv) {
        None => argv,
        Some(path) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Failure::Usage(format!("cannot read config {path}: {e}")))?;
            config::merge(&argv, &text)?
        }
    };
    Cli::try_parse_from(&argv).map_err(clap_failure)
}

fn clap_failure(e: clap::Error) -> Failure {
    use clap::error::ErrorKind;
    if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
        let _ = e.print();
        std::process::exit(0);
    }
    let rendered = e.to_string();
    let line = rendered.lines().next().unwrap_or("invalid arguments");
    Failure::Usage(line.trim_start_matches("error: ").to_string())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let workers = cli
        .workers
        .map(|w| w as usize)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", path.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let result = match &cli.command {
        Command::Dmt(args) => commands::dmt(args, &mut sink),
        Command::Verify(args) => commands::verify(args, &mut sink),
        Command::Outage(args) => commands::outage(args, cli.seed, workers, &mut sink),
        Command::Codesim(args) => commands::codesim(args, cli.seed, workers, &mut sink),
    };
    sink.flush()?;
    result
}

fn main() -> ExitCode {
    match parse().and_then(run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
