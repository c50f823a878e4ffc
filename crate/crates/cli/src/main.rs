//! `gps`: key and coupon generation, a TCP verifier, a prover that runs
//! one round per invocation, a datapath benchmark and the comparison
//! tables.
//!
//! Exit codes: 0 success or accept, 1 usage or internal error, 2 reject,
//! 3 transport failure.

mod bench;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gps_core::costmodel::OutputFormat;
use gps_core::datapath::Architecture;
use gps_core::params::Preset;

#[derive(Debug, Parser)]
#[command(name = "gps", version, about = "Coupon-based GPS identification with datapath models")]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, default_value = "text", value_parser = parse_format)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a parameter profile and a prover key pair.
    Keygen(KeygenArgs),
    /// Precompute coupons for a key.
    Coupons(CouponsArgs),
    /// Run a verifier on TCP.
    Serve(ServeArgs),
    /// Run one authentication round as prover.
    Auth(AuthArgs),
    /// Run the three response units and report their costs.
    Bench(BenchArgs),
    /// Render the area/latency/throughput comparison tables.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct KeygenArgs {
    #[arg(long, env = "GPS_PROFILE", default_value = "s128", value_parser = parse_preset)]
    profile: Preset,
    /// Seed for the generator; drawn from the OS and echoed when absent.
    #[arg(long)]
    seed: Option<u64>,
    /// Prime size, overriding the profile default (half the modulus).
    #[arg(long)]
    prime_bits: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CouponsArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long, default_value_t = 20)]
    count: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Key file of an accepted prover; repeat for several.
    #[arg(long = "key", required = true)]
    keys: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Port to listen on; 0 picks a free one.
    #[arg(long, default_value_t = 0)]
    port: u16,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop after this many connections.
    #[arg(long)]
    rounds: Option<u64>,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
}

#[derive(Debug, Args)]
struct AuthArgs {
    #[arg(long)]
    key: PathBuf,
    #[arg(long)]
    coupons: PathBuf,
    /// Verifier address, `host:port`.
    #[arg(long)]
    connect: String,
    #[arg(long, default_value = "serial", value_parser = parse_arch)]
    arch: Architecture,
    /// Serial adder width; for hybrid, a word-serial final addition.
    #[arg(long)]
    word_bits: Option<u32>,
    /// KCM table inputs (parallel and hybrid).
    #[arg(long)]
    lut_bits: Option<u32>,
    /// Coupon slot to use. Without it the next slot recorded in
    /// `<coupons>.used` is taken and the sidecar advanced.
    #[arg(long)]
    index: Option<u64>,
    #[arg(long, default_value_t = 5000)]
    timeout_ms: u64,
    /// Write the datapath trace to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long, env = "GPS_PROFILE", default_value = "s128", value_parser = parse_preset)]
    profile: Preset,
    /// Challenge size; the profile's by default.
    #[arg(long)]
    challenge_bits: Option<u32>,
    #[arg(long, default_value_t = 100)]
    iterations: u64,
    #[arg(long, default_value_t = 16)]
    word_bits: u32,
    #[arg(long, default_value_t = 4)]
    lut_bits: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Exit nonzero if a reproduced value leaves its expectation.
    #[arg(long)]
    check: bool,
    #[arg(long, default_value_t = 32)]
    challenge_bits: u32,
    #[arg(long, default_value_t = 16)]
    word_bits: u32,
    #[arg(long, default_value_t = 4)]
    lut_bits: u32,
    /// Coupon count for the storage note.
    #[arg(long, default_value_t = 20)]
    coupons: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    s.parse()
}

fn parse_preset(s: &str) -> Result<Preset, String> {
    s.parse().map_err(|e: gps_core::params::ParamsError| e.to_string())
}

fn parse_arch(s: &str) -> Result<Architecture, String> {
    s.parse().map_err(|e: gps_core::datapath::DatapathError| e.to_string())
}

/// Failure carrying the exit code it maps to.
#[derive(Debug)]
pub(crate) enum Failure {
    Usage(anyhow::Error),
    Reject,
    Transport(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Internal(_) => 1,
            Failure::Reject => 2,
            Failure::Transport(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

pub(crate) type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let format = cli.format;
    let result = match cli.command {
        Command::Keygen(a) => commands::keygen(a),
        Command::Coupons(a) => commands::coupons(a),
        Command::Serve(a) => commands::serve(a),
        Command::Auth(a) => commands::auth(a, format),
        Command::Bench(a) => bench::run(a, format),
        Command::Report(a) => commands::report(a, format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(e) => eprintln!("gps: usage: {e:#}"),
                Failure::Reject => {}
                Failure::Transport(e) => eprintln!("gps: transport: {e:#}"),
                Failure::Internal(e) => eprintln!("gps: {e:#}"),
            }
            ExitCode::from(f.code())
        }
    }
}
