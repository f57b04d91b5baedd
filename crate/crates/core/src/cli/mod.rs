//! The `delta2` command line: argument parsing, config merging and exit codes.
//! Each subcommand is a thin wrapper over the library; see [`commands`].

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::exact::Rational;

pub use config::{Format, Settings, SCHEMA_VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PRECISION: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

/// Exit code for a library error: caps on computation are 3, everything else is input.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionCap { .. } | Error::IndeterminateSign { .. } | Error::EnumeratorExhausted(_) => EXIT_PRECISION,
        _ => EXIT_VALIDATION,
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "delta2", version, about = "Certified secrecy-capacity computations for fast-fading wiretap channels")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat TOML config; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Working precision: quadrature width 2^-bits, or construction precision for gen-pdf.
    #[arg(long, global = true)]
    pub precision_bits: Option<u32>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Omit the timestamp so that identical runs give identical bytes.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a density and report its normalization.
    GenPdf {
        /// bump:<shift>, train:<fixture>:<terms> or star:<enumerator>:<truncation>.
        #[arg(long)]
        pdf: Option<String>,
        /// With --sigma-sq, also report the capacity integral at P / sigma^2.
        #[arg(long, value_parser = rational)]
        power: Option<Rational>,
        #[arg(long, value_parser = rational)]
        sigma_sq: Option<Rational>,
    },
    /// Trace (k, a_k, b_k, a_k - b_k) for a channel.
    Capacity {
        /// A fixture channel: pair-1, pair-2, symmetric or oracle-1.
        #[arg(long)]
        channel: Option<String>,
        #[arg(long)]
        f1: Option<String>,
        #[arg(long)]
        f2: Option<String>,
        #[arg(long, value_parser = rational)]
        power: Option<Rational>,
        #[arg(long, value_parser = rational)]
        sigma1_sq: Option<Rational>,
        #[arg(long, value_parser = rational)]
        sigma2_sq: Option<Rational>,
        /// Largest truncation radius of the trace.
        #[arg(long)]
        radius: Option<u64>,
    },
    /// Prefix (l, phi(l), partial sum) of a Specker number.
    Specker {
        /// identity, dovetail or table:<v1>,<v2>,...
        #[arg(long)]
        enumerator: Option<String>,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Certified integral of a log-SNR kernel against a density.
    Quad {
        #[arg(long)]
        pdf: Option<String>,
        /// capacity, excess or gap.
        #[arg(long)]
        kernel: Option<String>,
        #[arg(long, value_parser = rational)]
        power: Option<Rational>,
        #[arg(long, value_parser = rational)]
        sigma_sq: Option<Rational>,
        #[arg(long)]
        radius: Option<u64>,
        /// Also run a Monte-Carlo cross-check with this many samples.
        #[arg(long)]
        mc_samples: Option<u64>,
    },
    /// Run the verification suites.
    Verify {
        /// Restrict to a suite: constructions, capacity, hierarchy or golden. Repeatable.
        #[arg(long)]
        only: Vec<String>,
        #[arg(long)]
        golden_dir: Option<PathBuf>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenPdf { .. } => "gen-pdf",
            Command::Capacity { .. } => "capacity",
            Command::Specker { .. } => "specker",
            Command::Quad { .. } => "quad",
            Command::Verify { .. } => "verify",
        }
    }

    /// The flags of this invocation as a settings layer.
    fn settings(self, c: &Common) -> Settings {
        let mut s = Settings {
            out: c.out.clone(),
            format: c.format,
            precision_bits: c.precision_bits,
            seed: c.seed,
            threads: c.threads,
            no_timestamp: c.no_timestamp.then_some(true),
            ..Default::default()
        };
        match self {
            Command::GenPdf { pdf, power, sigma_sq } => {
                s.pdf = pdf;
                s.power = power;
                s.sigma_sq = sigma_sq;
            }
            Command::Capacity { channel, f1, f2, power, sigma1_sq, sigma2_sq, radius } => {
                s.channel = channel;
                s.f1 = f1;
                s.f2 = f2;
                s.power = power;
                s.sigma1_sq = sigma1_sq;
                s.sigma2_sq = sigma2_sq;
                s.radius = radius;
            }
            Command::Specker { enumerator, k } => {
                s.enumerator = enumerator;
                s.k = k;
            }
            Command::Quad { pdf, kernel, power, sigma_sq, radius, mc_samples } => {
                s.pdf = pdf;
                s.kernel = kernel;
                s.power = power;
                s.sigma_sq = sigma_sq;
                s.radius = radius;
                s.mc_samples = mc_samples;
            }
            Command::Verify { only, golden_dir } => {
                s.only = (!only.is_empty()).then_some(only);
                s.golden_dir = golden_dir;
            }
        }
        s
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    let name = cli.command.name();
    let flags = cli.command.settings(&cli.common);
    let resolved = match &cli.common.config {
        Some(p) => Settings::load(p).map(|file| flags.over(file)),
        None => Ok(flags),
    };
    let result = resolved.and_then(|s| commands::dispatch(name, s));
    match result {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            outcome.exit
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
