//! `stc`: simulate, verify and decode from the command line.
//!
//! Exit status is 0 on success, 1 when a verification suite fails and 2 on
//! bad arguments, unreadable input or I/O errors.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use stc_core::channel::{ChannelModel, ChannelRealization};
use stc_core::codes::{effective_channel, CodeVariant, EffectiveChannel};
use stc_core::constellation::make_qam;
use stc_core::decoders::{decode, DecoderKind, Ordering, SearchOptions};
use stc_core::harness::{emit_csv, run_sweep, run_verification, write_csv, Suite, SweepConfig};
use stc_core::matrixkit::ComplexMat;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "stc", version, about = "Golden-code and overlaid Alamouti ML decoding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo sweep over SNR, written as CSV.
    Simulate(SimulateArgs),
    /// Run a property-verification suite.
    Verify(VerifyArgs),
    /// Decode one instance read from a JSON file.
    Decode(DecodeArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// golden-dv, golden-brv, golden-wimax or overlaid-alamouti
    #[arg(long, default_value = "golden-dv")]
    code: CodeVariant,
    /// Comma-separated decoders: fast, sphere, exhaustive, alamouti-fast
    #[arg(long, value_delimiter = ',', default_value = "fast,sphere")]
    decoder: Vec<DecoderKind>,
    /// QAM order
    #[arg(long, default_value_t = 16)]
    modulation: usize,
    /// quasistatic, rapid or markov-<rho>
    #[arg(long, default_value = "quasistatic")]
    channel: ChannelModel,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_start: f64,
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    snr_stop: f64,
    #[arg(long, default_value_t = 2.0)]
    snr_step: f64,
    /// Trials per SNR point
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// none or blast
    #[arg(long, default_value = "none")]
    ordering: Ordering,
    /// Transmit without noise
    #[arg(long, default_value_t = false)]
    noiseless: bool,
    /// Output CSV path; `-` writes to standard output
    #[arg(long, default_value = "-")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// theorem1, mlequiv, sorts, alamouti, mindet, qr-agree or all
    #[arg(long, default_value = "all")]
    suite: String,
    /// Random instances per configuration
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    /// JSON instance with `h` or `H`, `y`, `code`, `modulation` and `decoder`
    #[arg(long)]
    input: PathBuf,
    /// none or blast
    #[arg(long, default_value = "none")]
    ordering: Ordering,
}

type Pair = [f64; 2];

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct Instance {
    /// `h[i][j][k]`: transmit antenna, receive antenna, slot.
    #[serde(default)]
    h: Option<[[[Pair; 2]; 2]; 2]>,
    #[serde(default, rename = "H")]
    h_eff: Option<[[Pair; 4]; 4]>,
    y: [Pair; 4],
    code: String,
    modulation: usize,
    decoder: String,
}

#[derive(Serialize, Debug)]
struct Decision {
    indices: [usize; 4],
    x_hat: [Pair; 4],
    cost: f64,
    nodes_visited: u64,
    full_sorts: u64,
    permutation: String,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<stc_core::StcError> for Failure {
    fn from(e: stc_core::StcError) -> Self {
        Failure::usage(e.to_string())
    }
}

fn c(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Thread cap from `STC_THREADS`, if set.
fn thread_cap() -> Result<Option<usize>, Failure> {
    match std::env::var("STC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(Failure::usage(format!("STC_THREADS must be a positive integer, got '{v}'"))),
        },
        Err(_) => Ok(None),
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let cfg = SweepConfig {
        code: args.code,
        decoders: args.decoder,
        modulation: args.modulation,
        channel: args.channel,
        snr_start: args.snr_start,
        snr_stop: args.snr_stop,
        snr_step: args.snr_step,
        trials: args.trials,
        seed: args.seed,
        ordering: args.ordering,
        noiseless: args.noiseless,
        threads: thread_cap()?,
    };
    let report = run_sweep(&cfg)?;
    if args.out.as_os_str() == "-" {
        write_csv(&report, io::stdout().lock())?;
    } else {
        emit_csv(&report, &args.out)?;
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let suites = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![args.suite.parse::<Suite>().map_err(Failure::usage)?]
    };
    let mut all_passed = true;
    let mut out = io::stdout().lock();
    for suite in suites {
        let report = run_verification(suite, args.trials, args.seed);
        all_passed &= report.passed();
        writeln!(out, "{report}").map_err(|e| Failure::usage(e.to_string()))?;
    }
    if all_passed {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY_FAILED,
            message: "verification failed".into(),
        })
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("invalid instance {}: {e}", path.display())))
}

fn effective_from(instance: &Instance, variant: CodeVariant) -> Result<EffectiveChannel, Failure> {
    match (&instance.h, &instance.h_eff) {
        (Some(h), None) => {
            let coeff = h.map(|per_tx| per_tx.map(|per_rx| per_rx.map(c)));
            let quasistatic = (0..2).all(|i| (0..2).all(|j| coeff[i][j][0] == coeff[i][j][1]));
            let model = if quasistatic {
                ChannelModel::Quasistatic
            } else {
                ChannelModel::Rapid
            };
            Ok(effective_channel(&ChannelRealization::new(coeff, model), variant))
        }
        (None, Some(rows)) => {
            let rows: Vec<[Complex64; 4]> = rows.iter().map(|r| r.map(c)).collect();
            Ok(EffectiveChannel::from_matrix(ComplexMat::from_rows(&rows), variant))
        }
        _ => Err(Failure::usage("instance needs exactly one of 'h' and 'H'")),
    }
}

fn decode_one(args: DecodeArgs) -> Result<(), Failure> {
    let instance = load_instance(&args.input)?;
    let variant: CodeVariant = instance.code.parse().map_err(Failure::usage)?;
    let kind: DecoderKind = instance.decoder.parse().map_err(Failure::usage)?;
    let alphabet = make_qam(instance.modulation)?;
    let eff = effective_from(&instance, variant)?;
    let y = instance.y.map(c);
    let r = decode(kind, &eff, &y, &alphabet, args.ordering, SearchOptions::default())?;
    let decision = Decision {
        indices: r.indices,
        x_hat: r.x_hat.map(|v| [v.re, v.im]),
        cost: r.cost,
        nodes_visited: r.nodes_visited,
        full_sorts: r.full_sorts,
        permutation: r.permutation_used.to_string(),
    };
    let text = serde_json::to_string_pretty(&decision).map_err(|e| Failure::usage(e.to_string()))?;
    println!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Verify(args) => verify(args),
        Command::Decode(args) => decode_one(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("stc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
