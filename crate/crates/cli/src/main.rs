//! `hardy`: constants tables, verification campaigns, optimality probes,
//! best-constant sweeps, path censuses and test-function tables.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hardy_core::paths::ShiftSelection;
use hardy_core::testfns::FamilyKind;
use hardy_core::verify::GeneratorProfile;
use hardy_core::{HardyError, LatticeKind, Regime};
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "hardy", version, about = "Discrete Hardy inequalities on Z_+^d and Z^d")]
struct Cli {
    /// Output format: json, jsonl or csv.
    #[arg(long, global = true)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, env = "HARDY_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assembled theorem constants with their factor traces.
    Constants(ParamArgs),
    /// Randomized verification campaign.
    Verify(VerifyArgs),
    /// Growth of lhs/rhs along a test family.
    Probe(ProbeArgs),
    /// Numerical best-constant estimate.
    Optimize(OptimizeArgs),
    /// Optimize or verify across a list of box sizes.
    Sweep(SweepArgs),
    /// Edge-usage census of the annulus-to-annulus paths.
    Census(CensusArgs),
    /// Exact test-function values against their bounds.
    Testfn(TestfnArgs),
}

/// Parameter lists; the run covers every valid combination.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub regime: Vec<Regime>,
    #[arg(long, value_delimiter = ',', default_value = "nonnegative")]
    pub lattice: Vec<LatticeKind>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2")]
    pub p: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub s: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub eps: Vec<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Annulus gap; the smallest admissible value when absent.
    #[arg(long = "K")]
    pub k: Option<u32>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct VerifyOptions {
    /// Fractional truncation margin; defaults to N.
    #[arg(long)]
    pub margin: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generator profiles, cycled over trials.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip)]
    pub profiles: Vec<GeneratorProfile>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "N", default_value_t = 16)]
    pub n: u64,
    #[command(flatten)]
    pub opts: VerifyOptions,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[arg(long)]
    pub family: FamilyKind,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub t: f64,
    /// Scales n of the family.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    pub n: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Power iteration for p = 2, ascent otherwise.
    Auto,
    P2,
    General,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OptimizeOptions {
    #[arg(long, value_enum, default_value_t = Method::Auto)]
    pub method: Method,
    #[arg(long)]
    pub margin: Option<u64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Runs of the general method; 8 for p < 1 and 4 otherwise when absent.
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "N", default_value_t = 64)]
    pub n: u64,
    #[command(flatten)]
    pub opts: OptimizeOptions,
    /// Also write the witness of a single-cell run as `point,value` CSV.
    #[arg(long)]
    pub witness: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Optimize,
    Verify,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long = "N", value_delimiter = ',', default_value = "16,32,64")]
    pub n: Vec<u64>,
    #[arg(long, value_enum, default_value_t = SweepMode::Optimize)]
    pub mode: SweepMode,
    #[command(flatten)]
    pub optimize: OptimizeOptions,
    #[arg(long = "trials", default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_delimiter = ',')]
    pub profiles: Vec<GeneratorProfile>,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub d: usize,
    /// Shift index beta or ALL.
    #[arg(long, default_value = "ALL")]
    pub shift: ShiftSelection,
}

#[derive(Args, Debug)]
pub struct TestfnArgs {
    #[arg(long)]
    pub family: FamilyKind,
    #[arg(long, default_value_t = 1)]
    pub d: usize,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, value_delimiter = ',', default_value = "2,4,8,16,32,64")]
    pub n: Vec<u64>,
}

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) | Failure::Io(_) => 3,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Config(_) => "config",
            Failure::Numeric(_) => "numeric",
            Failure::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numeric(m) | Failure::Io(m) => m,
        }
    }
}

impl From<HardyError> for Failure {
    fn from(e: HardyError) -> Self {
        if e.is_capacity_or_numeric() || matches!(e, HardyError::OutOfRange(_)) {
            Failure::Numeric(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

/// What a command produced: the rendered artifact and whether it found
/// violations or errors.
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub clean: bool,
    /// Some rows could not be computed for size or floating-point reasons.
    pub numeric_errors: bool,
}

impl Outcome {
    pub fn new(bytes: Vec<u8>, clean: bool) -> Self {
        Outcome {
            bytes,
            clean,
            numeric_errors: false,
        }
    }
}

fn fail(f: &Failure) -> ExitCode {
    let record = serde_json::json!({
        "error": { "code": f.code(), "kind": f.kind(), "message": f.message() }
    });
    eprintln!("{record}");
    ExitCode::from(f.code())
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let format = cli.format;
    match cli.command {
        Command::Constants(a) => commands::constants(&a, format.unwrap_or(Format::Json)),
        Command::Verify(a) => commands::verify(&a, format.unwrap_or(Format::Jsonl)),
        Command::Probe(a) => commands::probe(&a, format.unwrap_or(Format::Json)),
        Command::Optimize(a) => commands::optimize(&a, format.unwrap_or(Format::Json)),
        Command::Sweep(a) => commands::sweep(&a, format.unwrap_or(Format::Jsonl)),
        Command::Census(a) => commands::census(&a, format.unwrap_or(Format::Json)),
        Command::Testfn(a) => commands::testfn(&a, format.unwrap_or(Format::Json)),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // help and version requests
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Failure::Config(e.to_string().trim_end().to_string())),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    match cli.threads {
        Some(0) => return fail(&Failure::Config("--threads must be at least 1".into())),
        Some(n) => pool = pool.num_threads(n),
        None => {}
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => return fail(&Failure::Io(e.to_string())),
    };
    let out_path = cli.out.clone();
    let outcome = match pool.install(|| run(cli)) {
        Ok(o) => o,
        Err(f) => return fail(&f),
    };
    let written = match &out_path {
        Some(path) => std::fs::write(path, &outcome.bytes),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(&outcome.bytes)
        }
    };
    if let Err(e) = written {
        return fail(&Failure::Io(e.to_string()));
    }
    if outcome.numeric_errors {
        ExitCode::from(3)
    } else if outcome.clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
