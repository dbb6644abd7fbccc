//! Command-line entry point: `solve`, `synth`, and `bench` subcommands.
//!
//! Output discipline: results go to stdout, diagnostics to stderr.
//! Exit codes: 0 success, 1 parse/validation/IO errors, 2 solver divergence.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchOptions, SolverId};
use crate::datagen::{self, NoiseKind, SynthesisSpec};
use crate::error::Error;
use crate::linalg::DenseVector;
use crate::model::{
    default_lambda, ProblemKind, ReturnIterate, SolveResult, SolverConfig,
};
use crate::{csunsal, sunsal};

/// Small library shipped for tests and smoke runs (10 bands, 20 signatures).
pub const EXAMPLE_LIBRARY: &str = include_str!("../data/example_library.txt");

#[derive(Parser)]
#[command(
    name = "unmix",
    version,
    about = "SUnSAL / C-SUnSAL alternating-direction solvers for constrained sparse spectral unmixing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one unmixing problem from a library and an observation file
    Solve(SolveArgs),
    /// Generate a synthetic library/abundance/observation triple
    Synth(SynthArgs),
    /// Run the RSNR/timing benchmark grid and write CSV (and optional JSON)
    Bench(BenchArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Cls,
    Csr,
    Cbp,
    Cbpdn,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Cls => ProblemKind::Cls,
            KindArg::Csr => ProblemKind::Csr,
            KindArg::Cbp => ProblemKind::Cbp,
            KindArg::Cbpdn => ProblemKind::Cbpdn,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ReturnArg {
    X,
    U,
}

#[derive(Clone, Copy, ValueEnum)]
enum NoiseArg {
    Lowpass,
    White,
}

impl From<NoiseArg> for NoiseKind {
    fn from(n: NoiseArg) -> Self {
        match n {
            NoiseArg::Lowpass => NoiseKind::Lowpass,
            NoiseArg::White => NoiseKind::White,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Library file (text matrix: "<k> <n>" header then k rows)
    library: PathBuf,
    /// Observation file (single-column text vector)
    observation: PathBuf,
    /// Problem variant
    #[arg(long, value_enum, default_value = "csr")]
    problem: KindArg,
    /// L1 weight; default 0 for cls, 1e-3*max|A'y| for csr, 1 for cbp/cbpdn
    #[arg(long)]
    lambda: Option<f64>,
    /// Ball radius for cbpdn (cbp fixes it to 0)
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Augmented-Lagrangian weight
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Iteration budget
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Early-stop primal tolerance (0 disables early stopping)
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Disable the abundance sum constraint
    #[arg(long)]
    no_asc: bool,
    /// Disable the abundance non-negativity constraint
    #[arg(long)]
    no_anc: bool,
    /// Which iterate to report as the abundance estimate
    #[arg(long = "return", value_enum, default_value = "u")]
    return_iterate: ReturnArg,
    /// Emit JSON (abundances plus residual diagnostics) instead of a vector file
    #[arg(long)]
    json: bool,
    /// Write the result to a file instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
    /// Log per-iteration primal residuals to stderr
    #[arg(long)]
    verbose: bool,
}

#[derive(Args)]
struct SynthArgs {
    /// Number of spectral bands
    #[arg(long, default_value_t = 200)]
    k: usize,
    /// Number of library signatures
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// Number of nonzero abundances
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Target SNR in dB
    #[arg(long, default_value_t = 30.0)]
    snr: f64,
    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Noise model
    #[arg(long, value_enum, default_value = "lowpass")]
    noise: NoiseArg,
    /// Moving-average window for lowpass noise (odd)
    #[arg(long, default_value_t = 9)]
    window: usize,
    /// Output file prefix; writes <prefix>_library.txt, _xtrue.txt, _y.txt
    #[arg(long, default_value = "synth")]
    out_prefix: String,
}

#[derive(Args)]
struct BenchArgs {
    /// Named grid: "table1" (Gaussian 200x400) or "table2-like" (file library)
    #[arg(long)]
    preset: Option<String>,
    /// SNR grid in dB (repeatable); overrides the preset's grid
    #[arg(long = "snr")]
    snrs: Vec<f64>,
    /// Runs per cell
    #[arg(long)]
    runs: Option<usize>,
    /// Base RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of nonzero abundances
    #[arg(long, default_value_t = 5)]
    s: usize,
    /// Bands of the generated Gaussian library
    #[arg(long)]
    k: Option<usize>,
    /// Signatures of the generated Gaussian library
    #[arg(long)]
    n: Option<usize>,
    /// Augmented-Lagrangian weight
    #[arg(long, default_value_t = 0.01)]
    mu: f64,
    /// Iterations per solve
    #[arg(long, default_value_t = 200)]
    iters: usize,
    /// Moving-average window for lowpass noise (odd)
    #[arg(long, default_value_t = 9)]
    window: usize,
    /// Library file used instead of a generated Gaussian one
    #[arg(long)]
    library: Option<PathBuf>,
    /// Lambda sweep as multiples of max|A'y| (repeatable); default 9 log points
    #[arg(long = "lambda-sweep")]
    lambda_sweep: Vec<f64>,
    /// CSV output path
    #[arg(long, default_value = "bench.csv")]
    csv: PathBuf,
    /// Also write a JSON report with per-run detail
    #[arg(long)]
    json: Option<PathBuf>,
    /// Worker threads; falls back to UNMIX_THREADS, then to 1
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Diverged { .. } => 2,
        _ => 1,
    }
}

fn run_solve(args: &SolveArgs) -> Result<(), (i32, String)> {
    let fail = |e: Error| (exit_code(&e), e.to_string());
    let lib = datagen::load_library(&args.library).map_err(fail)?;
    let y = datagen::load_vector(&args.observation).map_err(fail)?;
    let kind: ProblemKind = args.problem.into();

    if args.mu <= 0.0 {
        return Err((1, "--mu must be > 0".into()));
    }
    if kind == ProblemKind::Cbp && args.delta != 0.0 {
        return Err((1, "--delta must be 0 for --problem cbp".into()));
    }
    if kind == ProblemKind::Cls && args.lambda.unwrap_or(0.0) != 0.0 {
        return Err((1, "--lambda must be 0 for --problem cls".into()));
    }
    let lambda = match args.lambda {
        Some(l) => l,
        None => match kind {
            ProblemKind::Cls => 0.0,
            ProblemKind::Csr => default_lambda(&lib, &y).map_err(fail)?,
            ProblemKind::Cbp | ProblemKind::Cbpdn => 1.0,
        },
    };
    let cfg = SolverConfig::new(kind)
        .with_lambda(lambda)
        .with_delta(args.delta)
        .with_mu(args.mu)
        .with_max_iters(args.iters)
        .with_primal_tol(args.tol)
        .with_asc(!args.no_asc)
        .with_anc(!args.no_anc)
        .with_return_iterate(match args.return_iterate {
            ReturnArg::X => ReturnIterate::X,
            ReturnArg::U => ReturnIterate::U,
        });

    let res = if kind.is_regression() {
        sunsal::solve(&lib, &y, &cfg)
    } else {
        csunsal::solve(&lib, &y, &cfg)
    }
    .map_err(fail)?;

    if args.verbose {
        for (i, r) in res.primal_residual_history.iter().enumerate() {
            eprintln!("iter {:>5}  primal_residual {r:.6e}", i + 1);
        }
    }

    let text = if args.json {
        render_solve_json(&res)
    } else {
        render_vector(&res.abundances)
    };
    match &args.output {
        Some(path) => std::fs::write(path, text).map_err(|e| (1, e.to_string()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn render_vector(v: &DenseVector<f64>) -> String {
    let mut s = format!("{} 1\n", v.len());
    for x in v.iter() {
        s.push_str(&format!("{x:.16e}\n"));
    }
    s
}

fn render_solve_json(res: &SolveResult<f64>) -> String {
    let value = serde_json::json!({
        "schema": 1,
        "abundances": res.abundances.as_slice(),
        "iterations": res.iterations,
        "asc_violation": res.asc_violation,
        "anc_violation": res.anc_violation,
        "data_residual": res.data_residual,
        "primal_residual": res.primal_residual_history.last(),
        "dual_residual": res.dual_residual_history.last(),
        "objective": res.objective_history.last(),
    });
    format!("{}\n", serde_json::to_string_pretty(&value).expect("json"))
}

fn run_synth(args: &SynthArgs) -> Result<(), (i32, String)> {
    let spec = SynthesisSpec {
        k: args.k,
        n: args.n,
        s: args.s,
        target_snr_db: args.snr,
        noise_kind: args.noise.into(),
        lowpass_window: args.window,
        seed: args.seed,
    };
    let problem = spec.synthesize().map_err(|e| (1, e.to_string()))?;
    let prefix = &args.out_prefix;
    let write = |suffix: &str, f: &dyn Fn(&std::path::Path) -> crate::error::Result<()>| {
        let path = PathBuf::from(format!("{prefix}_{suffix}.txt"));
        f(&path).map_err(|e| (1, e.to_string()))
    };
    write("library", &|p| datagen::save_library(p, &problem.library))?;
    write("xtrue", &|p| datagen::save_vector(p, &problem.x_true))?;
    write("y", &|p| datagen::save_vector(p, &problem.y_noisy))?;
    println!("realized_snr_db {:.9}", problem.realized_snr_db);
    Ok(())
}

fn run_bench(args: &BenchArgs) -> Result<(), (i32, String)> {
    let preset = args.preset.as_deref();
    let (mut snrs, mut library, mut k, mut n) = match preset {
        None => (vec![30.0], None, 200usize, 400usize),
        Some("table1") => (vec![20.0, 30.0, 40.0, 50.0], None, 200, 400),
        Some("table2-like") => {
            let lib = match &args.library {
                Some(path) => datagen::load_library(path).map_err(|e| (1, e.to_string()))?,
                None => datagen::load_library_from(EXAMPLE_LIBRARY.as_bytes())
                    .map_err(|e| (1, e.to_string()))?,
            };
            let (bands, sigs) = (lib.bands(), lib.signatures());
            (vec![30.0, 40.0, 50.0], Some(lib), bands, sigs)
        }
        Some(other) => return Err((1, format!("unknown preset: {other}"))),
    };
    if preset != Some("table2-like") {
        if let Some(path) = &args.library {
            let lib = datagen::load_library(path).map_err(|e| (1, e.to_string()))?;
            k = lib.bands();
            n = lib.signatures();
            library = Some(lib);
        }
    }
    if !args.snrs.is_empty() {
        snrs = args.snrs.clone();
    }
    if let Some(kk) = args.k {
        k = kk;
    }
    if let Some(nn) = args.n {
        n = nn;
    }
    let runs = args.runs.unwrap_or(10);
    let threads = args
        .threads
        .or_else(|| {
            std::env::var("UNMIX_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(1);

    let grid: Vec<SynthesisSpec> = snrs
        .iter()
        .map(|&snr| SynthesisSpec {
            k,
            n,
            s: args.s,
            target_snr_db: snr,
            noise_kind: NoiseKind::Lowpass,
            lowpass_window: args.window,
            seed: args.seed,
        })
        .collect();
    let opts = BenchOptions {
        runs,
        lambda_sweep: if args.lambda_sweep.is_empty() {
            bench::default_lambda_sweep()
        } else {
            args.lambda_sweep.clone()
        },
        mu: args.mu,
        iters: args.iters,
        solvers: SolverId::all(),
        library,
        threads,
    };
    let report = bench::run_benchmark(&grid, &opts).map_err(|e| (1, e.to_string()))?;

    let mut out = std::io::stdout();
    bench::write_table(&report, &mut out).map_err(|e| (1, e.to_string()))?;
    let mut csv = BufWriter::new(File::create(&args.csv).map_err(|e| (1, e.to_string()))?);
    bench::write_csv(&report, &mut csv).map_err(|e| (1, e.to_string()))?;
    csv.flush().map_err(|e| (1, e.to_string()))?;
    if let Some(path) = &args.json {
        std::fs::write(path, bench::to_json(&report)).map_err(|e| (1, e.to_string()))?;
    }
    Ok(())
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Synth(args) => run_synth(args),
        Command::Bench(args) => run_bench(args),
    };
    match outcome {
        Ok(()) => 0,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            code
        }
    }
}
