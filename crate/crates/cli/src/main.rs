//! Command-line driver for the isotropic Wiener experiments. Every
//! subcommand computes its full result in memory before writing anything, so
//! a failed run never leaves a partial output file behind.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use isowiener::constants::ProblemConstants;
use isowiener::experiments::{
    complexity_curve, error_table, halving_sequence, mc_comparison, midpoint_vs_haber, rate_study, write_csv_to,
    CsvRecord, Problem, StudyConfig, StudyOptions, DEFAULT_REPLICATES,
};
use isowiener::sampler::sample_field;
use isowiener::{default_quad_order, CubePartition, Error, RngStream, MAX_DIM};

const THREADS_ENV: &str = "ISOWIENER_THREADS";
const DEFAULT_SEED: u64 = 0;
const DEFAULT_EPS_START: f64 = 0.05;
const DEFAULT_EPS_STOP: f64 = 0.003;

#[derive(Parser)]
#[command(
    name = "isowiener",
    version,
    about = "Average-case integration and approximation under the isotropic Wiener measure on [0,1]^d",
    after_help = "Output is CSV on stdout unless --out is given.\n\
                  Exit codes: 0 success, 2 invalid input, 1 runtime failure.\n\
                  Environment: ISOWIENER_THREADS caps the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Problem constants c_int and c_app for one dimension, or for d = 1..5.
    Constants {
        /// Dimension d in 1..5 (dimensionless) [default: all of 1..5]
        #[arg(long)]
        d: Option<usize>,
        /// Gauss-Legendre nodes per axis [default: 32 for d <= 3, 16 for d >= 4]
        #[arg(long)]
        quad_order: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Exact average errors of the stratified rule or the cell-centre approximation.
    ErrorTable {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Exact errors next to seeded Monte Carlo estimates of the same errors.
    RateStudy {
        #[command(flatten)]
        problem: ProblemArg,
        #[command(flatten)]
        grid: GridArgs,
        /// Independent replicates per p, at least 30 (count) [default: 400]
        #[arg(long)]
        replicates: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        /// Gauss-Legendre nodes per axis for the embedding integrals [default: 32 for d <= 3, 16 for d >= 4]
        #[arg(long)]
        quad_order: Option<usize>,
        /// Evaluation grid points per axis for the approximation error, a multiple of p and >= 2p [default: 8p]
        #[arg(long)]
        grid_m: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Cardinality n(eps) needed to reach average error eps, with the error achieved.
    ComplexityCurve {
        #[command(flatten)]
        problem: ProblemArg,
        /// Dimension d in 1..5 (dimensionless), required
        #[arg(long)]
        d: Option<usize>,
        /// Comma-separated error targets eps in (0, 1) (absolute error) [default: 0.05 halved while >= 0.003]
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Stratified rule against classical Monte Carlo with the same n.
    CompareMc {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        io: IoArgs,
    },
    /// Deterministic midpoint rule against the stratified rule.
    CompareMidpoint {
        #[command(flatten)]
        grid: GridArgs,
        /// Gauss-Legendre nodes per axis [default: 32 for d <= 3, 16 for d >= 4]
        #[arg(long)]
        quad_order: Option<usize>,
        #[command(flatten)]
        io: IoArgs,
    },
    /// One draw of the field at the p^d cell centres.
    SampleField {
        /// Dimension d in 1..5 (dimensionless), required
        #[arg(long)]
        d: Option<usize>,
        /// Cells per axis, so that p^d points are sampled (count), required
        #[arg(long)]
        p: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        #[command(flatten)]
        io: IoArgs,
    },
}

#[derive(Args)]
struct ProblemArg {
    /// Problem: int (integration) or app (L2 approximation), required
    #[arg(long)]
    problem: Option<Problem>,
}

#[derive(Args)]
struct GridArgs {
    /// Dimension d in 1..5 (dimensionless), required
    #[arg(long)]
    d: Option<usize>,
    /// Comma-separated cells per axis, strictly ascending; n = p^d (count), required
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
}

#[derive(Args)]
struct SeedArg {
    /// Master seed of the random streams (unsigned 64-bit) [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct IoArgs {
    /// Write CSV to this file instead of stdout [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with default values; explicit flags take precedence [default: none]
    #[arg(long)]
    config: Option<PathBuf>,
}

impl IoArgs {
    fn load_config(&self) -> Result<StudyConfig, Error> {
        match &self.config {
            Some(path) => StudyConfig::from_path(path),
            None => Ok(StudyConfig::default()),
        }
    }
}

fn required<T>(value: Option<T>, flag: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required (on the command line or in --config)")))
}

fn csv_bytes<R: CsvRecord>(rows: &[R]) -> Result<Vec<u8>, Error> {
    let mut buf = Vec::new();
    write_csv_to(rows, &mut buf).map_err(|source| Error::Csv {
        path: PathBuf::from("<memory>"),
        source,
    })?;
    Ok(buf)
}

/// Runs the subcommand and returns the CSV bytes plus the output target.
fn execute(command: Command) -> Result<(Vec<u8>, Option<PathBuf>), Error> {
    match command {
        Command::Constants { d, quad_order, io } => {
            let cfg = io.load_config()?;
            let dims: Vec<usize> = match d.or(cfg.d) {
                Some(d) => vec![d],
                None => (1..=MAX_DIM).collect(),
            };
            let rows = dims
                .into_iter()
                .map(|d| {
                    let order = quad_order.or(cfg.quad_order).unwrap_or_else(|| default_quad_order(d));
                    ProblemConstants::compute(d, order)
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((csv_bytes(&rows)?, io.out))
        }
        Command::ErrorTable { problem, grid, io } => {
            let cfg = io.load_config()?;
            let problem = required(problem.problem.or(cfg.problem), "problem")?;
            let d = required(grid.d.or(cfg.d), "d")?;
            let p = required(grid.p.or(cfg.p_list), "p")?;
            Ok((csv_bytes(&error_table(problem, d, &p)?)?, io.out))
        }
        Command::RateStudy {
            problem,
            grid,
            replicates,
            seed,
            quad_order,
            grid_m,
            io,
        } => {
            let cfg = io.load_config()?;
            let problem = required(problem.problem.or(cfg.problem), "problem")?;
            let d = required(grid.d.or(cfg.d), "d")?;
            let p = required(grid.p.or(cfg.p_list), "p")?;
            let replicates = replicates.or(cfg.replicates).unwrap_or(DEFAULT_REPLICATES);
            let seed = seed.seed.or(cfg.master_seed).unwrap_or(DEFAULT_SEED);
            let options = StudyOptions {
                quad_order: quad_order.or(cfg.quad_order).unwrap_or_else(|| default_quad_order(d)),
                grid_m: grid_m.or(cfg.grid_m),
            };
            let rows = rate_study(problem, d, &p, replicates, &RngStream::new(seed, 0), options)?;
            Ok((csv_bytes(&rows)?, io.out))
        }
        Command::ComplexityCurve { problem, d, eps, io } => {
            let cfg = io.load_config()?;
            let problem = required(problem.problem.or(cfg.problem), "problem")?;
            let d = required(d.or(cfg.d), "d")?;
            let eps = eps
                .or(cfg.epsilon_list)
                .unwrap_or_else(|| halving_sequence(DEFAULT_EPS_START, DEFAULT_EPS_STOP));
            let curve = complexity_curve(problem, d, &eps)?;
            Ok((csv_bytes(&curve.records())?, io.out))
        }
        Command::CompareMc { grid, io } => {
            let cfg = io.load_config()?;
            let d = required(grid.d.or(cfg.d), "d")?;
            let p = required(grid.p.or(cfg.p_list), "p")?;
            let rows = p.iter().map(|&p| mc_comparison(d, p)).collect::<Result<Vec<_>, _>>()?;
            Ok((csv_bytes(&rows)?, io.out))
        }
        Command::CompareMidpoint { grid, quad_order, io } => {
            let cfg = io.load_config()?;
            let d = required(grid.d.or(cfg.d), "d")?;
            let p = required(grid.p.or(cfg.p_list), "p")?;
            let order = quad_order.or(cfg.quad_order).unwrap_or_else(|| default_quad_order(d));
            let rows = p
                .iter()
                .map(|&p| midpoint_vs_haber(d, p, order))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((csv_bytes(&rows)?, io.out))
        }
        Command::SampleField { d, p, seed, io } => {
            let cfg = io.load_config()?;
            let d = required(d.or(cfg.d), "d")?;
            let p = match p {
                Some(p) => p,
                None => match cfg.p_list.as_deref() {
                    Some([p]) => *p,
                    Some(_) => return Err(Error::Config("sample-field takes a single p".into())),
                    None => required(None, "p")?,
                },
            };
            let seed = seed.seed.or(cfg.master_seed).unwrap_or(DEFAULT_SEED);
            let partition = CubePartition::new(d, p)?;
            let sample = sample_field(partition.centers(), &mut RngStream::new(seed, 0))?;
            let mut buf = Vec::new();
            sample.write_csv_to(&mut buf).map_err(|source| Error::Csv {
                path: PathBuf::from("<memory>"),
                source,
            })?;
            Ok((buf, io.out))
        }
    }
}

fn emit(bytes: &[u8], out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, bytes).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => io::stdout().write_all(bytes).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidArgument(format!("{THREADS_ENV}={raw} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot size thread pool: {e}")))
}

fn fail(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(if err.is_validation() { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        return fail(&e);
    }
    let result = execute(cli.command).and_then(|(bytes, out)| emit(&bytes, out.as_deref()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
