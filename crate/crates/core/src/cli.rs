//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage or domain errors, 2 on runtime and
//! stream errors. Every invocation echoes its resolved configuration to
//! standard error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::enumerator::{
    enumerate_baseline, enumerate_improved, Aborted, EnumerationOutcome, RunResult,
};
use crate::error::Error;
use crate::exact::{exact_expected_samples, exact_failure_probability, tail_probability};
use crate::experiments::{
    default_set_sizes, fig2_csv, run_comparison, run_fig1, run_fig2, Algorithm, ExperimentConfig,
    DEFAULT_EPSILON, DESK_RUNS,
};
use crate::policy::{
    lemma1_threshold, split_threshold, CheckpointSchedule, FailureTolerance, MAX_EPSILON,
};
use crate::sampler::{LineStream, Sampler, StreamError, UniformSampler};

/// Environment variable overriding the worker count of experiment subcommands.
pub const WORKERS_ENV: &str = "FAIRENUM_WORKERS";

const DEFAULT_CHECKPOINTS: &str = "2,4,8,16,32,64,128,256,512,1024";

#[derive(Debug, Parser)]
#[command(
    name = "fairenum",
    version,
    about = "Enumerate a finite set by uniform random sampling with a (1 - epsilon) success guarantee"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one enumeration on a simulated set or a token stream.
    Enumerate(EnumerateArgs),
    /// Print ceil(m ln(m/eps)), or ceil(m ln(m M/eps)) with --M.
    Bound(BoundArgs),
    /// Print the exact P(T_m > tau) for a set of size n.
    Tail(TailArgs),
    /// Print the exact E[T_m] for a set of size n.
    Expect(ExpectArgs),
    /// Print the exact failure probability of the checkpointed driver.
    Failure(FailureArgs),
    /// Sample counts and failure rates per set size (CSV).
    Fig1(ExperimentArgs),
    /// Tightness ratio rho_tau of the monotonicity step (CSV).
    Fig2(Fig2Args),
    /// Paired checkpointed vs counter-reset draw counts (CSV).
    Compare(ExperimentArgs),
}

fn parse_epsilon(s: &str) -> Result<f64, String> {
    let e: f64 = s.parse().map_err(|e| format!("epsilon: {e}"))?;
    FailureTolerance::new(e).map(|_| e).map_err(|_| {
        format!("epsilon must lie in (0, 1/e] = (0, {MAX_EPSILON}]; thresholds use the natural log")
    })
}

fn parse_positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    /// Comma-separated, strictly increasing checkpoints.
    #[arg(long, value_delimiter = ',', value_parser = parse_positive, default_value = DEFAULT_CHECKPOINTS)]
    checkpoints: Vec<u64>,
    #[arg(long, value_parser = parse_epsilon, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
}

impl ScheduleArgs {
    fn schedule(&self) -> Result<CheckpointSchedule, Error> {
        CheckpointSchedule::new(
            self.checkpoints.clone(),
            FailureTolerance::new(self.epsilon)?,
        )
    }
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    /// Size of the simulated set {0, ..., n-1}.
    #[arg(long, value_parser = parse_positive, required_unless_present_any = ["stdin", "input"])]
    n: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Use the counter-reset driver.
    #[arg(long)]
    baseline: bool,
    /// Read newline-delimited tokens from standard input.
    #[arg(long, conflicts_with_all = ["n", "input"])]
    stdin: bool,
    /// Read newline-delimited tokens from a file.
    #[arg(long, conflicts_with = "n")]
    input: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long, value_parser = parse_positive)]
    m: u64,
    #[arg(long, value_parser = parse_epsilon)]
    epsilon: f64,
    /// Number of checkpoints sharing the failure budget.
    #[arg(long = "M", value_parser = parse_positive)]
    count: Option<u64>,
}

#[derive(Debug, Args)]
struct TailArgs {
    #[arg(long, value_parser = parse_positive)]
    m: u64,
    #[arg(long)]
    tau: u64,
    #[arg(long, value_parser = parse_positive)]
    n: u64,
}

#[derive(Debug, Args)]
struct ExpectArgs {
    #[arg(long, value_parser = parse_positive)]
    m: u64,
    #[arg(long, value_parser = parse_positive)]
    n: u64,
}

#[derive(Debug, Args)]
struct FailureArgs {
    #[arg(long, value_parser = parse_positive)]
    n: u64,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Improved,
    Baseline,
    Both,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long, value_parser = parse_positive, default_value_t = DESK_RUNS)]
    runs: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    schedule: ScheduleArgs,
    /// Comma-separated set sizes (default 50, 100, ..., 1000).
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    sizes: Option<Vec<u64>>,
    /// Driver for fig1 (compare always runs both).
    #[arg(long, value_enum, default_value = "improved")]
    algorithm: AlgorithmArg,
    /// Worker threads (0 = all cores); overrides FAIRENUM_WORKERS.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Args)]
struct Fig2Args {
    #[arg(long, value_parser = parse_positive, default_value_t = 100)]
    n: u64,
    #[arg(long, value_parser = parse_epsilon, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Fatal outcome of a subcommand, mapped to an exit status.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

/// Formats like C's `%.12g`.
pub fn format_sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa), sign, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim(&format!("{:.*}", decimals, x))
    }
}

fn write_outcome<T: Eq + std::hash::Hash>(
    out: &mut dyn Write,
    o: &EnumerationOutcome<T>,
) -> std::io::Result<()> {
    writeln!(out, "collected {}", o.collected.len())?;
    writeln!(out, "total_samples {}", o.total_samples)?;
    writeln!(out, "stop_checkpoint {}", o.stop)
}

fn stream_failure(out: &mut dyn Write, a: Aborted<Vec<u8>, StreamError>) -> Failure {
    let _ = writeln!(out, "collected {}", a.collected.len());
    let _ = writeln!(out, "total_samples {}", a.total_samples);
    let _ = writeln!(out, "stop_checkpoint aborted");
    Failure::Runtime(a.to_string())
}

fn drive<S: Sampler>(sampler: S, schedule: &CheckpointSchedule, baseline: bool) -> RunResult<S> {
    if baseline {
        enumerate_baseline(sampler, schedule)
    } else {
        enumerate_improved(sampler, schedule)
    }
}

fn cmd_enumerate(
    args: &EnumerateArgs,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let schedule = args.schedule.schedule()?;
    if args.stdin || args.input.is_some() {
        let result = match &args.input {
            Some(path) => {
                let file = File::open(path)
                    .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
                drive(
                    LineStream::new(BufReader::new(file)),
                    &schedule,
                    args.baseline,
                )
            }
            None => drive(LineStream::new(stdin), &schedule, args.baseline),
        };
        return match result {
            Ok(o) => Ok(write_outcome(out, &o)?),
            Err(a) => Err(stream_failure(out, a)),
        };
    }
    let n = args.n.expect("clap requires --n without a stream");
    let n32 =
        u32::try_from(n).map_err(|_| Failure::Usage(format!("n = {n} exceeds {}", u32::MAX)))?;
    let o = match drive(
        UniformSampler::new(n32, args.seed),
        &schedule,
        args.baseline,
    ) {
        Ok(o) => o,
        Err(a) => match a.error {},
    };
    write_outcome(out, &o)?;
    writeln!(out, "complete {}", o.collected.len() as u64 == n)?;
    Ok(())
}

fn workers(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(w) = flag {
        return Ok(w);
    }
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::Usage(format!(
                "{WORKERS_ENV} must be a non-negative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn experiment_config(
    args: &ExperimentArgs,
    algorithm: Algorithm,
) -> Result<ExperimentConfig, Failure> {
    Ok(ExperimentConfig {
        schedule: args.schedule.schedule()?,
        set_sizes: args.sizes.clone().unwrap_or_else(default_set_sizes),
        runs_per_case: args.runs,
        master_seed: args.seed,
        algorithm,
        workers: workers(args.workers)?,
    })
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, csv: &str) -> Result<(), Failure> {
    match path {
        Some(p) => {
            std::fs::write(p, csv).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))
        }
        None => Ok(out.write_all(csv.as_bytes())?),
    }
}

fn dispatch(
    cli: &Cli,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    match &cli.command {
        Command::Enumerate(a) => cmd_enumerate(a, stdin, out),
        Command::Bound(a) => {
            let v = match a.count {
                Some(count) => split_threshold(a.m, count, a.epsilon)?,
                None => lemma1_threshold(a.m, a.epsilon)?,
            };
            Ok(writeln!(out, "{v}")?)
        }
        Command::Tail(a) => {
            let p = tail_probability(a.m, a.tau, a.n)?;
            Ok(writeln!(out, "{}", format_sig12(p))?)
        }
        Command::Expect(a) => {
            let e = exact_expected_samples(a.m, a.n)?;
            Ok(writeln!(out, "{}", format_sig12(e))?)
        }
        Command::Failure(a) => {
            let p = exact_failure_probability(a.n, &a.schedule.schedule()?)?;
            Ok(writeln!(out, "{}", format_sig12(p))?)
        }
        Command::Fig1(a) => {
            let algorithm = match a.algorithm {
                AlgorithmArg::Improved => Algorithm::Improved,
                AlgorithmArg::Baseline => Algorithm::Baseline,
                AlgorithmArg::Both => Algorithm::Both,
            };
            let config = experiment_config(a, algorithm)?;
            let report = run_fig1(&config)?;
            for r in report.rows.iter().filter(|r| r.failure_upper.is_some()) {
                let _ = writeln!(
                    err,
                    "n={} {:?}: no failures; rule-of-three upper bound {}",
                    r.n,
                    r.algorithm,
                    format_sig12(r.failure_upper.unwrap_or_default())
                );
            }
            emit(out, a.out.as_ref(), &report.to_csv())
        }
        Command::Fig2(a) => {
            let ms: Vec<u64> = (1..=a.n).collect();
            let points = run_fig2(a.n, a.epsilon, &ms)?;
            emit(out, a.out.as_ref(), &fig2_csv(&points))
        }
        Command::Compare(a) => {
            let config = experiment_config(a, Algorithm::Both)?;
            let report = run_comparison(&config)?;
            emit(out, a.out.as_ref(), &report.to_csv())
        }
    }
}

/// Runs the CLI against explicit streams and returns the exit status.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let _ = writeln!(err, "config: {:?}", cli.command);
    let status = match dispatch(&cli, stdin, out, err) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Runtime(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    };
    let _ = out.flush();
    status
}
