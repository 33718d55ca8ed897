//! Monte Carlo harness: sample counts and failure rates of the improved
//! driver, the tightness sweep of the monotonicity step, and the paired
//! improved-versus-baseline comparison. Reports serialize to CSV.
//!
//! Trial `j` of case `n` draws from a ChaCha8 stream seeded with
//! `trial_seed(case_seed(master, n), j)`, so results do not depend on the
//! worker count or scheduling. Aggregates are exact integer sums.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::enumerator::{simulate_baseline, simulate_improved};
use crate::error::{Error, Result};
use crate::exact::{exact_expected_samples, exact_failure_probability, log_rho};
use crate::policy::{lemma1_threshold, CheckpointSchedule, FailureTolerance};
use crate::sampler::{splitmix64, trial_seed};

pub const FULL_RUNS: u64 = 100_000;
pub const DESK_RUNS: u64 = 10_000;
pub const DEFAULT_EPSILON: f64 = 0.01;

pub const FIG1_HEADER: &str = "n,k,theoretical_samples,mean_samples_success,std_samples_success,failure_rate,failure_stderr,exact_failure,runs,seed";
pub const FIG2_HEADER: &str = "m,n,tau,log10_rho";
pub const COMPARE_HEADER: &str = "n,mean_diff,diff_stderr,predicted_diff,runs,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Improved,
    Baseline,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schedule: CheckpointSchedule,
    pub set_sizes: Vec<u64>,
    pub runs_per_case: u64,
    pub master_seed: u64,
    pub algorithm: Algorithm,
    /// Worker threads; 0 lets rayon decide.
    pub workers: usize,
}

/// `n = 50, 100, ..., 1000`.
pub fn default_set_sizes() -> Vec<u64> {
    (1..=20).map(|i| 50 * i).collect()
}

/// Checkpoints `[2^1, ..., 2^10]` with `epsilon = 0.01`.
pub fn default_schedule() -> CheckpointSchedule {
    let eps = FailureTolerance::new(DEFAULT_EPSILON).expect("0.01 is a valid tolerance");
    CheckpointSchedule::powers_of_two(10, eps).expect("powers of two are increasing")
}

impl ExperimentConfig {
    /// The published setup at desk scale ([`DESK_RUNS`] runs per case).
    pub fn defaults() -> Self {
        ExperimentConfig {
            schedule: default_schedule(),
            set_sizes: default_set_sizes(),
            runs_per_case: DESK_RUNS,
            master_seed: 0,
            algorithm: Algorithm::Improved,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_case == 0 {
            return Err(Error::NotPositive { name: "runs" });
        }
        if self.set_sizes.is_empty() {
            return Err(Error::Config("set sizes must be non-empty".into()));
        }
        for &n in &self.set_sizes {
            self.schedule.require_covers(n)?;
            if n > u32::MAX as u64 {
                return Err(Error::TooLarge {
                    name: "n",
                    value: n,
                    max: u32::MAX as u64,
                });
            }
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))
    }
}

/// Seed of all trials for set size `n`.
pub fn case_seed(master: u64, n: u64) -> u64 {
    splitmix64(master ^ splitmix64(n))
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    sum: i128,
    sum_sq: i128,
}

impl Moments {
    fn push(&mut self, x: i64) {
        self.count += 1;
        self.sum += x as i128;
        self.sum_sq += (x as i128) * (x as i128);
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        self.sum as f64 / self.count as f64
    }

    /// Sample standard deviation; exactly 0 when all values are equal.
    fn std(&self) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        let c = self.count as i128;
        let num = c * self.sum_sq - self.sum * self.sum;
        (num as f64 / (c * (c - 1)) as f64).sqrt()
    }
}

/// One row of the sample-count / failure-rate experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Row {
    pub n: u64,
    pub algorithm: Algorithm,
    /// 1-based covering checkpoint, `m_{k-1} < n <= m_k`.
    pub k: usize,
    pub theoretical_samples: u64,
    pub successes: u64,
    pub mean_samples_success: f64,
    pub std_samples_success: f64,
    pub failure_rate: f64,
    /// `sqrt(r (1 - r) / runs)`.
    pub failure_stderr: f64,
    /// Rule-of-three one-sided 95% bound `3 / runs`, reported when no run failed.
    pub failure_upper: Option<f64>,
    /// Exact DP failure probability (improved driver only).
    pub exact_failure: Option<f64>,
    pub runs: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub rows: Vec<Fig1Row>,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(FIG1_HEADER);
        out.push('\n');
        for r in &self.rows {
            let exact = r.exact_failure.map(|p| p.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.n,
                r.k,
                r.theoretical_samples,
                r.mean_samples_success,
                r.std_samples_success,
                r.failure_rate,
                r.failure_stderr,
                exact,
                r.runs,
                r.seed
            );
        }
        out
    }
}

fn fig1_case(
    config: &ExperimentConfig,
    pool: &rayon::ThreadPool,
    n: u64,
    algorithm: Algorithm,
) -> Result<Fig1Row> {
    let schedule = &config.schedule;
    let k = schedule.covering_index(n).ok_or(Error::ScheduleTooSmall {
        largest: schedule.largest(),
        n,
    })?;
    let seed = case_seed(config.master_seed, n);
    let n32 = n as u32;
    let results: Vec<(bool, u64)> = pool.install(|| {
        (0..config.runs_per_case)
            .into_par_iter()
            .map(|j| {
                let s = trial_seed(seed, j);
                let o = match algorithm {
                    Algorithm::Baseline => simulate_baseline(n32, s, schedule),
                    _ => simulate_improved(n32, s, schedule),
                };
                (o.collected.len() as u64 == n, o.total_samples)
            })
            .collect()
    });
    let mut samples = Moments::default();
    for &(ok, t) in &results {
        if ok {
            samples.push(t as i64);
        }
    }
    let runs = config.runs_per_case;
    let failures = runs - samples.count;
    let rate = failures as f64 / runs as f64;
    let exact_failure = match algorithm {
        Algorithm::Baseline => None,
        _ => Some(exact_failure_probability(n, schedule)?),
    };
    Ok(Fig1Row {
        n,
        algorithm,
        k,
        theoretical_samples: schedule.thresholds()[k - 1],
        successes: samples.count,
        mean_samples_success: samples.mean(),
        std_samples_success: samples.std(),
        failure_rate: rate,
        failure_stderr: (rate * (1.0 - rate) / runs as f64).sqrt(),
        failure_upper: (failures == 0).then(|| 3.0 / runs as f64),
        exact_failure,
        runs,
        seed: config.master_seed,
    })
}

/// Runs `runs_per_case` seeded trials per set size and aggregates draw counts
/// of successful runs and the failure rate. With [`Algorithm::Both`] each
/// size yields an improved row followed by a baseline row.
pub fn run_fig1(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let pool = config.pool()?;
    let algorithms: &[Algorithm] = match config.algorithm {
        Algorithm::Improved => &[Algorithm::Improved],
        Algorithm::Baseline => &[Algorithm::Baseline],
        Algorithm::Both => &[Algorithm::Improved, Algorithm::Baseline],
    };
    let mut rows = Vec::new();
    for &n in &config.set_sizes {
        for &a in algorithms {
            rows.push(fig1_case(config, &pool, n, a)?);
        }
    }
    Ok(ExperimentReport { rows })
}

/// `(m, n, tau, log10 rho_tau)` with `tau = ceil(m ln(m / epsilon))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TightnessPoint {
    pub m: u64,
    pub n: u64,
    pub tau: u64,
    pub log10_rho: f64,
}

pub fn run_fig2(n: u64, epsilon: f64, m_values: &[u64]) -> Result<Vec<TightnessPoint>> {
    m_values
        .iter()
        .map(|&m| {
            if m > n {
                return Err(Error::MExceedsN { m, n });
            }
            let tau = lemma1_threshold(m, epsilon)?;
            Ok(TightnessPoint {
                m,
                n,
                tau,
                log10_rho: log_rho(tau, m, n)? / std::f64::consts::LN_10,
            })
        })
        .collect()
}

pub fn fig2_csv(points: &[TightnessPoint]) -> String {
    let mut out = String::from(FIG2_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.m, p.n, p.tau, p.log10_rho);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n: u64,
    /// Mean of `baseline draws - improved draws` over pairs where both succeed.
    pub mean_diff: f64,
    pub diff_stderr: f64,
    /// `E[T_{m_{k-1}+1} | n]`, or 0 when `n <= m_1`.
    pub predicted_diff: f64,
    /// Pairs in which both drivers collected all `n` elements.
    pub pairs: u64,
    pub runs: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(COMPARE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n, r.mean_diff, r.diff_stderr, r.predicted_diff, r.runs, r.seed
            );
        }
        out
    }
}

/// Expected extra draws of the counter-reset driver on a set of size `n`.
pub fn predicted_overhead(schedule: &CheckpointSchedule, n: u64) -> Result<f64> {
    schedule.require_covers(n)?;
    let k = schedule.covering_index(n).expect("covered");
    if k == 1 {
        return Ok(0.0);
    }
    exact_expected_samples(schedule.checkpoints()[k - 2] + 1, n)
}

/// Paired runs: both drivers consume the same seeded stream per trial.
pub fn run_comparison(config: &ExperimentConfig) -> Result<ComparisonReport> {
    if config.algorithm != Algorithm::Both {
        return Err(Error::Config("comparison requires algorithm = both".into()));
    }
    config.validate()?;
    let pool = config.pool()?;
    let schedule = &config.schedule;
    let mut rows = Vec::new();
    for &n in &config.set_sizes {
        let seed = case_seed(config.master_seed, n);
        let n32 = n as u32;
        let diffs: Vec<Option<i64>> = pool.install(|| {
            (0..config.runs_per_case)
                .into_par_iter()
                .map(|j| {
                    let s = trial_seed(seed, j);
                    let a = simulate_improved(n32, s, schedule);
                    let b = simulate_baseline(n32, s, schedule);
                    let ok = a.collected.len() as u64 == n && b.collected.len() as u64 == n;
                    ok.then(|| b.total_samples as i64 - a.total_samples as i64)
                })
                .collect()
        });
        let mut m = Moments::default();
        for d in diffs.into_iter().flatten() {
            m.push(d);
        }
        rows.push(ComparisonRow {
            n,
            mean_diff: m.mean(),
            diff_stderr: m.std() / (m.count as f64).sqrt(),
            predicted_diff: predicted_overhead(schedule, n)?,
            pairs: m.count,
            runs: config.runs_per_case,
            seed: config.master_seed,
        });
    }
    Ok(ComparisonReport { rows })
}
