//! Enumeration of a finite set through a fair sampler.
//!
//! Given a sampler that returns each element of an unknown finite set `X`
//! with probability `1/|X|`, [`enumerate_improved`] collects every element
//! with probability at least `1 - epsilon` as long as the largest checkpoint
//! is at least `|X|`. The crate also carries the counter-reset baseline,
//! exact coupon-collector oracles used to check every bound, and a seeded
//! Monte Carlo harness.
//!
//! ```
//! use fairenum::{enumerate_improved, CheckpointSchedule, FailureTolerance, UniformSampler};
//!
//! let eps = FailureTolerance::new(0.01).unwrap();
//! let schedule = CheckpointSchedule::powers_of_two(10, eps).unwrap();
//! let outcome = enumerate_improved(UniformSampler::new(50, 7), &schedule).unwrap();
//! assert_eq!(outcome.collected.len(), 50);
//! assert_eq!(outcome.total_samples, 709);
//! ```

#![forbid(unsafe_code)]

pub mod cli;
mod ddouble;
pub mod enumerator;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod policy;
pub mod sampler;

pub use enumerator::{
    enumerate_baseline, enumerate_improved, enumerate_stream, simulate_baseline, simulate_improved,
    Aborted, EnumerationOutcome, Stop, TraceEntry,
};
pub use error::{Error, Result};
pub use exact::{
    exact_expected_samples, exact_failure_probability, lemma2_bound, log_g, log_rho,
    tail_probability, TailTable,
};
pub use experiments::{
    run_comparison, run_fig1, run_fig2, Algorithm, ComparisonReport, ExperimentConfig,
    ExperimentReport, TightnessPoint,
};
pub use policy::{
    checkpoint_threshold, lemma1_threshold, split_threshold, CheckpointSchedule, FailureTolerance,
    MAX_EPSILON,
};
pub use sampler::{trial_seed, LineStream, Sampler, StreamError, UniformSampler};
