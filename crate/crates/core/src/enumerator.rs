//! Enumeration drivers.
//!
//! [`enumerate_improved`] keeps one cumulative draw counter `t` across all
//! checkpoints. At checkpoint `i` it draws until `t = L_i`, then stops if
//! fewer than `m_i` distinct elements have been seen. On a set of size `n`
//! with `m_{k-1} < n < m_k` a successful run therefore always makes exactly
//! `L_k` draws.
//!
//! [`enumerate_baseline`] is the counter-reset variant: every time the
//! collection outgrows the current checkpoint it moves to the next one and
//! restarts `t` from zero, so it pays an extra `T_{m_{k-1}+1}` draws on
//! average.

use std::collections::HashSet;
use std::convert::Infallible;
use std::fmt;
use std::hash::Hash;

use crate::policy::CheckpointSchedule;
use crate::sampler::{Sampler, UniformSampler};

/// Where a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stop {
    /// Broke at this 1-based checkpoint index.
    Checkpoint(usize),
    /// Passed every checkpoint without breaking.
    Exhausted,
}

impl fmt::Display for Stop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stop::Checkpoint(i) => write!(f, "{i}"),
            Stop::Exhausted => f.write_str("exhausted"),
        }
    }
}

/// One checkpoint evaluation (improved) or reset/termination event (baseline).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceEntry {
    /// 1-based checkpoint index.
    pub checkpoint: usize,
    /// Cumulative draws at the event.
    pub samples: u64,
    /// `|S|` at the event.
    pub collected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationOutcome<T: Eq + Hash> {
    pub collected: HashSet<T>,
    pub total_samples: u64,
    pub stop: Stop,
    pub trace: Vec<TraceEntry>,
}

impl<T: Eq + Hash> EnumerationOutcome<T> {
    pub fn collected_len(&self) -> usize {
        self.collected.len()
    }
}

/// A run cut short by a sampler error, with everything gathered before it.
#[derive(Debug)]
pub struct Aborted<T: Eq + Hash, E> {
    pub error: E,
    pub collected: HashSet<T>,
    pub total_samples: u64,
    pub trace: Vec<TraceEntry>,
}

impl<T: Eq + Hash, E: fmt::Display> fmt::Display for Aborted<T, E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({} distinct after {} samples)",
            self.error,
            self.collected.len(),
            self.total_samples
        )
    }
}

impl<T: Eq + Hash + fmt::Debug, E: std::error::Error + 'static> std::error::Error
    for Aborted<T, E>
{
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

pub type RunResult<S> = Result<
    EnumerationOutcome<<S as Sampler>::Item>,
    Aborted<<S as Sampler>::Item, <S as Sampler>::Error>,
>;

struct Run<S: Sampler> {
    sampler: S,
    collected: HashSet<S::Item>,
    total: u64,
    trace: Vec<TraceEntry>,
}

impl<S: Sampler> Run<S> {
    fn new(sampler: S) -> Self {
        Run {
            sampler,
            collected: HashSet::new(),
            total: 0,
            trace: Vec::new(),
        }
    }

    /// Returns whether the drawn element was new.
    fn draw(&mut self) -> Result<bool, S::Error> {
        let x = self.sampler.draw()?;
        self.total += 1;
        Ok(self.collected.insert(x))
    }

    fn mark(&mut self, checkpoint: usize) {
        self.trace.push(TraceEntry {
            checkpoint,
            samples: self.total,
            collected: self.collected.len(),
        });
    }

    fn finish(self, stop: Stop) -> EnumerationOutcome<S::Item> {
        EnumerationOutcome {
            collected: self.collected,
            total_samples: self.total,
            stop,
            trace: self.trace,
        }
    }

    fn abort(self, error: S::Error) -> Aborted<S::Item, S::Error> {
        Aborted {
            error,
            collected: self.collected,
            total_samples: self.total,
            trace: self.trace,
        }
    }
}

/// Checkpointed enumeration with a single cumulative draw counter.
pub fn enumerate_improved<S: Sampler>(sampler: S, schedule: &CheckpointSchedule) -> RunResult<S> {
    let mut run = Run::new(sampler);
    for (i, (&m, &limit)) in schedule
        .checkpoints()
        .iter()
        .zip(schedule.thresholds())
        .enumerate()
    {
        while run.total < limit {
            if let Err(e) = run.draw() {
                return Err(run.abort(e));
            }
        }
        run.mark(i + 1);
        if (run.collected.len() as u64) < m {
            return Ok(run.finish(Stop::Checkpoint(i + 1)));
        }
    }
    Ok(run.finish(Stop::Exhausted))
}

/// Counter-reset enumeration.
///
/// The run watches checkpoint `i` (starting at the first) with a counter `t`
/// that restarts at zero. When `|S|` grows past `m_i` the run moves to the
/// smallest checkpoint with `m_i >= |S|` and resets `t`; if no such
/// checkpoint exists the schedule is exhausted. When `t` reaches `L_i`
/// without `|S|` passing `m_i`, the run stops at `i`.
pub fn enumerate_baseline<S: Sampler>(sampler: S, schedule: &CheckpointSchedule) -> RunResult<S> {
    let checkpoints = schedule.checkpoints();
    let thresholds = schedule.thresholds();
    let mut run = Run::new(sampler);
    let mut i = 0usize;
    let mut t = 0u64;
    loop {
        if t >= thresholds[i] {
            run.mark(i + 1);
            return Ok(run.finish(Stop::Checkpoint(i + 1)));
        }
        let fresh = match run.draw() {
            Ok(f) => f,
            Err(e) => return Err(run.abort(e)),
        };
        t += 1;
        let len = run.collected.len() as u64;
        if fresh && len > checkpoints[i] {
            run.mark(i + 1);
            while i < checkpoints.len() && checkpoints[i] < len {
                i += 1;
            }
            if i == checkpoints.len() {
                return Ok(run.finish(Stop::Exhausted));
            }
            t = 0;
        }
    }
}

/// Improved enumeration fed from an external token stream.
///
/// Running out of tokens before the run concludes yields
/// [`StreamError::Exhausted`](crate::sampler::StreamError::Exhausted)
/// inside an [`Aborted`] carrying the partial collection.
pub fn enumerate_stream<S: Sampler>(stream: S, schedule: &CheckpointSchedule) -> RunResult<S> {
    enumerate_improved(stream, schedule)
}

fn infallible<T: Eq + Hash>(
    r: Result<EnumerationOutcome<T>, Aborted<T, Infallible>>,
) -> EnumerationOutcome<T> {
    match r {
        Ok(o) => o,
        Err(a) => match a.error {},
    }
}

/// Improved run over a simulated set `{0, ..., n-1}`.
pub fn simulate_improved(
    n: u32,
    seed: u64,
    schedule: &CheckpointSchedule,
) -> EnumerationOutcome<u32> {
    infallible(enumerate_improved(UniformSampler::new(n, seed), schedule))
}

/// Baseline run over a simulated set `{0, ..., n-1}`.
pub fn simulate_baseline(
    n: u32,
    seed: u64,
    schedule: &CheckpointSchedule,
) -> EnumerationOutcome<u32> {
    infallible(enumerate_baseline(UniformSampler::new(n, seed), schedule))
}
