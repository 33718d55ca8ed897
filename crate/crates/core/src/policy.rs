//! Validated inputs and the termination thresholds derived from them.
//!
//! Every threshold has the form `ceil(m * ln(m * scale / epsilon))` with the
//! natural logarithm. `scale` is 1 for the single-checkpoint tail bound and
//! `M` (the number of checkpoints) inside a schedule, which splits the
//! failure budget evenly as `epsilon / M` per checkpoint.

use std::fmt;

use crate::ddouble::DD;
use crate::error::{Error, Result};

/// Largest admissible failure tolerance, `1/e` rounded to the nearest `f64`.
///
/// The rounded value sits about `1.2e-17` above the real `1/e`.
pub const MAX_EPSILON: f64 = 1.0 / std::f64::consts::E;

/// Checkpoint values must be exactly representable as `f64`.
pub const MAX_CHECKPOINT: u64 = 1 << 53;

/// Distance to the nearest integer, relative to `max(1, |v|)`, under which the
/// `f64` threshold is recomputed in double-double precision before rounding up.
const NEAR_INTEGER: f64 = 1e-9;

/// A failure tolerance in `(0, 1/e]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct FailureTolerance(f64);

impl FailureTolerance {
    pub fn new(epsilon: f64) -> Result<Self> {
        if epsilon > 0.0 && epsilon <= MAX_EPSILON {
            Ok(FailureTolerance(epsilon))
        } else {
            Err(Error::Epsilon(epsilon))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl fmt::Display for FailureTolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `ceil(m * ln(m * scale / epsilon))`, robust against `f64` rounding near
/// integer values.
fn ceil_m_log(m: u64, scale: u64, epsilon: f64) -> u64 {
    let mf = m as f64;
    let v = mf * (mf * scale as f64 / epsilon).ln();
    let nearest = v.round();
    if (v - nearest).abs() > NEAR_INTEGER * v.abs().max(1.0) {
        return v.ceil() as u64;
    }
    let arg = DD::product(mf, scale as f64).div_f64(epsilon);
    let exact = arg.ln() * DD::from_f64(mf);
    let diff = (exact - DD::from_f64(nearest)).to_f64();
    if diff > 0.0 {
        nearest as u64 + 1
    } else {
        nearest as u64
    }
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::NotPositive { name: "m" });
    }
    if m > MAX_CHECKPOINT {
        return Err(Error::TooLarge {
            name: "m",
            value: m,
            max: MAX_CHECKPOINT,
        });
    }
    Ok(())
}

/// Number of draws after which fewer than `m` distinct elements has
/// probability at most `epsilon`, whatever the true set size `n >= m`:
/// `ceil(m * ln(m / epsilon))`.
pub fn lemma1_threshold(m: u64, epsilon: f64) -> Result<u64> {
    check_m(m)?;
    let eps = FailureTolerance::new(epsilon)?;
    Ok(ceil_m_log(m, 1, eps.get()))
}

/// Threshold of a checkpoint `m` in a schedule of `count` checkpoints:
/// `ceil(m * ln(m * count / epsilon))`.
pub fn split_threshold(m: u64, count: u64, epsilon: f64) -> Result<u64> {
    check_m(m)?;
    if count == 0 {
        return Err(Error::NotPositive { name: "M" });
    }
    let eps = FailureTolerance::new(epsilon)?;
    Ok(ceil_m_log(m, count, eps.get()))
}

/// The strictly increasing checkpoints `[m_1, ..., m_M]` together with the
/// failure tolerance. Thresholds are computed once at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSchedule {
    checkpoints: Vec<u64>,
    epsilon: FailureTolerance,
    thresholds: Vec<u64>,
}

impl CheckpointSchedule {
    pub fn new(checkpoints: Vec<u64>, epsilon: FailureTolerance) -> Result<Self> {
        if checkpoints.is_empty() {
            return Err(Error::EmptySchedule);
        }
        for &m in &checkpoints {
            check_m(m)?;
        }
        for (i, w) in checkpoints.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NotIncreasing {
                    index: i + 2,
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        let count = checkpoints.len() as u64;
        let thresholds = checkpoints
            .iter()
            .map(|&m| ceil_m_log(m, count, epsilon.get()))
            .collect();
        Ok(CheckpointSchedule {
            checkpoints,
            epsilon,
            thresholds,
        })
    }

    /// Powers of two `[2^1, ..., 2^max_exp]`.
    pub fn powers_of_two(max_exp: u32, epsilon: FailureTolerance) -> Result<Self> {
        if max_exp == 0 || max_exp > 53 {
            return Err(Error::Config(format!(
                "power-of-two exponent must be in 1..=53, got {max_exp}"
            )));
        }
        Self::new((1..=max_exp).map(|k| 1u64 << k).collect(), epsilon)
    }

    pub fn checkpoints(&self) -> &[u64] {
        &self.checkpoints
    }

    pub fn epsilon(&self) -> FailureTolerance {
        self.epsilon
    }

    /// `M`, the number of checkpoints.
    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn largest(&self) -> u64 {
        *self.checkpoints.last().expect("schedule is non-empty")
    }

    /// All thresholds `L_1 < ... < L_M`, 0-indexed.
    pub fn thresholds(&self) -> &[u64] {
        &self.thresholds
    }

    /// `L_i = ceil(m_i * ln(m_i * M / epsilon))` for the 1-based index `i`.
    pub fn checkpoint_threshold(&self, index: usize) -> Result<u64> {
        if index == 0 || index > self.len() {
            return Err(Error::IndexOutOfRange {
                index,
                len: self.len(),
            });
        }
        Ok(self.thresholds[index - 1])
    }

    /// 1-based index `k` with `m_{k-1} < n <= m_k`, or `None` if `n > m_M`.
    pub fn covering_index(&self, n: u64) -> Option<usize> {
        let pos = self.checkpoints.partition_point(|&m| m < n);
        (pos < self.len()).then_some(pos + 1)
    }

    /// Draw count of a successful improved run on a set of size `n`:
    /// `L_k` for the covering index `k`.
    pub fn success_samples(&self, n: u64) -> Option<u64> {
        self.covering_index(n).map(|k| self.thresholds[k - 1])
    }

    /// Rejects set sizes beyond the last checkpoint.
    pub fn require_covers(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::NotPositive { name: "n" });
        }
        if n > self.largest() {
            return Err(Error::ScheduleTooSmall {
                largest: self.largest(),
                n,
            });
        }
        Ok(())
    }
}

/// `checkpoint_threshold` as a free function, for callers that hold a schedule.
pub fn checkpoint_threshold(schedule: &CheckpointSchedule, index: usize) -> Result<u64> {
    schedule.checkpoint_threshold(index)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eps(e: f64) -> FailureTolerance {
        FailureTolerance::new(e).unwrap()
    }

    #[test]
    fn lemma1_examples() {
        assert_eq!(lemma1_threshold(1, MAX_EPSILON).unwrap(), 1);
        // 50-digit evaluations: 2 ln 200 = 10.5966..., 100 ln 10^4 = 921.034...
        assert_eq!(lemma1_threshold(2, 0.01).unwrap(), 11);
        assert_eq!(lemma1_threshold(100, 0.01).unwrap(), 922);
    }

    #[test]
    fn near_integer_uses_extended_path() {
        // m = 1, epsilon = f64(1/e): ln(1/epsilon) = 1 - 3.4e-17, so the ceiling is 1
        // even though the plain f64 result rounds to exactly 1.0.
        let v = (1.0 / MAX_EPSILON).ln();
        assert!((v - 1.0).abs() < 1e-15);
        assert_eq!(ceil_m_log(1, 1, MAX_EPSILON), 1);
        // epsilon = 1/e^2 nudged: ln(1/eps) just below or above 2.
        let e2 = (-2.0f64).exp();
        let below = f64::from_bits(e2.to_bits() + 4);
        let above = f64::from_bits(e2.to_bits() - 4);
        assert_eq!(ceil_m_log(1, 1, below), 2);
        assert_eq!(ceil_m_log(1, 1, above), 3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            lemma1_threshold(0, 0.1),
            Err(Error::NotPositive { .. })
        ));
        assert!(matches!(lemma1_threshold(3, 0.0), Err(Error::Epsilon(_))));
        assert!(matches!(lemma1_threshold(3, 0.5), Err(Error::Epsilon(_))));
        assert!(matches!(
            lemma1_threshold(3, f64::NAN),
            Err(Error::Epsilon(_))
        ));
        assert!(lemma1_threshold(3, MAX_EPSILON).is_ok());
        assert!(CheckpointSchedule::new(vec![], eps(0.1)).is_err());
        assert!(matches!(
            CheckpointSchedule::new(vec![2, 4, 4], eps(0.1)),
            Err(Error::NotIncreasing { index: 3, .. })
        ));
        assert!(CheckpointSchedule::new(vec![0, 4], eps(0.1)).is_err());
    }

    #[test]
    fn default_schedule_thresholds() {
        let s = CheckpointSchedule::powers_of_two(10, eps(0.01)).unwrap();
        assert_eq!(s.checkpoint_threshold(1).unwrap(), 16);
        assert_eq!(s.checkpoint_threshold(6).unwrap(), 709);
        // 1024 ln(1024000) = 14171.3685...
        assert_eq!(s.checkpoint_threshold(10).unwrap(), 14172);
        assert_eq!(
            s.thresholds(),
            &[16, 34, 72, 155, 332, 709, 1506, 3188, 6731, 14172]
        );
        assert!(matches!(
            s.checkpoint_threshold(0),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(s.checkpoint_threshold(11).is_err());
    }

    #[test]
    fn covering_index_edges() {
        let s = CheckpointSchedule::powers_of_two(10, eps(0.01)).unwrap();
        assert_eq!(s.covering_index(1), Some(1));
        assert_eq!(s.covering_index(2), Some(1));
        assert_eq!(s.covering_index(3), Some(2));
        assert_eq!(s.covering_index(50), Some(6));
        assert_eq!(s.covering_index(1024), Some(10));
        assert_eq!(s.covering_index(1025), None);
        assert_eq!(s.success_samples(50), Some(709));
        assert!(s.require_covers(1025).is_err());
    }

    #[test]
    fn threshold_at_least_m_on_grid() {
        for &e in &[MAX_EPSILON, 0.1, 0.01, 1e-6] {
            for m in 1..=10_000u64 {
                assert!(lemma1_threshold(m, e).unwrap() >= m, "m={m} eps={e}");
            }
        }
    }

    #[test]
    fn single_checkpoint_reduces_to_lemma1() {
        for m in [1u64, 2, 7, 100, 4096] {
            for e in [MAX_EPSILON, 0.05, 0.01] {
                let s = CheckpointSchedule::new(vec![m], eps(e)).unwrap();
                assert_eq!(
                    s.checkpoint_threshold(1).unwrap(),
                    lemma1_threshold(m, e).unwrap()
                );
            }
        }
    }

    proptest! {
        #[test]
        fn schedule_thresholds_match_split_budget(
            mut ms in proptest::collection::btree_set(1u64..100_000, 1..20),
            e in 1e-6f64..MAX_EPSILON,
        ) {
            let ms: Vec<u64> = std::mem::take(&mut ms).into_iter().collect();
            let s = CheckpointSchedule::new(ms.clone(), eps(e)).unwrap();
            let split = e / ms.len() as f64;
            for (i, &m) in ms.iter().enumerate() {
                prop_assert_eq!(
                    s.checkpoint_threshold(i + 1).unwrap(),
                    lemma1_threshold(m, split).unwrap()
                );
            }
            prop_assert!(s.thresholds().windows(2).all(|w| w[0] < w[1]));
        }
    }
}
