//! Exact coupon-collector quantities.
//!
//! The distribution of the number `D_t` of distinct elements seen after `t`
//! uniform draws from `n` elements is a pure-birth Markov chain:
//!
//! ```text
//! P(D_{t+1} = i) = P(D_t = i) * i/n + P(D_t = i-1) * (n-i+1)/n
//! ```
//!
//! and `P(T_m > t) = P(D_t < m)`. [`TailTable`] steps that chain in place,
//! so memory is `O(n)` regardless of the horizon.

use crate::error::{Error, Result};
use crate::policy::CheckpointSchedule;

/// Compensated (Kahan-Babuska) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::default();
        for x in iter {
            k.add(x);
        }
        k
    }
}

/// Distribution of the distinct count after `t` draws from a set of size `n`.
#[derive(Debug, Clone)]
pub struct TailTable {
    n: u64,
    t: u64,
    /// `row[i] = P(D_t = i)`, `0 <= i <= n`.
    row: Vec<f64>,
    stay: Vec<f64>,
    move_up: Vec<f64>,
    /// Entries below `lo` are zero.
    lo: usize,
}

impl TailTable {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::NotPositive { name: "n" });
        }
        let len = n as usize + 1;
        let nf = n as f64;
        let mut row = vec![0.0; len];
        row[0] = 1.0;
        Ok(TailTable {
            n,
            t: 0,
            row,
            stay: (0..len).map(|i| i as f64 / nf).collect(),
            move_up: (0..len).map(|i| (n + 1 - i as u64) as f64 / nf).collect(),
            lo: 0,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Number of draws the current row describes.
    pub fn time(&self) -> u64 {
        self.t
    }

    /// `P(D_t = i)` for `i = 0..=n`.
    pub fn row(&self) -> &[f64] {
        &self.row
    }

    /// Advance one draw.
    pub fn step(&mut self) {
        let hi = (self.t as usize + 1).min(self.n as usize);
        let row = &mut self.row;
        for i in (self.lo.max(1)..=hi).rev() {
            let v = row[i] * self.stay[i] + row[i - 1] * self.move_up[i];
            row[i] = if v < f64::MIN_POSITIVE { 0.0 } else { v };
        }
        if self.lo == 0 {
            row[0] = 0.0;
        }
        // Underflowed entries are flushed, so the support's lower end only moves up.
        while self.lo < hi && row[self.lo] == 0.0 {
            self.lo += 1;
        }
        self.t += 1;
    }

    /// Advance to draw count `t`. Rows cannot be rewound.
    pub fn advance_to(&mut self, t: u64) -> Result<()> {
        if t < self.t {
            return Err(Error::Config(format!(
                "tail table is at t = {}, cannot rewind to {t}",
                self.t
            )));
        }
        while self.t < t {
            self.step();
        }
        Ok(())
    }

    /// `P(T_m > t) = P(D_t < m)` at the current `t`.
    pub fn tail(&self, m: u64) -> f64 {
        let end = (m as usize).min(self.row.len());
        self.row[..end]
            .iter()
            .copied()
            .collect::<KahanSum>()
            .value()
    }

    pub fn row_sum(&self) -> f64 {
        self.row.iter().copied().collect::<KahanSum>().value()
    }

    /// Removes the mass with `D < m` and returns it as
    /// `(mass with D < n, mass with D = n)`.
    fn drain_below(&mut self, m: u64) -> (f64, f64) {
        let end = (m as usize).min(self.row.len());
        let mut short = KahanSum::default();
        let mut full = 0.0;
        for (i, p) in self.row[..end].iter_mut().enumerate() {
            if i as u64 == self.n {
                full += *p;
            } else {
                short.add(*p);
            }
            *p = 0.0;
        }
        (short.value(), full)
    }
}

/// Exact `P(T_m > tau | |X| = n)`.
pub fn tail_probability(m: u64, tau: u64, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::NotPositive { name: "m" });
    }
    if m > n {
        return Err(Error::MExceedsN { m, n });
    }
    let mut table = TailTable::new(n)?;
    table.advance_to(tau)?;
    Ok(table.tail(m))
}

/// `E[T_m | |X| = n] = n * sum_{k=n-m+1}^{n} 1/k`, summed smallest term first.
pub fn exact_expected_samples(m: u64, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::NotPositive { name: "m" });
    }
    if m > n {
        return Err(Error::MExceedsN { m, n });
    }
    let harmonic: f64 = ((n - m + 1)..=n).rev().map(|k| 1.0 / k as f64).sum();
    Ok(n as f64 * harmonic)
}

/// Union bound on `P(T_n > tau)`: `n * exp(-tau / n)`.
pub fn lemma2_bound(n: u64, tau: u64) -> f64 {
    let nf = n as f64;
    nf * (-(tau as f64) / nf).exp()
}

/// `ln g_tau(x)` with `g_tau(x) = x^{-tau} * prod_{i=1}^{m} (x - (i-1))`.
pub fn log_g(tau: u64, m: u64, x: f64) -> Result<f64> {
    if m == 0 {
        return Err(Error::NotPositive { name: "m" });
    }
    if x.is_nan() || x < m as f64 {
        return Err(Error::XBelowM { x, m });
    }
    let falling: f64 = (0..m).map(|i| (x - i as f64).ln()).sum();
    Ok(falling - tau as f64 * x.ln())
}

/// `ln C(n, m)` via log-gamma.
pub fn ln_binomial(n: u64, m: u64) -> f64 {
    debug_assert!(m <= n);
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(m as f64 + 1.0) - libm::lgamma((n - m) as f64 + 1.0)
}

/// `ln rho_tau = ln(g_tau(n) / g_tau(m)) = ln C(n, m) + tau * (ln m - ln n)`.
pub fn log_rho(tau: u64, m: u64, n: u64) -> Result<f64> {
    if m == 0 {
        return Err(Error::NotPositive { name: "m" });
    }
    if m > n {
        return Err(Error::MExceedsN { m, n });
    }
    if m == n {
        return Ok(0.0);
    }
    Ok(ln_binomial(n, m) + tau as f64 * ((m as f64).ln() - (n as f64).ln()))
}

/// Exact failure probability of the improved driver on a set of size `n`.
///
/// The distinct-count distribution is carried through the cumulative
/// checkpoint times `L_1 < ... < L_M`. At checkpoint `i` the mass with
/// `D < m_i` leaves the process: as a failure if `D < n`, as a success if
/// `D = n`. Whatever survives the last checkpoint succeeds only with `D = n`.
pub fn exact_failure_probability(n: u64, schedule: &CheckpointSchedule) -> Result<f64> {
    let mut table = TailTable::new(n)?;
    let mut failure = KahanSum::default();
    for (&m, &limit) in schedule.checkpoints().iter().zip(schedule.thresholds()) {
        table.advance_to(limit)?;
        let (short, _full) = table.drain_below(m);
        failure.add(short);
    }
    let (short, _full) = table.drain_below(n + 1);
    failure.add(short);
    Ok(failure.value())
}
