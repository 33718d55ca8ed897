//! Element sources for the enumeration drivers.

use std::convert::Infallible;
use std::hash::Hash;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A source of elements. Elements are opaque tokens compared by equality.
pub trait Sampler {
    type Item: Eq + Hash + Clone;
    type Error;

    fn draw(&mut self) -> Result<Self::Item, Self::Error>;
}

impl<S: Sampler + ?Sized> Sampler for &mut S {
    type Item = S::Item;
    type Error = S::Error;

    fn draw(&mut self) -> Result<Self::Item, Self::Error> {
        (**self).draw()
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`. Depends only on the pair, so trials
/// can run in any order or on any worker.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Uniform sampler over `{0, ..., n-1}` driven by ChaCha8 seeded from a `u64`.
#[derive(Debug, Clone)]
pub struct UniformSampler {
    n: u32,
    rng: ChaCha8Rng,
}

impl UniformSampler {
    pub fn new(n: u32, seed: u64) -> Self {
        assert!(n >= 1, "uniform sampler needs n >= 1");
        UniformSampler {
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }
}

impl Sampler for UniformSampler {
    type Item = u32;
    type Error = Infallible;

    fn draw(&mut self) -> Result<u32, Infallible> {
        Ok(self.rng.random_range(0..self.n))
    }
}

/// Counts the draws of the wrapped sampler.
#[derive(Debug, Clone)]
pub struct CountingSampler<S> {
    inner: S,
    calls: u64,
}

impl<S> CountingSampler<S> {
    pub fn new(inner: S) -> Self {
        CountingSampler { inner, calls: 0 }
    }

    pub fn calls(&self) -> u64 {
        self.calls
    }

    pub fn into_inner(self) -> S {
        self.inner
    }
}

impl<S: Sampler> Sampler for CountingSampler<S> {
    type Item = S::Item;
    type Error = S::Error;

    fn draw(&mut self) -> Result<S::Item, S::Error> {
        self.calls += 1;
        self.inner.draw()
    }
}

/// Records every element drawn from the wrapped sampler.
#[derive(Debug, Clone)]
pub struct RecordingSampler<S: Sampler> {
    inner: S,
    log: Vec<S::Item>,
}

impl<S: Sampler> RecordingSampler<S> {
    pub fn new(inner: S) -> Self {
        RecordingSampler {
            inner,
            log: Vec::new(),
        }
    }

    pub fn into_log(self) -> Vec<S::Item> {
        self.log
    }
}

impl<S: Sampler> Sampler for RecordingSampler<S> {
    type Item = S::Item;
    type Error = S::Error;

    fn draw(&mut self) -> Result<S::Item, S::Error> {
        let x = self.inner.draw()?;
        self.log.push(x.clone());
        Ok(x)
    }
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("token stream ended after {read} tokens")]
    Exhausted { read: u64 },

    #[error("malformed token at line {line}: empty token")]
    EmptyToken { line: u64 },

    #[error("read error at line {line}: {source}")]
    Io {
        line: u64,
        #[source]
        source: std::io::Error,
    },
}

/// Newline-delimited token stream. A token is any non-empty byte sequence
/// without `\n`; tokens compare as exact bytes.
#[derive(Debug)]
pub struct LineStream<R> {
    reader: R,
    line: u64,
    buf: Vec<u8>,
}

impl<R: BufRead> LineStream<R> {
    pub fn new(reader: R) -> Self {
        LineStream {
            reader,
            line: 0,
            buf: Vec::new(),
        }
    }

    /// Number of lines consumed so far.
    pub fn position(&self) -> u64 {
        self.line
    }
}

impl<R: BufRead> Sampler for LineStream<R> {
    type Item = Vec<u8>;
    type Error = StreamError;

    fn draw(&mut self) -> Result<Vec<u8>, StreamError> {
        self.buf.clear();
        let read = self
            .reader
            .read_until(b'\n', &mut self.buf)
            .map_err(|source| StreamError::Io {
                line: self.line + 1,
                source,
            })?;
        if read == 0 {
            return Err(StreamError::Exhausted { read: self.line });
        }
        self.line += 1;
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        if self.buf.is_empty() {
            return Err(StreamError::EmptyToken { line: self.line });
        }
        Ok(self.buf.clone())
    }
}

/// Replays a recorded sequence; ends with `StreamError::Exhausted`.
#[derive(Debug, Clone)]
pub struct ReplaySampler<T> {
    items: std::vec::IntoIter<T>,
    read: u64,
}

impl<T> ReplaySampler<T> {
    pub fn new(items: Vec<T>) -> Self {
        ReplaySampler {
            items: items.into_iter(),
            read: 0,
        }
    }
}

impl<T: Eq + Hash + Clone> Sampler for ReplaySampler<T> {
    type Item = T;
    type Error = StreamError;

    fn draw(&mut self) -> Result<T, StreamError> {
        match self.items.next() {
            Some(x) => {
                self.read += 1;
                Ok(x)
            }
            None => Err(StreamError::Exhausted { read: self.read }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = UniformSampler::new(17, 42);
        let mut b = UniformSampler::new(17, 42);
        let mut c = UniformSampler::new(17, 43);
        let xs: Vec<u32> = (0..100).map(|_| a.draw().unwrap()).collect();
        let ys: Vec<u32> = (0..100).map(|_| b.draw().unwrap()).collect();
        let zs: Vec<u32> = (0..100).map(|_| c.draw().unwrap()).collect();
        assert_eq!(xs, ys);
        assert_ne!(xs, zs);
        assert!(xs.iter().all(|&x| x < 17));
    }

    #[test]
    fn uniform_passes_chi_square() {
        // 20 cells, 200k draws; 19 d.o.f. critical value at 0.001 is 43.82.
        let n = 20u32;
        let draws = 200_000;
        let mut s = UniformSampler::new(n, 7);
        let mut counts = vec![0u64; n as usize];
        for _ in 0..draws {
            counts[s.draw().unwrap() as usize] += 1;
        }
        let expected = draws as f64 / n as f64;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 43.82, "chi2 = {chi2}");
    }

    #[test]
    fn trial_seeds_are_distinct() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..10_000 {
            assert!(seen.insert(trial_seed(1, i)));
        }
        assert_ne!(trial_seed(1, 0), trial_seed(2, 0));
    }

    #[test]
    fn counting_wrapper_counts() {
        let mut s = CountingSampler::new(UniformSampler::new(3, 0));
        for _ in 0..5 {
            s.draw().unwrap();
        }
        assert_eq!(s.calls(), 5);
    }

    #[test]
    fn line_stream_tokens() {
        let data: &[u8] = b"a\nbb\n\xff\nc";
        let mut s = LineStream::new(data);
        assert_eq!(s.draw().unwrap(), b"a");
        assert_eq!(s.draw().unwrap(), b"bb");
        assert_eq!(s.draw().unwrap(), b"\xff");
        assert_eq!(s.draw().unwrap(), b"c");
        assert!(matches!(s.draw(), Err(StreamError::Exhausted { read: 4 })));
    }

    #[test]
    fn line_stream_rejects_empty_token() {
        let data: &[u8] = b"a\n\nb\n";
        let mut s = LineStream::new(data);
        s.draw().unwrap();
        assert!(matches!(s.draw(), Err(StreamError::EmptyToken { line: 2 })));
    }
}
