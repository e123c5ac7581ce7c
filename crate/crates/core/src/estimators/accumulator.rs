//! Streaming power sums with batch partials for batch-means errors.

use serde::{Deserialize, Serialize};

pub const MAX_ORDER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PowerSums {
    pub count: u64,
    /// `sums[k]` holds `Σ x^{k+1}`.
    pub sums: [f64; MAX_ORDER],
}

impl PowerSums {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let mut p = x;
        for s in self.sums.iter_mut() {
            *s += p;
            p *= x;
        }
    }

    pub fn add(&mut self, other: &PowerSums) {
        self.count += other.count;
        for (a, b) in self.sums.iter_mut().zip(&other.sums) {
            *a += b;
        }
    }

    pub fn sub(&self, other: &PowerSums) -> PowerSums {
        let mut out = *self;
        out.count -= other.count;
        for (a, b) in out.sums.iter_mut().zip(&other.sums) {
            *a -= b;
        }
        out
    }

    /// Raw moment `E[x^k]`, `1 ≤ k ≤ 8`.
    pub fn raw(&self, k: usize) -> f64 {
        self.sums[k - 1] / self.count as f64
    }
}

/// Power sums of a scalar observable up to order 8, plus per-batch partial
/// sums over consecutive blocks of `batch_len` observations.
///
/// Merging concatenates the batch lists (a trailing partial batch stays a
/// separate, partial entry), so it is associative; batch-means statistics
/// only use complete batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentAccumulator {
    batch_len: usize,
    total: PowerSums,
    batches: Vec<PowerSums>,
}

impl MomentAccumulator {
    pub fn new(batch_len: usize) -> Self {
        MomentAccumulator { batch_len: batch_len.max(1), total: PowerSums::default(), batches: Vec::new() }
    }

    /// Accumulator over a complete series split into `n_batches` batches.
    pub fn from_samples(samples: &[f64], n_batches: usize) -> Self {
        let mut acc = MomentAccumulator::new(samples.len() / n_batches.max(1));
        samples.iter().for_each(|&x| acc.push(x));
        acc
    }

    pub fn push(&mut self, x: f64) {
        self.total.push(x);
        match self.batches.last_mut() {
            Some(b) if (b.count as usize) < self.batch_len => b.push(x),
            _ => {
                let mut b = PowerSums::default();
                b.push(x);
                self.batches.push(b);
            }
        }
    }

    pub fn merge(&mut self, other: &MomentAccumulator) {
        assert_eq!(self.batch_len, other.batch_len, "merging accumulators with different batch lengths");
        self.total.add(&other.total);
        self.batches.extend_from_slice(&other.batches);
    }

    pub fn count(&self) -> u64 {
        self.total.count
    }

    pub fn batch_len(&self) -> usize {
        self.batch_len
    }

    pub fn total(&self) -> &PowerSums {
        &self.total
    }

    pub fn full_batches(&self) -> impl Iterator<Item = &PowerSums> {
        let len = self.batch_len as u64;
        self.batches.iter().filter(move |b| b.count == len)
    }

    pub fn full_batch_count(&self) -> usize {
        self.full_batches().count()
    }

    pub fn all_batches(&self) -> &[PowerSums] {
        &self.batches
    }

    pub fn mean(&self) -> f64 {
        self.total.raw(1)
    }
}
