use freysha_core::lseries::{ApBatch, ApOracle};
use rayon::prelude::*;

/// Spreads `a(p)` over the rayon pool; short batches stay on the caller.
#[derive(Clone, Copy, Debug)]
pub struct Parallel {
    pub min_batch: usize,
}

impl Default for Parallel {
    fn default() -> Self {
        Parallel { min_batch: 64 }
    }
}

impl ApBatch for Parallel {
    fn ap_many(&self, oracle: &ApOracle, primes: &[u64]) -> Vec<i64> {
        if primes.len() < self.min_batch {
            return primes.iter().map(|&p| oracle.ap(p)).collect();
        }
        primes
            .par_iter()
            .with_min_len(16)
            .map(|&p| oracle.ap(p))
            .collect()
    }
}
