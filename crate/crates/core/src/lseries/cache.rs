use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::ap::{ap_bsgs_cubic, ap_enumerate, ap_naive_cubic, ReducedCubic, AP_NAIVE_LIMIT};
use super::LSeriesError;
use crate::arith::primes::{factor_u64, isqrt_u64, primes_up_to};
use crate::curves::{IsogenyClass, WeierstrassCurve};

/// Everything needed to produce `a(p)` for any prime `p` of the class.
#[derive(Clone, Debug)]
pub struct ApOracle {
    model: WeierstrassCurve,
    bad: BTreeMap<u64, i32>,
    minimal_at: BTreeMap<u64, WeierstrassCurve>,
    naive_limit: u64,
}

impl ApOracle {
    pub fn new(
        model: WeierstrassCurve,
        bad: &[(BigInt, i32)],
        minimal_at: &[(BigInt, WeierstrassCurve)],
    ) -> Self {
        ApOracle {
            model,
            bad: bad
                .iter()
                .filter_map(|(p, a)| Some((p.to_u64()?, *a)))
                .collect(),
            minimal_at: minimal_at
                .iter()
                .filter_map(|(p, e)| Some((p.to_u64()?, e.clone())))
                .collect(),
            naive_limit: AP_NAIVE_LIMIT,
        }
    }

    pub fn from_class(class: &IsogenyClass) -> Self {
        Self::new(
            class.curves()[0].clone(),
            &class.bad_primes(),
            &class.good_primes_needing_minimal_model(),
        )
    }

    /// Overrides the naive/BSGS crossover.
    pub fn with_naive_limit(mut self, limit: u64) -> Self {
        self.naive_limit = limit;
        self
    }

    pub fn bad_ap(&self, p: u64) -> Option<i32> {
        self.bad.get(&p).copied()
    }

    /// Primes `l < 2^64` with `l^2 | N`.
    pub fn bad_prime_squares(&self) -> Vec<u64> {
        self.bad
            .iter()
            .filter(|(_, a)| **a == 0)
            .map(|(p, _)| *p)
            .collect()
    }

    /// `a(p)` for a prime `p`.
    pub fn ap(&self, p: u64) -> i64 {
        if let Some(a) = self.bad_ap(p) {
            return a as i64;
        }
        let curve = self.minimal_at.get(&p).unwrap_or(&self.model);
        if p == 2 {
            return ap_enumerate(curve, 2).expect("good at 2");
        }
        let cubic = ReducedCubic::from_curve(curve, p);
        if p < self.naive_limit {
            ap_naive_cubic(&cubic)
        } else {
            ap_bsgs_cubic(&cubic)
        }
    }

    /// `a(p^k)` from `a(p)`.
    pub fn prime_power(&self, p: u64, k: u32, ap: i64) -> Result<i64, LSeriesError> {
        let overflow = || LSeriesError::CoefficientOverflow(p);
        if self.bad.contains_key(&p) {
            return Ok(ap.pow(k));
        }
        let (mut prev, mut cur) = (1i64, ap);
        if k == 0 {
            return Ok(1);
        }
        for _ in 1..k {
            let pp = (p as i64).checked_mul(prev).ok_or_else(overflow)?;
            let next = cur
                .checked_mul(ap)
                .and_then(|v| v.checked_sub(pp))
                .ok_or_else(overflow)?;
            prev = cur;
            cur = next;
        }
        Ok(cur)
    }
}

/// Source of `a(p)` for a batch of primes; the std crate supplies a parallel
/// implementation.
pub trait ApBatch {
    fn ap_many(&self, oracle: &ApOracle, primes: &[u64]) -> Vec<i64>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl ApBatch for Sequential {
    fn ap_many(&self, oracle: &ApOracle, primes: &[u64]) -> Vec<i64> {
        primes.iter().map(|&p| oracle.ap(p)).collect()
    }
}

/// Table of `a(n)` for `n < limit`, filled in ascending blocks.
#[derive(Clone, Debug)]
pub struct CoefficientCache {
    limit: u64,
    table: Vec<i32>,
    small_primes: Vec<u64>,
    small_ap: Vec<i64>,
    bad_prime_squares: Vec<u64>,
}

pub const DEFAULT_CACHE_LIMIT: u64 = 100_000_000;

impl CoefficientCache {
    pub fn new(limit: u64, oracle: &ApOracle) -> Self {
        CoefficientCache {
            limit,
            table: vec![0],
            small_primes: Vec::new(),
            small_ap: Vec::new(),
            bad_prime_squares: oracle.bad_prime_squares(),
        }
    }

    /// Limit chosen so that the table fits in `bytes`.
    pub fn with_memory_budget(bytes: u64, oracle: &ApOracle) -> Self {
        Self::new((bytes / 4).max(1), oracle)
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `a(n)` is cached for `1 <= n < filled()`.
    pub fn filled(&self) -> u64 {
        self.table.len() as u64
    }

    pub fn bad_prime_squares(&self) -> &[u64] {
        &self.bad_prime_squares
    }

    pub fn get(&self, n: u64) -> Option<i64> {
        (n >= 1 && n < self.filled()).then(|| self.table[n as usize] as i64)
    }

    fn ensure_small_primes(&mut self, bound: u64, oracle: &ApOracle, batch: &dyn ApBatch) {
        let have = self.small_primes.last().copied().unwrap_or(1);
        if have >= bound {
            return;
        }
        let target = bound.max(have * 2).max(1024);
        let fresh: Vec<u64> = primes_up_to(target)
            .into_iter()
            .filter(|&p| p > have)
            .collect();
        let mut values = Vec::with_capacity(fresh.len());
        let mut missing = Vec::new();
        for &p in &fresh {
            match self.get(p) {
                Some(a) => values.push(Some(a)),
                None => {
                    values.push(None);
                    missing.push(p);
                }
            }
        }
        let mut computed = batch.ap_many(oracle, &missing).into_iter();
        for v in values {
            self.small_ap
                .push(v.unwrap_or_else(|| computed.next().expect("batch size")));
        }
        self.small_primes.extend(fresh);
    }

    /// `a(n)` for `lo <= n < hi`. The block is stored when it continues the
    /// table and stays below the limit.
    pub fn block(
        &mut self,
        lo: u64,
        hi: u64,
        oracle: &ApOracle,
        batch: &dyn ApBatch,
    ) -> Result<Vec<i64>, LSeriesError> {
        assert!(lo >= 1 && lo <= hi);
        if hi <= self.filled() {
            return Ok(self.table[lo as usize..hi as usize]
                .iter()
                .map(|&v| v as i64)
                .collect());
        }
        let len = (hi - lo) as usize;
        let root = isqrt_u64(hi - 1);
        self.ensure_small_primes(root, oracle, batch);
        let mut rem: Vec<u64> = (lo..hi).collect();
        let mut val = vec![1i64; len];
        let mut powers: Vec<i64> = Vec::new();
        for (i, &p) in self.small_primes.iter().enumerate() {
            if p > root {
                break;
            }
            let ap = self.small_ap[i];
            powers.clear();
            powers.push(1);
            let mut n = lo.div_ceil(p) * p;
            while n < hi {
                let idx = (n - lo) as usize;
                let mut k = 0u32;
                while rem[idx] % p == 0 {
                    rem[idx] /= p;
                    k += 1;
                }
                while powers.len() <= k as usize {
                    let next = oracle.prime_power(p, powers.len() as u32, ap)?;
                    powers.push(next);
                }
                val[idx] = val[idx]
                    .checked_mul(powers[k as usize])
                    .ok_or(LSeriesError::CoefficientOverflow(n))?;
                n += p;
            }
        }
        // remaining cofactors are 1 or a single prime above sqrt(hi)
        let mut wanted: Vec<u64> = rem
            .iter()
            .copied()
            .filter(|&r| r > 1 && self.get(r).is_none())
            .collect();
        wanted.sort_unstable();
        wanted.dedup();
        let fresh = batch.ap_many(oracle, &wanted);
        for idx in 0..len {
            let r = rem[idx];
            if r == 1 {
                continue;
            }
            let ap = match self.get(r) {
                Some(a) => a,
                None => fresh[wanted.binary_search(&r).expect("requested")],
            };
            val[idx] = val[idx]
                .checked_mul(ap)
                .ok_or(LSeriesError::CoefficientOverflow(lo + idx as u64))?;
        }
        if lo == self.filled() && lo < self.limit {
            let keep = (hi.min(self.limit) - lo) as usize;
            self.table.reserve(keep);
            for (i, &v) in val[..keep].iter().enumerate() {
                let v = i32::try_from(v)
                    .map_err(|_| LSeriesError::CoefficientOverflow(lo + i as u64))?;
                self.table.push(v);
            }
        }
        Ok(val)
    }

    /// Fills the table up to `min(n, limit)`.
    pub fn fill_to(
        &mut self,
        n: u64,
        oracle: &ApOracle,
        batch: &dyn ApBatch,
    ) -> Result<(), LSeriesError> {
        let target = n.min(self.limit);
        while self.filled() < target {
            let lo = self.filled();
            let hi = (lo + super::BLOCK).min(target);
            self.block(lo, hi, oracle, batch)?;
        }
        Ok(())
    }

    /// `a(n)` by factoring `n`, using cached values where present.
    pub fn extend_an(&self, n: u64, oracle: &ApOracle) -> Result<i64, LSeriesError> {
        if let Some(v) = self.get(n) {
            return Ok(v);
        }
        let mut acc = 1i64;
        for (p, k) in factor_u64(n) {
            let ap = match self.get(p) {
                Some(a) => a,
                None => oracle.ap(p),
            };
            acc = acc
                .checked_mul(oracle.prime_power(p, k, ap)?)
                .ok_or(LSeriesError::CoefficientOverflow(n))?;
        }
        Ok(acc)
    }
}
