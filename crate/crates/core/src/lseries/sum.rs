use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::cache::{ApBatch, ApOracle, CoefficientCache};
use super::LSeriesError;
use crate::arith::{pi, BigReal, Precision};
use crate::curves::IsogenyClass;
use crate::sha::sha_raw;

/// Weights are recomputed from `exp` at every multiple of this.
pub const BLOCK: u64 = 1 << 16;
/// Number of step values the stopping rule looks at.
pub const WINDOW: usize = 20;
pub const DEFAULT_STEP: u64 = 10_000_000;
/// Default `K` of the tail model.
pub const DEFAULT_K: u32 = 4;

/// Fixed-point constants of the sum `2 sum a(n)/n exp(-2 pi n / sqrt N)`.
#[derive(Clone, Debug)]
pub struct SumContext {
    precision: Precision,
    frac_bits: u32,
    ratio: BigInt,
    rate: BigReal,
}

impl SumContext {
    pub fn new(conductor: &BigInt, precision: Precision) -> Result<Self, LSeriesError> {
        let work = precision.widened(12);
        let sqrt_n = BigReal::from_integer(conductor.clone(), work).sqrt()?;
        let rate = &pi(work).mul_int(2) / &sqrt_n;
        let frac_bits = precision.bits() + 32;
        let ratio = (-&rate).exp().mul_pow2(frac_bits as i64).round();
        Ok(SumContext {
            precision,
            frac_bits,
            ratio,
            rate,
        })
    }

    pub fn for_class(class: &IsogenyClass, precision: Precision) -> Result<Self, LSeriesError> {
        Self::new(class.conductor_value(), precision)
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// `exp(-2 pi n0 / sqrt N)` in fixed point.
    fn restart_weight(&self, n0: u64) -> BigInt {
        if n0 == 0 {
            return BigInt::from(1) << self.frac_bits;
        }
        let arg = &self.rate * &BigReal::from_integer(n0, self.rate.precision());
        (-&arg).exp().mul_pow2(self.frac_bits as i64).round()
    }

    fn next_weight(&self, w: &BigInt) -> BigInt {
        (w * &self.ratio) >> self.frac_bits
    }

    /// `2 S 2^-bits`.
    pub fn to_l(&self, sum: &BigInt) -> BigReal {
        BigReal::from_parts(
            sum.clone(),
            1 - self.frac_bits as i64,
            self.precision.widened(4),
        )
    }
}

/// One progress record per step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressRecord {
    pub n: u64,
    pub l: BigReal,
}

/// A resumable evaluation of the truncated sum for one class.
#[derive(Clone, Debug)]
pub struct LSeriesJob {
    pub(crate) class_hash: String,
    pub(crate) precision: Precision,
    pub(crate) step: u64,
    pub(crate) n_current: u64,
    pub(crate) sum: BigInt,
    pub(crate) window: VecDeque<(u64, BigInt)>,
    cursor: Option<(u64, BigInt)>,
}

impl PartialEq for LSeriesJob {
    fn eq(&self, other: &Self) -> bool {
        self.class_hash == other.class_hash
            && self.precision == other.precision
            && self.step == other.step
            && self.n_current == other.n_current
            && self.sum == other.sum
            && self.window == other.window
    }
}

impl LSeriesJob {
    pub fn new(class: &IsogenyClass, step: u64, precision: Precision) -> Self {
        Self::for_hash(class.hash(), step, precision)
    }

    /// A fresh job keyed by an arbitrary identity.
    pub fn for_hash(class_hash: String, step: u64, precision: Precision) -> Self {
        Self::from_parts(
            class_hash,
            precision,
            step,
            0,
            BigInt::zero(),
            VecDeque::new(),
        )
    }

    pub(crate) fn from_parts(
        class_hash: String,
        precision: Precision,
        step: u64,
        n_current: u64,
        sum: BigInt,
        window: VecDeque<(u64, BigInt)>,
    ) -> Self {
        assert!(step > 0, "step must be positive");
        LSeriesJob {
            class_hash,
            precision,
            step,
            n_current,
            sum,
            window,
            cursor: None,
        }
    }

    pub fn class_hash(&self) -> &str {
        &self.class_hash
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Terms `n <= n_current` are in the sum.
    pub fn n_current(&self) -> u64 {
        self.n_current
    }

    /// The fixed-point accumulator `S` with `L = 2 S 2^-bits`.
    pub fn raw_sum(&self) -> &BigInt {
        &self.sum
    }

    pub fn partial_l(&self, ctx: &SumContext) -> BigReal {
        ctx.to_l(&self.sum)
    }

    /// Partial values at the last (at most 20) step boundaries.
    pub fn window(&self, ctx: &SumContext) -> Vec<ProgressRecord> {
        self.window
            .iter()
            .map(|(n, s)| ProgressRecord {
                n: *n,
                l: ctx.to_l(s),
            })
            .collect()
    }

    pub fn check_class(&self, class: &IsogenyClass) -> Result<(), LSeriesError> {
        let hash = class.hash();
        if hash != self.class_hash {
            return Err(LSeriesError::ClassMismatch {
                expected: hash,
                found: self.class_hash.clone(),
            });
        }
        Ok(())
    }

    /// Adds the terms `n_current < n <= target`, returning a record for every
    /// step boundary crossed.
    pub fn advance_to(
        &mut self,
        target: u64,
        ctx: &SumContext,
        cache: &mut CoefficientCache,
        oracle: &ApOracle,
        batch: &dyn ApBatch,
    ) -> Result<Vec<ProgressRecord>, LSeriesError> {
        let mut records = Vec::new();
        while self.n_current < target {
            let lo = self.n_current + 1;
            let segment = lo / BLOCK;
            let next_step = (self.n_current / self.step + 1) * self.step;
            let last = target.min(next_step).min((segment + 1) * BLOCK - 1);
            let coefficients = cache.block(lo, last + 1, oracle, batch)?;
            let mut w = match self.cursor.take() {
                Some((n, w)) if n == self.n_current && n / BLOCK == segment => w,
                _ => {
                    let start = segment * BLOCK;
                    let mut w = ctx.restart_weight(start);
                    for _ in start..self.n_current.max(start) {
                        w = ctx.next_weight(&w);
                    }
                    w
                }
            };
            if lo != segment * BLOCK {
                w = ctx.next_weight(&w);
            }
            for (i, &a) in coefficients.iter().enumerate() {
                let n = lo + i as u64;
                if i > 0 {
                    w = ctx.next_weight(&w);
                }
                if a != 0 {
                    self.sum += (&w * a) / n;
                }
            }
            self.n_current = last;
            self.cursor = Some((last, w));
            if last % self.step == 0 {
                self.window.push_back((last, self.sum.clone()));
                while self.window.len() > WINDOW {
                    self.window.pop_front();
                }
                records.push(ProgressRecord {
                    n: last,
                    l: ctx.to_l(&self.sum),
                });
            }
        }
        Ok(records)
    }

    /// Advances to the next multiple of `step`.
    pub fn run_step(
        &mut self,
        ctx: &SumContext,
        cache: &mut CoefficientCache,
        oracle: &ApOracle,
        batch: &dyn ApBatch,
    ) -> Result<ProgressRecord, LSeriesError> {
        let target = (self.n_current / self.step + 1) * self.step;
        let mut records = self.advance_to(target, ctx, cache, oracle, batch)?;
        Ok(records.pop().expect("step boundary reached"))
    }
}

/// `2 sum_{n <= m} a(n)/n exp(-2 pi n / sqrt N)` from scratch.
pub fn evaluate_l(
    class: &IsogenyClass,
    m: u64,
    precision: Precision,
    cache: &mut CoefficientCache,
    oracle: &ApOracle,
    batch: &dyn ApBatch,
) -> Result<BigReal, LSeriesError> {
    let ctx = SumContext::for_class(class, precision)?;
    let mut job = LSeriesJob::new(class, m.max(1), precision);
    job.advance_to(m, &ctx, cache, oracle, batch)?;
    Ok(job.partial_l(&ctx).with_precision(precision))
}

/// Outcome of the stopping rule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StopCheck {
    pub converged: bool,
    /// Nearest integer to the latest `sqrt|Sha|/2^t`.
    pub root: BigInt,
    /// Converged on zero: the central value vanishes numerically.
    pub rank_suspect: bool,
    /// `sqrt|Sha|/2^t` for each record in the window.
    pub values: Vec<BigReal>,
}

/// `sign(L) sqrt(|Sha(L)|) / 2^t` at the minimal `C_k`.
pub fn root_estimate(l: &BigReal, class: &IsogenyClass) -> BigReal {
    let raw = sha_raw(l, class, class.k_star());
    let root = raw.abs().sqrt().expect("nonnegative");
    let root = root.mul_pow2(-(class.t() as i64));
    if raw.is_negative() {
        -root
    } else {
        root
    }
}

/// The rule itself: the last 20 values lie within 1/20 of one integer.
/// Returns that integer (or the nearest one to the latest value).
pub fn stopping_rule(roots: &[BigReal]) -> (bool, BigInt) {
    let Some(last) = roots.last() else {
        return (false, BigInt::zero());
    };
    let root = last.round();
    let p = last.precision();
    let twentieth = BigReal::from_ratio(1, 20, p);
    let target = BigReal::from_integer(root.clone(), p);
    let converged = roots.len() >= WINDOW
        && roots[roots.len() - WINDOW..]
            .iter()
            .all(|v| (v - &target).abs() < twentieth);
    (converged, root)
}

/// Applies the stopping rule to `sqrt|Sha|/2^t` computed from partial `L` values.
pub fn stopping_check_values(values: &[BigReal], class: &IsogenyClass) -> StopCheck {
    let roots: Vec<BigReal> = values.iter().map(|l| root_estimate(l, class)).collect();
    let (converged, root) = stopping_rule(&roots);
    let rank_suspect = converged && root.is_zero();
    StopCheck {
        converged,
        root,
        rank_suspect,
        values: roots,
    }
}

pub fn stopping_check(job: &LSeriesJob, ctx: &SumContext, class: &IsogenyClass) -> StopCheck {
    let values: Vec<BigReal> = job.window(ctx).into_iter().map(|r| r.l).collect();
    stopping_check_values(&values, class)
}

/// `m = (|Sha| / (2 pi G)) log(K sqrt|Sha| / (2^t L))`, rounded up.
pub fn truncation_bound(
    sha: &BigReal,
    g: &BigReal,
    l: &BigReal,
    t: u32,
    k: &BigReal,
) -> Result<u64, LSeriesError> {
    let p = sha.precision().max(g.precision()).max(l.precision());
    let arg = &(k * &sha.sqrt()?) / &l.mul_pow2(t as i64);
    if arg <= BigReal::one(p) {
        return Err(LSeriesError::DegenerateBound);
    }
    let m = &(sha / &(&pi(p).mul_int(2) * g)) * &arg.ln()?;
    let m: BigInt = m.floor() + 1u32;
    m.to_u64().ok_or(LSeriesError::DegenerateBound)
}

/// `K exp(-2 pi m / sqrt N)`.
pub fn tail_bound(m: u64, conductor: &BigInt, k: &BigReal) -> Result<BigReal, LSeriesError> {
    let p = k.precision();
    let sqrt_n = BigReal::from_integer(conductor.clone(), p).sqrt()?;
    let arg = &(&pi(p).mul_int(2) * &BigReal::from_integer(m, p)) / &sqrt_n;
    Ok(k * &(-arg).exp())
}
