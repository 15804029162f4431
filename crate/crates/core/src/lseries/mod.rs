//! Dirichlet coefficients `a(n)` by point counting and the truncated central
//! value `L = 2 sum_{n <= m} a(n)/n exp(-2 pi n / sqrt N)`.
//!
//! Coefficients are produced in blocks (primes first, then multiplicativity)
//! and consumed by a single fixed-point accumulator in ascending `n`, so a
//! job checkpointed and resumed anywhere gives the same bits as an
//! uninterrupted run.

mod ap;
mod cache;
mod checkpoint;
mod sum;

use alloc::string::String;

use num_bigint::BigInt;

use crate::arith::ArithError;

pub use ap::{ap_bsgs, ap_enumerate, ap_naive, bad_prime_ap, ReducedCubic, AP_NAIVE_LIMIT};
pub use cache::{ApBatch, ApOracle, CoefficientCache, Sequential, DEFAULT_CACHE_LIMIT};
pub use checkpoint::{checkpoint_text, parse_checkpoint, CHECKPOINT_VERSION};
pub use sum::{
    evaluate_l, root_estimate, stopping_check, stopping_check_values, stopping_rule, tail_bound,
    truncation_bound, LSeriesJob, ProgressRecord, StopCheck, SumContext, BLOCK, DEFAULT_K,
    DEFAULT_STEP, WINDOW,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LSeriesError {
    #[error("{0} is a bad prime for this model")]
    BadPrime(BigInt),
    #[error("{0} is a good prime")]
    GoodPrime(BigInt),
    #[error("prime {0} is outside the supported range")]
    UnsupportedPrime(u64),
    #[error("coefficient overflow at n = {0}")]
    CoefficientOverflow(u64),
    #[error("checkpoint belongs to class {found}, expected {expected}")]
    ClassMismatch { expected: String, found: String },
    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),
    #[error("truncation bound is degenerate (log argument at most 1)")]
    DegenerateBound,
    #[error(transparent)]
    Arith(#[from] ArithError),
}
