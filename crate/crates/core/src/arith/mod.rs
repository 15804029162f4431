//! Exact integers, factorizations and deterministic multiprecision reals.

mod factor;
mod factored;
pub mod primes;
mod real;

use num_bigint::BigUint;

pub use factor::{factorize, FactorBudget, IterationBudget, TRIAL_LIMIT};
pub use factored::{is_square_free_u64, parse_factored, FactoredInteger};
pub use real::{agm, ln2, pi, sum_in_order, AgmResult, BigReal, Precision};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("zero has no factorization")]
    Zero,
    #[error("factor with zero exponent")]
    ZeroExponent,
    #[error("prime {0} listed twice")]
    RepeatedPrime(BigUint),
    #[error("factors are not in ascending order")]
    UnorderedFactors,
    #[error("{0} is not prime")]
    NotPrime(BigUint),
    #[error("malformed input: {0}")]
    Malformed(alloc::string::String),
    #[error("factorization budget exhausted on cofactor {0}")]
    BudgetExhausted(BigUint),
    #[error("{0}")]
    Domain(&'static str),
    #[error("value not exactly representable")]
    Inexact,
    #[error("iteration did not converge")]
    NoConvergence,
}
