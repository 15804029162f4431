//! Factorization of moderately sized integers.
//!
//! Trial division to 10^6, then Pollard rho with Brent's cycle detection.
//! There is no ECM: inputs are expected to be smooth apart from at most a
//! couple of mid-sized primes, as is the case for abc triples.

use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::primes::{factor_u64, is_prime, primes_up_to};
use super::{ArithError, FactoredInteger};

/// Trial-division bound.
pub const TRIAL_LIMIT: u64 = 1_000_000;

/// Work limit for [`factorize`]. Polled between batches of rho iterations.
pub trait FactorBudget {
    /// Charges `work` units; returns `true` once the budget is spent.
    fn charge(&mut self, work: u64) -> bool;
}

/// Budget counted in modular multiplications.
#[derive(Debug, Clone)]
pub struct IterationBudget {
    remaining: u64,
}

impl IterationBudget {
    pub fn new(iterations: u64) -> Self {
        IterationBudget {
            remaining: iterations,
        }
    }
}

impl Default for IterationBudget {
    fn default() -> Self {
        IterationBudget::new(50_000_000)
    }
}

impl FactorBudget for IterationBudget {
    fn charge(&mut self, work: u64) -> bool {
        self.remaining = self.remaining.saturating_sub(work);
        self.remaining == 0
    }
}

/// Completely factors `n`, or fails with [`ArithError::BudgetExhausted`]
/// carrying the composite cofactor that resisted.
pub fn factorize(n: &BigInt, budget: &mut dyn FactorBudget) -> Result<FactoredInteger, ArithError> {
    if n.is_zero() {
        return Err(ArithError::Zero);
    }
    let negative = n.sign() == num_bigint::Sign::Minus;
    let mut rest = n.magnitude().clone();
    if let Some(small) = rest.to_u64() {
        let f = FactoredInteger::from_u64(small);
        return Ok(if negative { f.negated() } else { f });
    }
    let mut found: Vec<(BigUint, u32)> = Vec::new();
    for p in primes_up_to(TRIAL_LIMIT) {
        if BigUint::from(p * p) > rest {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&BigUint::from(p));
            if !r.is_zero() {
                break;
            }
            rest = q;
            e += 1;
        }
        if e > 0 {
            found.push((BigUint::from(p), e));
        }
    }
    let mut pending = Vec::new();
    if !rest.is_one() {
        pending.push(rest);
    }
    while let Some(m) = pending.pop() {
        if let Some(small) = m.to_u64() {
            found.extend(
                factor_u64(small)
                    .into_iter()
                    .map(|(p, e)| (BigUint::from(p), e)),
            );
            continue;
        }
        if is_prime(&m) {
            found.push((m, 1));
            continue;
        }
        match brent_rho(&m, budget) {
            Some(d) => {
                let other = &m / &d;
                pending.push(d);
                pending.push(other);
            }
            None => return Err(ArithError::BudgetExhausted(m)),
        }
    }
    FactoredInteger::from_unsorted(negative, found)
}

/// One nontrivial divisor of the odd composite `n`, or `None` if the budget
/// runs out first.
fn brent_rho(n: &BigUint, budget: &mut dyn FactorBudget) -> Option<BigUint> {
    const BATCH: u64 = 128;
    let mut c = BigUint::one();
    loop {
        let step = |x: &BigUint| (x * x + &c) % n;
        let mut y = BigUint::from(2u32);
        let mut x = y.clone();
        let mut ys = y.clone();
        let mut q = BigUint::one();
        let mut g = BigUint::one();
        let mut r = 1u64;
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = step(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                let batch = BATCH.min(r - k);
                for _ in 0..batch {
                    y = step(&y);
                    let diff = if x > y { &x - &y } else { &y - &x };
                    q = (q * diff) % n;
                }
                if budget.charge(2 * batch) {
                    return None;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = step(&ys);
                let diff = if x > ys { &x - &ys } else { &ys - &x };
                g = diff.gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return Some(g);
        }
        c += 1u32;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_factored;
    use num_traits::Pow;

    fn big(s: &str) -> FactoredInteger {
        parse_factored(s).unwrap()
    }

    #[test]
    fn example_one_summand() {
        // b = 5^9 139^6 - 44
        let b = big("5^9 139^6").value() - BigInt::from(44);
        let f = factorize(&b, &mut IterationBudget::default()).unwrap();
        assert_eq!(f, big("3^2 13^10 17 151 4423"));
    }

    #[test]
    fn record_triple_summand() {
        let b = big("3^19 11^4 463^5").value() - big("5^4 19^13 103").value();
        let f = factorize(&b, &mut IterationBudget::default()).unwrap();
        assert_eq!(f, big("2^13 13^9 29 2441 7673^2"));
    }

    #[test]
    fn needs_rho() {
        // 3^46 + 29 = 2 * 17216879 * 257390962660901
        let c = BigInt::from(3u32).pow(46u32) + 29;
        let f = factorize(&c, &mut IterationBudget::default()).unwrap();
        assert_eq!(f, big("2 17216879 257390962660901"));
        let f = factorize(&BigInt::from(-72), &mut IterationBudget::default()).unwrap();
        assert_eq!(f, big("-2^3 3^2"));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        // (2^61 - 1)^2: no trial divisor, rho needs ~2^30 steps
        let p = BigUint::from(2_305_843_009_213_693_951u64);
        let n = BigInt::from(&p * &p);
        match factorize(&n, &mut IterationBudget::new(10_000)) {
            Err(ArithError::BudgetExhausted(m)) => assert_eq!(m, &p * &p),
            other => panic!("expected budget exhaustion, got {other:?}"),
        }
        assert!(matches!(
            factorize(&BigInt::zero(), &mut IterationBudget::default()),
            Err(ArithError::Zero)
        ));
    }
}
