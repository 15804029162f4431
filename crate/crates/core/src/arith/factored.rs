//! Integers carried together with their prime factorization.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use super::primes::is_prime;
use super::ArithError;

/// A nonzero integer with its complete factorization.
///
/// Primes are strictly increasing and exponents positive. The cached value
/// always equals `sign * prod(p^e)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FactoredInteger {
    negative: bool,
    factors: Vec<(BigUint, u32)>,
    value: BigInt,
}

impl FactoredInteger {
    pub fn one() -> Self {
        FactoredInteger {
            negative: false,
            factors: Vec::new(),
            value: BigInt::one(),
        }
    }

    /// Builds from explicit factors, certifying every base as prime.
    pub fn from_factors(negative: bool, factors: Vec<(BigUint, u32)>) -> Result<Self, ArithError> {
        for (i, (p, e)) in factors.iter().enumerate() {
            if *e == 0 {
                return Err(ArithError::ZeroExponent);
            }
            if i > 0 && factors[i - 1].0 >= *p {
                return Err(if factors[i - 1].0 == *p {
                    ArithError::RepeatedPrime(p.clone())
                } else {
                    ArithError::UnorderedFactors
                });
            }
            if !is_prime(p) {
                return Err(ArithError::NotPrime(p.clone()));
            }
        }
        Ok(Self::from_certified(negative, factors))
    }

    /// Sorts and merges arbitrary (prime, exponent) pairs, then certifies.
    pub fn from_unsorted(
        negative: bool,
        mut factors: Vec<(BigUint, u32)>,
    ) -> Result<Self, ArithError> {
        factors.retain(|(_, e)| *e > 0);
        factors.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(BigUint, u32)> = Vec::with_capacity(factors.len());
        for (p, e) in factors {
            match merged.last_mut() {
                Some((q, f)) if *q == p => *f += e,
                _ => merged.push((p, e)),
            }
        }
        Self::from_factors(negative, merged)
    }

    /// Skips primality certification; callers guarantee sorted primes.
    pub(crate) fn from_certified(negative: bool, factors: Vec<(BigUint, u32)>) -> Self {
        let mut magnitude = BigUint::one();
        for (p, e) in &factors {
            magnitude *= Pow::pow(p, *e);
        }
        let value =
            BigInt::from_biguint(if negative { Sign::Minus } else { Sign::Plus }, magnitude);
        debug_assert!(factors.windows(2).all(|w| w[0].0 < w[1].0));
        FactoredInteger {
            negative,
            factors,
            value,
        }
    }

    pub fn from_u64(n: u64) -> Self {
        assert!(n != 0, "zero has no factorization");
        let factors = super::primes::factor_u64(n)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect();
        Self::from_certified(false, factors)
    }

    pub fn from_i64(n: i64) -> Self {
        let f = Self::from_u64(n.unsigned_abs());
        if n < 0 {
            f.negated()
        } else {
            f
        }
    }

    pub fn value(&self) -> &BigInt {
        &self.value
    }

    pub fn magnitude(&self) -> BigUint {
        self.value.magnitude().clone()
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn signum(&self) -> i32 {
        if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn factors(&self) -> &[(BigUint, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigUint> {
        self.factors.iter().map(|(p, _)| p)
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.factors.is_empty()
    }

    /// Exponent of `p` (zero when `p` does not divide).
    pub fn valuation(&self, p: &BigUint) -> u32 {
        self.factors
            .binary_search_by(|(q, _)| q.cmp(p))
            .map(|i| self.factors[i].1)
            .unwrap_or(0)
    }

    pub fn is_square_free(&self) -> bool {
        self.factors.iter().all(|(_, e)| *e == 1)
    }

    pub fn abs(&self) -> Self {
        FactoredInteger {
            negative: false,
            factors: self.factors.clone(),
            value: self.value.abs(),
        }
    }

    pub fn negated(&self) -> Self {
        FactoredInteger {
            negative: !self.negative,
            factors: self.factors.clone(),
            value: -&self.value,
        }
    }

    /// Product of the distinct primes.
    pub fn radical(&self) -> Self {
        Self::from_certified(
            false,
            self.factors.iter().map(|(p, _)| (p.clone(), 1)).collect(),
        )
    }

    fn merge_with(&self, other: &Self, combine: impl Fn(u32, u32) -> u32) -> Vec<(BigUint, u32)> {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() || j < b.len() {
            let pick = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => core::cmp::Ordering::Less,
                _ => core::cmp::Ordering::Greater,
            };
            let (p, e) = match pick {
                core::cmp::Ordering::Less => {
                    i += 1;
                    (a[i - 1].0.clone(), combine(a[i - 1].1, 0))
                }
                core::cmp::Ordering::Greater => {
                    j += 1;
                    (b[j - 1].0.clone(), combine(0, b[j - 1].1))
                }
                core::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                    (a[i - 1].0.clone(), combine(a[i - 1].1, b[j - 1].1))
                }
            };
            if e > 0 {
                out.push((p, e));
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_certified(
            self.negative != other.negative,
            self.merge_with(other, |x, y| x + y),
        )
    }

    pub fn gcd(&self, other: &Self) -> Self {
        Self::from_certified(false, self.merge_with(other, |x, y| x.min(y)))
    }

    pub fn lcm(&self, other: &Self) -> Self {
        Self::from_certified(false, self.merge_with(other, |x, y| x.max(y)))
    }

    /// Exact quotient; `None` when `other` does not divide `self`.
    pub fn checked_div(&self, other: &Self) -> Option<Self> {
        let mut out = Vec::new();
        for (p, e) in &other.factors {
            if self.valuation(p) < *e {
                return None;
            }
        }
        for (p, e) in &self.factors {
            let rest = e - other.valuation(p);
            if rest > 0 {
                out.push((p.clone(), rest));
            }
        }
        Some(Self::from_certified(self.negative != other.negative, out))
    }

    pub fn pow(&self, k: u32) -> Self {
        Self::from_certified(
            self.negative && k % 2 == 1,
            self.factors
                .iter()
                .map(|(p, e)| (p.clone(), e * k))
                .collect(),
        )
    }

    /// Number of divisors of the magnitude, saturating.
    pub fn divisor_count(&self) -> u64 {
        self.factors
            .iter()
            .fold(1u64, |acc, (_, e)| acc.saturating_mul(*e as u64 + 1))
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.negative {
            None
        } else {
            self.value.to_u64()
        }
    }

    /// Canonical text form: `p^e` tokens joined by single spaces, `1` for unity.
    pub fn render(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        if self.negative {
            out.push('-');
        }
        if self.factors.is_empty() {
            out.push('1');
            return out;
        }
        for (i, (p, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{p}");
            if *e > 1 {
                let _ = write!(out, "^{e}");
            }
        }
        out
    }
}

impl fmt::Display for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for FactoredInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (= {})", self.render(), self.value)
    }
}

impl FromStr for FactoredInteger {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_factored(s)
    }
}

/// Parses the factored notation used throughout the tables.
///
/// Grammar: an optional sign, then tokens `p` or `p^e` separated by
/// whitespace, `·`, `*` or `\cdot`. Exponents may be braced (`3^{19}`), in
/// which case the next token may follow without a separator, so the
/// typeset form `3^{19}11^{4}463^{5}` is accepted as well. A lone `1`
/// denotes unity.
pub fn parse_factored(text: &str) -> Result<FactoredInteger, ArithError> {
    let malformed = || ArithError::Malformed(String::from(text));
    let mut rest = text.trim();
    let mut negative = false;
    if let Some(r) = rest.strip_prefix('-') {
        negative = true;
        rest = r.trim_start();
    } else if let Some(r) = rest.strip_prefix('+') {
        rest = r.trim_start();
    }
    if rest == "1" {
        return Ok(if negative {
            FactoredInteger::one().negated()
        } else {
            FactoredInteger::one()
        });
    }
    let bytes = rest.as_bytes();
    let mut pos = 0usize;
    let mut factors: Vec<(BigUint, u32)> = Vec::new();
    let digits = |pos: &mut usize| -> Option<&str> {
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        (start < *pos).then(|| &rest[start..*pos])
    };
    let mut need_separator = false;
    loop {
        // separators
        let before = pos;
        loop {
            let tail = &rest[pos..];
            if let Some(c) = tail.chars().next() {
                if c.is_whitespace() || c == '·' || c == '*' || c == '×' {
                    pos += c.len_utf8();
                    continue;
                }
            }
            if tail.starts_with("\\cdot") {
                pos += 5;
                continue;
            }
            if tail.starts_with("\\times") {
                pos += 6;
                continue;
            }
            break;
        }
        if pos >= bytes.len() {
            break;
        }
        if need_separator && pos == before {
            return Err(malformed());
        }
        let base = digits(&mut pos).ok_or_else(malformed)?;
        let base = BigUint::from_str(base).map_err(|_| malformed())?;
        let mut exponent = 1u32;
        need_separator = true;
        if pos < bytes.len() && bytes[pos] == b'^' {
            pos += 1;
            let braced = pos < bytes.len() && bytes[pos] == b'{';
            if braced {
                pos += 1;
            }
            let e = digits(&mut pos).ok_or_else(malformed)?;
            exponent = e.parse().map_err(|_| malformed())?;
            if braced {
                if pos >= bytes.len() || bytes[pos] != b'}' {
                    return Err(malformed());
                }
                pos += 1;
                need_separator = false;
            }
        }
        if exponent == 0 || base.is_zero() {
            return Err(malformed());
        }
        if base.is_one() {
            return Err(malformed());
        }
        if factors.iter().any(|(p, _)| *p == base) {
            return Err(ArithError::RepeatedPrime(base));
        }
        factors.push((base, exponent));
    }
    if factors.is_empty() {
        return Err(malformed());
    }
    for (p, _) in &factors {
        if !is_prime(p) {
            return Err(ArithError::NotPrime(p.clone()));
        }
    }
    factors.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(FactoredInteger::from_certified(negative, factors))
}

/// `true` when `n` is square-free (small helper for the twist sieve).
pub fn is_square_free_u64(n: u64) -> bool {
    super::primes::factor_u64(n).iter().all(|(_, e)| *e == 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn schoolbook(parts: &[(u64, u32)]) -> BigUint {
        // repeated multiplication by the base, no pow
        let mut acc = BigUint::one();
        for &(p, e) in parts {
            for _ in 0..e {
                acc *= p;
            }
        }
        acc
    }

    #[test]
    fn parses_table_notation() {
        assert_eq!(parse_factored("2^2 11").unwrap().value(), &BigInt::from(44));
        assert!(parse_factored("1").unwrap().is_one());
        let rubin = parse_factored("3^19 11^4 463^5").unwrap();
        assert_eq!(rubin.magnitude(), schoolbook(&[(3, 19), (11, 4), (463, 5)]));
        let typeset = parse_factored("3^{19}11^{4}463^{5}").unwrap();
        assert_eq!(typeset, rubin);
        let dotted = parse_factored("3^{22}7^{14}43\\cdot83").unwrap();
        assert_eq!(
            dotted.magnitude(),
            schoolbook(&[(3, 22), (7, 14), (43, 1), (83, 1)])
        );
        assert_eq!(
            parse_factored("-3·5·19").unwrap().value(),
            &BigInt::from(-285)
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            parse_factored("4^2"),
            Err(ArithError::NotPrime(_))
        ));
        assert!(matches!(
            parse_factored("3 3"),
            Err(ArithError::RepeatedPrime(_))
        ));
        assert!(matches!(
            parse_factored("3^"),
            Err(ArithError::Malformed(_))
        ));
        assert!(matches!(
            parse_factored("2^2x"),
            Err(ArithError::Malformed(_))
        ));
        assert!(matches!(parse_factored(""), Err(ArithError::Malformed(_))));
        assert!(matches!(
            parse_factored("3^0"),
            Err(ArithError::Malformed(_))
        ));
        assert!(matches!(
            parse_factored("2^2 1"),
            Err(ArithError::Malformed(_))
        ));
        // digits must be separated unless a braced exponent closes
        assert!(parse_factored("3^2 5 7^1 11").is_ok());
    }

    #[test]
    fn algebra() {
        let a = FactoredInteger::from_u64(360);
        let b = FactoredInteger::from_u64(84);
        assert_eq!(a.gcd(&b).to_u64(), Some(12));
        assert_eq!(a.lcm(&b).to_u64(), Some(2520));
        assert_eq!(a.mul(&b).to_u64(), Some(30240));
        assert_eq!(
            a.checked_div(&FactoredInteger::from_u64(8))
                .unwrap()
                .to_u64(),
            Some(45)
        );
        assert!(a.checked_div(&FactoredInteger::from_u64(16)).is_none());
        assert_eq!(a.radical().to_u64(), Some(30));
        assert_eq!(a.valuation(&BigUint::from(3u32)), 2);
        assert_eq!(a.divisor_count(), 24);
        assert!(FactoredInteger::from_i64(-30).is_square_free());
        assert_eq!(
            FactoredInteger::from_i64(-12).pow(3).value(),
            &BigInt::from(-1728)
        );
    }

    #[test]
    fn from_factors_validation() {
        let two = BigUint::from(2u32);
        let three = BigUint::from(3u32);
        assert!(
            FactoredInteger::from_factors(false, vec![(three.clone(), 1), (two.clone(), 1)])
                .is_err()
        );
        assert!(FactoredInteger::from_factors(false, vec![(two.clone(), 0)]).is_err());
        assert!(FactoredInteger::from_factors(false, vec![(BigUint::from(9u32), 1)]).is_err());
        let ok =
            FactoredInteger::from_unsorted(false, vec![(three.clone(), 1), (two, 2), (three, 1)])
                .unwrap();
        assert_eq!(ok.to_u64(), Some(36));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(n in 1u64..u64::MAX, negative: bool) {
            let f = if negative { FactoredInteger::from_u64(n).negated() } else { FactoredInteger::from_u64(n) };
            prop_assert_eq!(parse_factored(&f.render()).unwrap(), f);
        }
    }
}
