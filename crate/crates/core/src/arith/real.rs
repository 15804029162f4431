//! Deterministic arbitrary-precision reals.
//!
//! A [`BigReal`] is `mantissa * 2^exponent` with the mantissa rounded to a
//! fixed number of bits. Every operation rounds to nearest (ties away from
//! zero) at the larger of its operands' precisions, so results depend only
//! on the inputs and the precision setting, never on the platform.

use alloc::string::String;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ArithError;

/// Working precision in significant decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT_DIGITS: u32 = 40;
    const GUARD_BITS: u32 = 16;

    pub const fn digits(digits: u32) -> Self {
        Precision(digits)
    }

    pub fn decimal_digits(self) -> u32 {
        self.0
    }

    /// Mantissa width: `ceil(digits * log2 10)` plus guard bits.
    pub fn bits(self) -> u32 {
        (self.0 as u64 * 33_220 / 10_000 + 1) as u32 + Self::GUARD_BITS
    }

    pub fn max(self, other: Self) -> Self {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    /// The same precision plus `extra` decimal digits.
    pub fn widened(self, extra: u32) -> Self {
        Precision(self.0 + extra)
    }
}

impl Default for Precision {
    fn default() -> Self {
        Precision(Self::DEFAULT_DIGITS)
    }
}

#[derive(Clone)]
pub struct BigReal {
    mantissa: BigInt,
    exponent: i64,
    precision: Precision,
}

fn bit_len(m: &BigInt) -> i64 {
    m.bits() as i64
}

/// `round(m / 2^shift)`, ties away from zero.
fn round_shift(m: &BigInt, shift: u64) -> BigInt {
    if shift == 0 {
        return m.clone();
    }
    let mag = m.magnitude();
    let half = BigUint::one() << (shift - 1);
    let r = (mag + half) >> shift;
    BigInt::from_biguint(m.sign(), r)
}

/// `round(n / d)` for `d > 0`, ties away from zero.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let (q, r) = n.magnitude().div_rem(d.magnitude());
    let q = if (r << 1u32) >= *d.magnitude() {
        q + 1u32
    } else {
        q
    };
    BigInt::from_biguint(
        if n.sign() == Sign::Minus {
            Sign::Minus
        } else {
            Sign::Plus
        },
        q,
    )
}

impl BigReal {
    fn normalized(mantissa: BigInt, exponent: i64, precision: Precision) -> Self {
        if mantissa.is_zero() {
            return BigReal {
                mantissa,
                exponent: 0,
                precision,
            };
        }
        let limit = precision.bits() as i64;
        let excess = bit_len(&mantissa) - limit;
        let (mut mantissa, mut exponent) = if excess > 0 {
            (round_shift(&mantissa, excess as u64), exponent + excess)
        } else {
            (mantissa, exponent)
        };
        if bit_len(&mantissa) > limit {
            mantissa >>= 1u32;
            exponent += 1;
        }
        BigReal {
            mantissa,
            exponent,
            precision,
        }
    }

    pub fn zero(precision: Precision) -> Self {
        Self::normalized(BigInt::zero(), 0, precision)
    }

    pub fn one(precision: Precision) -> Self {
        Self::from_integer(BigInt::one(), precision)
    }

    pub fn from_integer(n: impl Into<BigInt>, precision: Precision) -> Self {
        Self::normalized(n.into(), 0, precision)
    }

    pub fn from_i64(n: i64, precision: Precision) -> Self {
        Self::from_integer(n, precision)
    }

    /// Exact binary value of an `f64`, rounded to `precision`.
    pub fn from_f64(x: f64, precision: Precision) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Self::zero(precision);
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        Self::normalized(BigInt::from(m) * sign, e, precision)
    }

    /// `num / den`, correctly rounded.
    pub fn from_ratio(
        num: impl Into<BigInt>,
        den: impl Into<BigInt>,
        precision: Precision,
    ) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "division by zero");
        Self::from_integer(num, precision) / Self::from_integer(den, precision)
    }

    /// `mantissa * 2^exponent` exactly, then rounded.
    pub fn from_parts(mantissa: BigInt, exponent: i64, precision: Precision) -> Self {
        Self::normalized(mantissa, exponent, precision)
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Re-rounds to another precision.
    pub fn with_precision(&self, precision: Precision) -> Self {
        Self::normalized(self.mantissa.clone(), self.exponent, precision)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn abs(&self) -> Self {
        BigReal {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
            precision: self.precision,
        }
    }

    /// Position of the leading bit: `|x|` lies in `[2^(m-1), 2^m)`.
    pub fn magnitude_bits(&self) -> i64 {
        bit_len(&self.mantissa) + self.exponent
    }

    /// Multiplication by `2^k`, exact.
    pub fn mul_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigReal {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + k,
            precision: self.precision,
        }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Self::normalized(&self.mantissa * k, self.exponent, self.precision)
    }

    pub fn div_int(&self, k: i64) -> Self {
        self / &BigReal::from_i64(k, self.precision)
    }

    /// Nearest integer, ties away from zero.
    pub fn round(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as u64
        } else {
            round_shift(&self.mantissa, (-self.exponent) as u64)
        }
    }

    pub fn floor(&self) -> BigInt {
        if self.exponent >= 0 {
            &self.mantissa << self.exponent as u64
        } else {
            // arithmetic shift floors for negative values
            &self.mantissa >> (-self.exponent) as u64
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let excess = (bit_len(&self.mantissa) - 62).max(0);
        let top = round_shift(&self.mantissa, excess as u64)
            .to_i64()
            .unwrap_or(0);
        ldexp(top as f64, self.exponent + excess)
    }

    pub fn sqrt(&self) -> Result<Self, ArithError> {
        if self.is_negative() {
            return Err(ArithError::Domain("square root of a negative number"));
        }
        if self.is_zero() {
            return Ok(self.clone());
        }
        let target = 2 * self.precision.bits() as i64 + 4;
        let mut shift = (target - bit_len(&self.mantissa)).max(0);
        if (self.exponent - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let scaled = self.mantissa.magnitude() << shift as u64;
        let root = scaled.sqrt();
        Ok(Self::normalized(
            BigInt::from(root),
            (self.exponent - shift) / 2,
            self.precision,
        ))
    }

    pub fn powi(&self, mut k: i64) -> Self {
        let p = self.precision;
        let work = p.widened(4);
        let invert = k < 0;
        k = k.abs();
        let mut base = self.with_precision(work);
        let mut acc = BigReal::one(work);
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        if invert {
            acc = &BigReal::one(work) / &acc;
        }
        acc.with_precision(p)
    }

    /// Natural exponential.
    pub fn exp(&self) -> Self {
        let p = self.precision;
        if self.is_zero() {
            return BigReal::one(p);
        }
        let halvings = (super::primes::isqrt_u64(p.bits() as u64) / 2) as i64;
        let work = Precision::digits(p.decimal_digits() + 10 + (halvings as u32) / 3);
        let x = self.with_precision(work);
        let ln2 = ln2(work);
        let k = (&x / &ln2).round();
        let k = k.to_i64().expect("exponent argument out of range");
        let r = &x - &ln2.mul_int(k);
        let r = r.mul_pow2(-halvings);
        // Taylor series on the reduced argument
        let mut sum = BigReal::one(work);
        let mut term = BigReal::one(work);
        let cutoff = -(work.bits() as i64) - 4;
        for n in 1..10_000 {
            term = (&term * &r).div_int(n);
            if term.is_zero() || term.magnitude_bits() < cutoff {
                break;
            }
            sum = &sum + &term;
        }
        for _ in 0..halvings {
            sum = &sum * &sum;
        }
        sum.mul_pow2(k).with_precision(p)
    }

    /// Natural logarithm.
    pub fn ln(&self) -> Result<Self, ArithError> {
        if !self.is_positive() {
            return Err(ArithError::Domain("logarithm of a non-positive number"));
        }
        let p = self.precision;
        let work = p.widened(10);
        let k = self.magnitude_bits();
        // y in [1/2, 1)
        let y = self.with_precision(work).mul_pow2(-k);
        let one = BigReal::one(work);
        let z = &(&y - &one) / &(&y + &one);
        let z2 = &z * &z;
        let mut power = z.clone();
        let mut sum = z.clone();
        let cutoff = -(work.bits() as i64) - 4;
        let mut n = 1i64;
        loop {
            power = &power * &z2;
            n += 2;
            let term = power.div_int(n);
            if term.is_zero() || term.magnitude_bits() < cutoff {
                break;
            }
            sum = &sum + &term;
        }
        let result = &sum.mul_pow2(1) + &ln2(work).mul_int(k);
        Ok(result.with_precision(p))
    }

    /// `self^exponent` for `self > 0`.
    pub fn pow(&self, exponent: &BigReal) -> Result<Self, ArithError> {
        let p = self.precision.max(exponent.precision);
        let work = p.widened(10);
        let l = self.with_precision(work).ln()?;
        Ok((&l * &exponent.with_precision(work))
            .exp()
            .with_precision(p))
    }

    /// Decimal rendering with `digits` significant digits, trailing zeros kept.
    pub fn to_sig_string(&self, digits: u32) -> String {
        format_significant(self, digits.max(1))
    }

    /// Exact decimal expansion of the binary value (finite for every BigReal).
    pub fn to_exact_decimal(&self) -> String {
        exact_decimal(&self.mantissa, self.exponent)
    }

    /// Parses plain or scientific decimal notation, rounding to `precision`.
    pub fn parse_decimal(text: &str, precision: Precision) -> Result<Self, ArithError> {
        let (num, den) = parse_decimal_ratio(text)?;
        if den.is_one() {
            return Ok(Self::from_integer(num, precision));
        }
        // correctly rounded quotient: enough quotient bits for the mantissa
        let shift = precision.bits() as i64 + bit_len(&den) - bit_len(&num).min(bit_len(&den)) + 2;
        let q = round_div(&(num << shift as u64), &den);
        Ok(Self::normalized(q, -shift, precision))
    }

    /// Parses an exact decimal, failing unless it is exactly representable at
    /// `precision` (the inverse of [`BigReal::to_exact_decimal`]).
    pub fn parse_exact_decimal(text: &str, precision: Precision) -> Result<Self, ArithError> {
        let (num, den) = parse_decimal_ratio(text)?;
        // den = 10^f; exact iff num*2^f / 10^f = num / 5^f is an integer
        let twos = den.trailing_zeros().unwrap_or(0);
        let fives = &den >> twos;
        let (q, r) = num.div_rem(&fives);
        if !r.is_zero() {
            return Err(ArithError::Inexact);
        }
        let value = Self::normalized(q.clone(), -(twos as i64), precision);
        if &value.mantissa << (value.exponent + twos as i64) as u64 != q && !q.is_zero() {
            return Err(ArithError::Inexact);
        }
        Ok(value)
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    let step_up = f64::from_bits(((1023 + 600) as u64) << 52);
    let step_down = f64::from_bits(((1023 - 600) as u64) << 52);
    while e > 600 {
        x *= step_up;
        e -= 600;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -600 {
        x *= step_down;
        e += 600;
        if x == 0.0 {
            return x;
        }
    }
    x * f64::from_bits(((1023 + e) as u64) << 52)
}

fn exact_decimal(mantissa: &BigInt, exponent: i64) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    if exponent >= 0 {
        let _ = write!(out, "{}", mantissa << exponent as u64);
        return out;
    }
    let f = (-exponent) as u32;
    // m * 2^-f = m * 5^f / 10^f
    let scaled = mantissa.magnitude() * num_traits::pow(BigUint::from(5u32), f as usize);
    let digits = scaled.to_str_radix(10);
    if mantissa.is_negative() {
        out.push('-');
    }
    let f = f as usize;
    if digits.len() <= f {
        out.push_str("0.");
        for _ in 0..(f - digits.len()) {
            out.push('0');
        }
        out.push_str(&digits);
    } else {
        out.push_str(&digits[..digits.len() - f]);
        out.push('.');
        out.push_str(&digits[digits.len() - f..]);
    }
    // trim trailing zeros of the fraction
    while out.ends_with('0') {
        out.pop();
    }
    if out.ends_with('.') {
        out.pop();
    }
    out
}

fn parse_decimal_ratio(text: &str) -> Result<(BigInt, BigInt), ArithError> {
    let bad = || ArithError::Malformed(String::from(text));
    let t = text.trim();
    let (body, exp10) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, body) = match body.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, body.strip_prefix('+').unwrap_or(body)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(i) => (&body[..i], &body[i + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let mut digits = String::from(int_part);
    digits.push_str(frac_part);
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if negative {
        num = -num;
    }
    let scale = exp10 - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        Ok((num * num_traits::pow(ten, scale as usize), BigInt::one()))
    } else {
        Ok((num, num_traits::pow(ten, (-scale) as usize)))
    }
}

fn format_significant(x: &BigReal, digits: u32) -> String {
    use core::fmt::Write;
    if x.is_zero() {
        let mut s = String::from("0");
        if digits > 1 {
            s.push('.');
            for _ in 1..digits {
                s.push('0');
            }
        }
        return s;
    }
    // estimate decimal exponent E with 10^E <= |x| < 10^(E+1)
    let mut e10 = ((x.magnitude_bits() - 1) as f64 * core::f64::consts::LOG10_2).floor_like();
    let (n, e10) = loop {
        // n = round(|x| * 10^(digits-1-E))
        let k = digits as i64 - 1 - e10;
        let (mut num, mut den) = (BigInt::from(x.mantissa.magnitude().clone()), BigInt::one());
        if x.exponent >= 0 {
            num <<= x.exponent as u64;
        } else {
            den <<= (-x.exponent) as u64;
        }
        let ten = BigInt::from(10u32);
        if k >= 0 {
            num *= num_traits::pow(ten, k as usize);
        } else {
            den *= num_traits::pow(ten, (-k) as usize);
        }
        let n = round_div(&num, &den);
        let lower = num_traits::pow(BigInt::from(10u32), digits as usize - 1);
        let upper = &lower * 10;
        if n < lower {
            e10 -= 1;
        } else if n >= upper {
            e10 += 1;
        } else {
            break (n, e10);
        }
    };
    let digits_str = n.to_str_radix(10);
    let mut out = String::new();
    if x.is_negative() {
        out.push('-');
    }
    let d = digits as i64;
    if (-7..21).contains(&e10) {
        if e10 < 0 {
            out.push_str("0.");
            for _ in 0..(-e10 - 1) {
                out.push('0');
            }
            out.push_str(&digits_str);
        } else if e10 + 1 >= d {
            out.push_str(&digits_str);
            for _ in 0..(e10 + 1 - d) {
                out.push('0');
            }
        } else {
            let split = (e10 + 1) as usize;
            out.push_str(&digits_str[..split]);
            out.push('.');
            out.push_str(&digits_str[split..]);
        }
    } else {
        out.push_str(&digits_str[..1]);
        if digits > 1 {
            out.push('.');
            out.push_str(&digits_str[1..]);
        }
        let _ = write!(out, "e{e10}");
    }
    out
}

trait FloorLike {
    fn floor_like(self) -> i64;
}

impl FloorLike for f64 {
    fn floor_like(self) -> i64 {
        let t = self as i64;
        if (t as f64) > self {
            t - 1
        } else {
            t
        }
    }
}

fn atanh_inverse_fixed(k: u64, bits: u64) -> BigInt {
    // sum 1/((2n+1) k^(2n+1)) scaled by 2^bits
    let k2 = BigInt::from(k) * k;
    let mut power = (BigInt::one() << bits) / k;
    let mut sum = power.clone();
    let mut n = 1u64;
    while !power.is_zero() {
        power /= &k2;
        sum += &power / (2 * n + 1);
        n += 1;
    }
    sum
}

fn atan_inverse_fixed(k: u64, bits: u64) -> BigInt {
    let k2 = BigInt::from(k) * k;
    let mut power = (BigInt::one() << bits) / k;
    let mut sum = power.clone();
    let mut n = 1u64;
    while !power.is_zero() {
        power /= &k2;
        let term = &power / (2 * n + 1);
        if n % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        n += 1;
    }
    sum
}

/// `ln 2 = 2 atanh(1/3)`.
pub fn ln2(precision: Precision) -> BigReal {
    let bits = precision.bits() as u64 + 32;
    let fixed = atanh_inverse_fixed(3, bits) << 1u32;
    BigReal::normalized(fixed, -(bits as i64), precision)
}

/// Machin's formula `pi = 16 atan(1/5) - 4 atan(1/239)`.
pub fn pi(precision: Precision) -> BigReal {
    let bits = precision.bits() as u64 + 32;
    let fixed = (atan_inverse_fixed(5, bits) << 4u32) - (atan_inverse_fixed(239, bits) << 2u32);
    BigReal::normalized(fixed, -(bits as i64), precision)
}

/// Outcome of an arithmetic-geometric mean evaluation.
#[derive(Clone, Debug)]
pub struct AgmResult {
    pub value: BigReal,
    pub iterations: u32,
}

/// Arithmetic-geometric mean of two positive reals at `precision`.
pub fn agm(x: &BigReal, y: &BigReal, precision: Precision) -> Result<AgmResult, ArithError> {
    if !x.is_positive() || !y.is_positive() {
        return Err(ArithError::Domain("AGM of a non-positive number"));
    }
    let work = precision.widened(6);
    let mut a = x.with_precision(work);
    let mut b = y.with_precision(work);
    let tolerance = -(work.bits() as i64) + 2;
    let mut iterations = 0;
    loop {
        let diff = (&a - &b).abs();
        if diff.is_zero() || diff.magnitude_bits() - a.magnitude_bits() < tolerance {
            break;
        }
        let next_a = (&a + &b).mul_pow2(-1);
        let next_b = (&a * &b).sqrt()?;
        a = next_a;
        b = next_b;
        iterations += 1;
        if iterations > 4 * precision.bits() + 64 {
            return Err(ArithError::NoConvergence);
        }
    }
    Ok(AgmResult {
        value: a.with_precision(precision),
        iterations,
    })
}

impl PartialEq for BigReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BigReal {}

impl PartialOrd for BigReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BigReal {
    fn cmp(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.signum(), other.signum());
        if sa != sb {
            return sa.cmp(&sb);
        }
        if sa == 0 {
            return Ordering::Equal;
        }
        // same sign: compare exactly by aligning exponents
        let e = self.exponent.min(other.exponent);
        let a = &self.mantissa << (self.exponent - e) as u64;
        let b = &other.mantissa << (other.exponent - e) as u64;
        a.cmp(&b)
    }
}

fn add_impl(a: &BigReal, b: &BigReal) -> BigReal {
    let precision = a.precision.max(b.precision);
    if a.is_zero() {
        return b.with_precision(precision);
    }
    if b.is_zero() {
        return a.with_precision(precision);
    }
    let gap = precision.bits() as i64 + 4;
    if a.magnitude_bits() - b.magnitude_bits() > gap {
        return a.with_precision(precision);
    }
    if b.magnitude_bits() - a.magnitude_bits() > gap {
        return b.with_precision(precision);
    }
    let e = a.exponent.min(b.exponent);
    let m = (&a.mantissa << (a.exponent - e) as u64) + (&b.mantissa << (b.exponent - e) as u64);
    BigReal::normalized(m, e, precision)
}

impl<'a> Add<&'a BigReal> for &'a BigReal {
    type Output = BigReal;
    fn add(self, rhs: &BigReal) -> BigReal {
        add_impl(self, rhs)
    }
}

impl<'a> Sub<&'a BigReal> for &'a BigReal {
    type Output = BigReal;
    fn sub(self, rhs: &BigReal) -> BigReal {
        add_impl(self, &-rhs)
    }
}

impl<'a> Mul<&'a BigReal> for &'a BigReal {
    type Output = BigReal;
    fn mul(self, rhs: &BigReal) -> BigReal {
        BigReal::normalized(
            &self.mantissa * &rhs.mantissa,
            self.exponent + rhs.exponent,
            self.precision.max(rhs.precision),
        )
    }
}

impl<'a> Div<&'a BigReal> for &'a BigReal {
    type Output = BigReal;
    fn div(self, rhs: &BigReal) -> BigReal {
        assert!(!rhs.is_zero(), "division by zero");
        let precision = self.precision.max(rhs.precision);
        if self.is_zero() {
            return BigReal::zero(precision);
        }
        let shift = precision.bits() as i64 + 2 + bit_len(&rhs.mantissa) - bit_len(&self.mantissa);
        let shift = shift.max(0);
        let q = round_div(&(&self.mantissa << shift as u64), &rhs.mantissa);
        BigReal::normalized(q, self.exponent - rhs.exponent - shift, precision)
    }
}

impl Neg for &BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        BigReal {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
            precision: self.precision,
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a BigReal> for BigReal {
            type Output = BigReal;
            fn $method(self, rhs: &BigReal) -> BigReal {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<BigReal> for &'a BigReal {
            type Output = BigReal;
            fn $method(self, rhs: BigReal) -> BigReal {
                self.$method(&rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for BigReal {
    type Output = BigReal;
    fn neg(self) -> BigReal {
        -&self
    }
}

impl fmt::Display for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f
            .precision()
            .map(|d| d as u32)
            .unwrap_or(self.precision.decimal_digits());
        f.write_str(&self.to_sig_string(digits))
    }
}

impl fmt::Debug for BigReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BigReal({})",
            self.to_sig_string(self.precision.decimal_digits())
        )
    }
}

/// Sum of a slice of reals in order.
pub fn sum_in_order(values: &[BigReal], precision: Precision) -> BigReal {
    values
        .iter()
        .fold(BigReal::zero(precision), |acc, v| &acc + v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: Precision = Precision::digits(40);

    fn real(s: &str) -> BigReal {
        BigReal::parse_decimal(s, P).unwrap()
    }

    fn close(a: &BigReal, b: &BigReal, rel_digits: i64) -> bool {
        let diff = (a - b).abs();
        diff.is_zero()
            || diff.magnitude_bits() - a.magnitude_bits().max(b.magnitude_bits())
                < -(rel_digits * 332 / 100)
    }

    #[test]
    fn constants() {
        assert_eq!(
            pi(P).to_sig_string(40),
            "3.141592653589793238462643383279502884197"
        );
        assert_eq!(
            ln2(P).to_sig_string(40),
            "0.6931471805599453094172321214581765680755"
        );
    }

    #[test]
    fn exp_and_ln() {
        let e = BigReal::one(P).exp();
        assert_eq!(
            e.to_sig_string(40),
            "2.718281828459045235360287471352662497757"
        );
        let ln10 = BigReal::from_i64(10, P).ln().unwrap();
        assert_eq!(
            ln10.to_sig_string(40),
            "2.302585092994045684017991454684364207601"
        );
        let x = real("-1234.5678");
        assert!(close(&x.exp().ln().unwrap(), &x, 36));
        assert!(BigReal::zero(P).ln().is_err());
        assert_eq!(BigReal::zero(P).exp(), BigReal::one(P));
    }

    #[test]
    fn sqrt_and_division() {
        let two = BigReal::from_i64(2, P);
        assert_eq!(
            two.sqrt().unwrap().to_sig_string(40),
            "1.414213562373095048801688724209698078570"
        );
        let third = BigReal::from_ratio(1, 3, P);
        assert_eq!(third.to_sig_string(12), "0.333333333333");
        assert!(BigReal::from_i64(-1, P).sqrt().is_err());
    }

    #[test]
    fn agm_fixed_point_and_reference() {
        let one = BigReal::one(P);
        assert_eq!(agm(&one, &one, P).unwrap().value, one);
        // Gauss's constant: 1/agm(1, sqrt 2) = 0.8346268416740731862814297327990468089939...
        let g = agm(&one, &BigReal::from_i64(2, P).sqrt().unwrap(), P).unwrap();
        assert_eq!(
            (&one / &g.value).to_sig_string(38),
            "0.83462684167407318628142973279904680899"
        );
        assert!(g.iterations <= 40);
        assert!(agm(&one, &BigReal::zero(P), P).is_err());
    }

    #[test]
    fn formatting() {
        assert_eq!(real("37.964").to_sig_string(6), "37.9640");
        assert_eq!(real("0.0042659").to_sig_string(5), "0.0042659");
        assert_eq!(real("479144").to_sig_string(6), "479144");
        assert_eq!(real("-2.5e30").to_sig_string(3), "-2.50e30");
        assert_eq!(real("999999.7").to_sig_string(6), "1000000");
        assert_eq!(BigReal::zero(P).to_sig_string(3), "0.00");
    }

    #[test]
    fn exact_decimal_round_trip() {
        let x = BigReal::from_ratio(22, 7, P);
        let s = x.to_exact_decimal();
        assert_eq!(BigReal::parse_exact_decimal(&s, P).unwrap(), x);
        assert!(BigReal::parse_exact_decimal("0.1", P).is_err());
        assert_eq!(
            BigReal::parse_exact_decimal("-0.375", P).unwrap(),
            real("-0.375")
        );
    }

    #[test]
    fn precision_is_not_reduced() {
        let wide = Precision::digits(60);
        let x = BigReal::from_ratio(1, 3, wide);
        let y = BigReal::from_ratio(1, 7, P);
        assert_eq!((&x + &y).precision(), wide);
        assert_eq!((&y * &x).precision(), wide);
    }

    proptest! {
        #[test]
        fn agm_symmetry_homogeneity_bounds(a in 1u64..1_000_000_000, b in 1u64..1_000_000_000, k in 1u64..100_000) {
            let x = BigReal::from_ratio(a, 1000, P);
            let y = BigReal::from_ratio(b, 1000, P);
            let kk = BigReal::from_ratio(k, 7, P);
            let m = agm(&x, &y, P).unwrap().value;
            let m_swapped = agm(&y, &x, P).unwrap().value;
            prop_assert!(close(&m, &m_swapped, 38));
            let scaled = agm(&(&kk * &x), &(&kk * &y), P).unwrap().value;
            prop_assert!(close(&scaled, &(&kk * &m), 37));
            let (lo, hi) = if x < y { (&x, &y) } else { (&y, &x) };
            prop_assert!(*lo <= m && m <= *hi);
        }

        #[test]
        fn agm_precision_restriction(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let low = Precision::digits(20);
            let x = BigReal::from_i64(a as i64, P);
            let y = BigReal::from_i64(b as i64, P);
            let full = agm(&x, &y, P).unwrap().value.with_precision(low);
            let direct = agm(&x.with_precision(low), &y.with_precision(low), low).unwrap().value;
            prop_assert!(close(&full, &direct, 19));
        }

        #[test]
        fn decimal_parse_format(m in -1_000_000_000i64..1_000_000_000, e in -30i64..30) {
            let s = alloc::format!("{m}e{e}");
            let x = BigReal::parse_decimal(&s, P).unwrap();
            let back = BigReal::parse_decimal(&x.to_sig_string(30), P).unwrap();
            prop_assert!(close(&x, &back, 28) || x.is_zero());
        }
    }
}
