use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::LSeriesError;
use crate::arith::primes::{factor_u64, isqrt_u64, mul_mod, pow_mod};
use crate::curves::{reduction_data, Reduction, WeierstrassCurve};

/// Primes below this bound are counted by the character sum, larger ones by
/// baby-step giant-step.
pub const AP_NAIVE_LIMIT: u64 = 1 << 12;

/// `y^2 = x^3 + a x^2 + b x + c` over `F_p`, `p` odd.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReducedCubic {
    pub p: u64,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

fn residue(n: &BigInt, p: u64) -> u64 {
    n.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits")
}

impl ReducedCubic {
    /// Completes the square: `(2y + a1 x + a3)^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`.
    pub fn from_curve(curve: &WeierstrassCurve, p: u64) -> Self {
        debug_assert!(p % 2 == 1);
        if let Some((a, b)) = curve.as_two_torsion_form() {
            return ReducedCubic {
                p,
                a: residue(a, p),
                b: residue(b, p),
                c: 0,
            };
        }
        let (b2, b4, b6, _) = curve.b_invariants();
        let inv4 = inverse(4 % p, p);
        let inv2 = inverse(2 % p, p);
        ReducedCubic {
            p,
            a: mul_mod(residue(&b2, p), inv4, p),
            b: mul_mod(residue(&b4, p), inv2, p),
            c: mul_mod(residue(&b6, p), inv4, p),
        }
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        let t = add(mul_mod(add(x, self.a, p), x, p), self.b, p);
        add(mul_mod(t, x, p), self.c, p)
    }

    pub fn discriminant_is_zero(&self) -> bool {
        // disc of x^3 + a x^2 + b x + c
        let p = self.p;
        let (a, b, c) = (self.a as i128, self.b as i128, self.c as i128);
        let m = p as i128;
        let r = |v: i128| v.rem_euclid(m);
        let a2 = r(a * a);
        let b2 = r(b * b);
        let terms = r(a2 * b2) - r(4 * r(b2 * b)) - r(4 * r(r(a2 * a) * c)) - r(27 * r(c * c))
            + r(18 * r(r(a * b) * c));
        r(terms) == 0
    }

    /// Quadratic twist by a non-residue `d`.
    fn twist(&self, d: u64) -> Self {
        let p = self.p;
        let d2 = mul_mod(d, d, p);
        ReducedCubic {
            p,
            a: mul_mod(self.a, d, p),
            b: mul_mod(self.b, d2, p),
            c: mul_mod(self.c, mul_mod(d2, d, p), p),
        }
    }
}

#[inline]
fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a as u128 + b as u128;
    (if s >= p as u128 { s - p as u128 } else { s }) as u64
}

#[inline]
fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        (a as u128 + p as u128 - b as u128) as u64
    }
}

fn inverse(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1, "not invertible");
    t0.rem_euclid(p as i128) as u64
}

fn legendre(a: u64, p: u64) -> i64 {
    if a % p == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn sqrt_mod(a: u64, p: u64) -> u64 {
    if a == 0 {
        return 0;
    }
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    // Tonelli-Shanks
    let s = (p - 1).trailing_zeros();
    let q = (p - 1) >> s;
    let mut z = 2;
    while legendre(z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

fn check_good_odd(curve: &WeierstrassCurve, p: u64) -> Result<ReducedCubic, LSeriesError> {
    if p < 3 || p % 2 == 0 {
        return Err(LSeriesError::UnsupportedPrime(p));
    }
    if (curve.discriminant() % BigInt::from(p)).is_zero() {
        return Err(LSeriesError::BadPrime(BigInt::from(p)));
    }
    Ok(ReducedCubic::from_curve(curve, p))
}

/// `a(p) = p + 1 - #E(F_p)` by the character sum over `x`.
pub fn ap_naive(curve: &WeierstrassCurve, p: u64) -> Result<i64, LSeriesError> {
    if p >= 1 << 32 {
        return Err(LSeriesError::UnsupportedPrime(p));
    }
    Ok(ap_naive_cubic(&check_good_odd(curve, p)?))
}

pub fn ap_naive_cubic(e: &ReducedCubic) -> i64 {
    let p = e.p;
    let mut square = vec![false; p as usize];
    let mut sq = 0u64;
    for x in 0..p.div_ceil(2) {
        square[sq as usize] = true;
        // (x + 1)^2 = x^2 + 2x + 1
        sq = add(sq, (2 * x + 1) % p, p);
    }
    // forward differences of the cubic from x = 0
    let mut f = e.c;
    let mut d1 = add(add(1, e.a, p), e.b, p);
    let mut d2 = add(6 % p, mul_mod(2, e.a, p), p);
    let d3 = 6 % p;
    let mut sum = 0i64;
    for _ in 0..p {
        if f != 0 {
            sum += if square[f as usize] { 1 } else { -1 };
        }
        f = add(f, d1, p);
        d1 = add(d1, d2, p);
        d2 = add(d2, d3, p);
    }
    -sum
}

type Point = Option<(u64, u64)>;

impl ReducedCubic {
    fn add_points(&self, u: Point, v: Point) -> Point {
        let p = self.p;
        let ((x1, y1), (x2, y2)) = match (u, v) {
            (None, v) => return v,
            (u, None) => return u,
            (Some(a), Some(b)) => (a, b),
        };
        let lambda = if x1 == x2 {
            if add(y1, y2, p) == 0 {
                return None;
            }
            // 3x^2 + 2ax + b over 2y
            let num = add(
                add(
                    mul_mod(3, mul_mod(x1, x1, p), p),
                    mul_mod(mul_mod(2, self.a, p), x1, p),
                    p,
                ),
                self.b,
                p,
            );
            mul_mod(num, inverse(mul_mod(2, y1, p), p), p)
        } else {
            mul_mod(sub(y2, y1, p), inverse(sub(x2, x1, p), p), p)
        };
        let x3 = sub(
            sub(sub(mul_mod(lambda, lambda, p), self.a, p), x1, p),
            x2,
            p,
        );
        let y3 = sub(mul_mod(lambda, sub(x1, x3, p), p), y1, p);
        Some((x3, y3))
    }

    fn mul(&self, mut k: u64, u: Point) -> Point {
        let mut acc = None;
        let mut base = u;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add_points(acc, base);
            }
            base = self.add_points(base, base);
            k >>= 1;
        }
        acc
    }

    fn random_point(&self, rng: &mut ChaCha8Rng) -> (u64, u64) {
        loop {
            let x = rng.next_u64() % self.p;
            let f = self.eval(x);
            if f == 0 {
                return (x, 0);
            }
            if legendre(f, self.p) == 1 {
                return (x, sqrt_mod(f, self.p));
            }
        }
    }

    /// Some `M` in `[lo, hi]` with `M P = O`.
    fn multiple_in_interval(&self, pt: Point, lo: u64, hi: u64) -> Option<u64> {
        let width = hi - lo;
        let s = isqrt_u64(width) + 1;
        let mut baby: Vec<(u64, u64, u64)> = Vec::with_capacity(s as usize);
        let mut q = pt;
        for j in 1..=s {
            if let Some((x, y)) = q {
                baby.push((x, y, j));
            }
            q = self.add_points(q, pt);
        }
        baby.sort_unstable();
        let giant = self.mul(2 * s + 1, pt);
        let mut t = self.mul(lo + s, pt);
        let mut i = 0u64;
        while i * (2 * s + 1) <= width {
            let base = lo + i * (2 * s + 1) + s;
            let mut hits: Vec<i64> = Vec::new();
            match t {
                None => hits.push(0),
                Some((x, y)) => {
                    let start = baby.partition_point(|e| e.0 < x);
                    for &(_, by, j) in baby[start..].iter().take_while(|e| e.0 == x) {
                        // T = -jP when the y coordinates differ
                        hits.push(if by == y { -(j as i64) } else { j as i64 });
                    }
                }
            }
            for h in hits {
                let m = base as i64 + h;
                if m >= lo as i64 && m as u64 <= hi && m > 0 {
                    return Some(m as u64);
                }
            }
            t = self.add_points(t, giant);
            i += 1;
        }
        None
    }

    fn order_of(&self, pt: Point, lo: u64, hi: u64) -> Option<u64> {
        let mut ord = self.multiple_in_interval(pt, lo, hi)?;
        for (l, _) in factor_u64(ord) {
            while ord % l == 0 && self.mul(ord / l, pt).is_none() {
                ord /= l;
            }
        }
        Some(ord)
    }
}

fn lcm(a: u64, b: u64) -> u64 {
    a / a.gcd(&b) * b
}

/// `a(p)` by baby-step giant-step order finding on `E` and its quadratic
/// twist, until exactly one group order in the Hasse interval remains.
pub fn ap_bsgs(curve: &WeierstrassCurve, p: u64) -> Result<i64, LSeriesError> {
    if p >= 1 << 62 {
        return Err(LSeriesError::UnsupportedPrime(p));
    }
    Ok(ap_bsgs_cubic(&check_good_odd(curve, p)?))
}

pub fn ap_bsgs_cubic(e: &ReducedCubic) -> i64 {
    let p = e.p;
    if p < 64 {
        return ap_naive_cubic(e);
    }
    let r = isqrt_u64(4 * p);
    let (lo, hi) = (p + 1 - r, p + 1 + r);
    let mut d = 2;
    while legendre(d, p) != -1 {
        d += 1;
    }
    let twist = e.twist(d);
    let mut rng = ChaCha8Rng::seed_from_u64(p);
    let (mut l_e, mut l_t) = (1u64, 1u64);
    for round in 0..256 {
        let on_twist = round % 2 == 1;
        let curve = if on_twist { &twist } else { e };
        let pt = Some(curve.random_point(&mut rng));
        if let Some(ord) = curve.order_of(pt, lo, hi) {
            if on_twist {
                l_t = lcm(l_t, ord);
            } else {
                l_e = lcm(l_e, ord);
            }
        }
        if (hi - lo) / l_e > 64 {
            continue;
        }
        let mut candidates = Vec::new();
        let mut m = lo.div_ceil(l_e) * l_e;
        while m <= hi {
            if (2 * p + 2 - m) % l_t == 0 {
                candidates.push(m);
            }
            m += l_e;
        }
        if candidates.len() == 1 {
            return p as i64 + 1 - candidates[0] as i64;
        }
    }
    ap_naive_cubic(e)
}

/// `#E(F_p)` by enumerating the general Weierstrass equation; small `p` only.
pub fn ap_enumerate(curve: &WeierstrassCurve, p: u64) -> Result<i64, LSeriesError> {
    if p > 1 << 12 {
        return Err(LSeriesError::UnsupportedPrime(p));
    }
    if (curve.discriminant() % BigInt::from(p)).is_zero() {
        return Err(LSeriesError::BadPrime(BigInt::from(p)));
    }
    let [a1, a2, a3, a4, a6] = curve.a_invariants().clone().map(|v| residue(&v, p));
    let mut count = 1u64;
    for x in 0..p {
        let rhs = add(
            add(
                add(pow_mod(x, 3, p), mul_mod(a2, mul_mod(x, x, p), p), p),
                mul_mod(a4, x, p),
                p,
            ),
            a6,
            p,
        );
        for y in 0..p {
            let lhs = add(
                add(mul_mod(y, y, p), mul_mod(mul_mod(a1, x, p), y, p), p),
                mul_mod(a3, y, p),
                p,
            );
            if lhs == rhs {
                count += 1;
            }
        }
    }
    Ok(p as i64 + 1 - count as i64)
}

/// `a(p)` at a prime dividing the conductor.
pub fn bad_prime_ap(curve: &WeierstrassCurve, p: &BigInt) -> Result<i32, LSeriesError> {
    let local = reduction_data(curve, p);
    match local.reduction {
        Reduction::Good => Err(LSeriesError::GoodPrime(p.clone())),
        Reduction::SplitMultiplicative => Ok(1),
        Reduction::NonsplitMultiplicative => Ok(-1),
        Reduction::Additive => Ok(0),
    }
}
