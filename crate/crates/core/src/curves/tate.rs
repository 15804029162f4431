//! Tate's algorithm: local reduction type, conductor exponent and Tamagawa
//! number at any prime, including 2 and 3.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::WeierstrassCurve;

/// Kodaira symbol of the special fibre.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kodaira {
    /// `I_n`; `I_0` is good reduction.
    I(u32),
    II,
    III,
    IV,
    /// `I_n^*`.
    IStar(u32),
    IVStar,
    IIIStar,
    IIStar,
}

impl fmt::Display for Kodaira {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kodaira::I(n) => write!(f, "I{n}"),
            Kodaira::II => f.write_str("II"),
            Kodaira::III => f.write_str("III"),
            Kodaira::IV => f.write_str("IV"),
            Kodaira::IStar(n) => write!(f, "I{n}*"),
            Kodaira::IVStar => f.write_str("IV*"),
            Kodaira::IIIStar => f.write_str("III*"),
            Kodaira::IIStar => f.write_str("II*"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reduction {
    Good,
    SplitMultiplicative,
    NonsplitMultiplicative,
    Additive,
}

/// Local data of a curve at one prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalData {
    pub prime: BigInt,
    pub kodaira: Kodaira,
    pub reduction: Reduction,
    /// Exponent of `p` in the conductor.
    pub conductor_exponent: u32,
    pub tamagawa: u32,
    /// Valuation of the minimal discriminant.
    pub discriminant_valuation: u32,
    /// How many times the input model was divided down by `p` (the
    /// valuation of `u` relating the model to a minimal one).
    pub scaling_exponent: u32,
    /// A model minimal at `p`, isomorphic over the rationals to the input.
    pub minimal_model: WeierstrassCurve,
}

impl LocalData {
    /// `a_p` for a bad prime: `0` additive, `+1` split, `-1` nonsplit.
    pub fn bad_ap(&self) -> Option<i32> {
        match self.reduction {
            Reduction::Good => None,
            Reduction::SplitMultiplicative => Some(1),
            Reduction::NonsplitMultiplicative => Some(-1),
            Reduction::Additive => Some(0),
        }
    }
}

struct Local<'a> {
    p: &'a BigInt,
}

impl Local<'_> {
    fn val(&self, x: &BigInt) -> u32 {
        if x.is_zero() {
            return u32::MAX;
        }
        let mut v = 0;
        let mut y = x.clone();
        loop {
            let (q, r) = y.div_rem(self.p);
            if !r.is_zero() {
                return v;
            }
            y = q;
            v += 1;
        }
    }

    fn divides(&self, x: &BigInt) -> bool {
        (x % self.p).is_zero()
    }

    fn reduce(&self, x: &BigInt) -> BigInt {
        x.mod_floor(self.p)
    }

    fn inverse(&self, x: &BigInt) -> BigInt {
        let e = self.reduce(x).extended_gcd(self.p);
        assert!(e.gcd.is_one(), "not invertible mod p");
        e.x.mod_floor(self.p)
    }

    /// `p`-th root mod `p`: the Frobenius is the identity on the prime field.
    fn proot(&self, x: &BigInt) -> BigInt {
        self.reduce(x)
    }

    fn half(&self) -> BigInt {
        if self.p == &BigInt::from(2) {
            BigInt::zero()
        } else {
            self.inverse(&BigInt::from(2))
        }
    }

    fn pow(&self, k: u32) -> BigInt {
        num_traits::pow(self.p.clone(), k as usize)
    }

    fn exact(&self, x: &BigInt, k: u32) -> BigInt {
        let d = self.pow(k);
        debug_assert!((x % &d).is_zero(), "inexact division in Tate's algorithm");
        x / d
    }

    fn is_square(&self, x: &BigInt) -> bool {
        let x = self.reduce(x);
        if x.is_zero() || self.p == &BigInt::from(2) {
            return true;
        }
        let e = (self.p - 1u32) >> 1u32;
        x.modpow(&e, self.p).is_one()
    }

    /// Whether `a X^2 + b X + c` has a root mod `p`.
    fn quad_roots(&self, a: &BigInt, b: &BigInt, c: &BigInt) -> bool {
        let (a, b, c) = (self.reduce(a), self.reduce(b), self.reduce(c));
        if a.is_zero() {
            return !b.is_zero() || c.is_zero();
        }
        if self.p == &BigInt::from(2) {
            // roots 0 or 1
            return c.is_zero() || ((&a + &b + &c) % 2u32).is_zero();
        }
        self.is_square(&(&b * &b - 4 * &a * &c))
    }

    /// Number of distinct roots of `X^3 + b X^2 + c X + d` mod `p`.
    fn cubic_roots(&self, b: &BigInt, c: &BigInt, d: &BigInt) -> u32 {
        let f = vec![
            self.reduce(d),
            self.reduce(c),
            self.reduce(b),
            BigInt::one(),
        ];
        if let Some(small) = self.p.to_u64().filter(|&p| p < 1000) {
            let p = BigInt::from(small);
            return (0..small)
                .filter(|&x| {
                    let x = BigInt::from(x);
                    (((&x + &f[2]) * &x + &f[1]) * &x + &f[0])
                        .mod_floor(&p)
                        .is_zero()
                })
                .count() as u32;
        }
        // deg gcd(X^p - X, f)
        let xp = poly_powmod_x(self.p, &f, self.p);
        let mut g = xp;
        while g.len() < 2 {
            g.push(BigInt::zero());
        }
        g[1] = (&g[1] - 1u32).mod_floor(self.p);
        let d = poly_gcd(f, trim(g), self.p);
        (d.len() - 1) as u32
    }
}

fn trim(mut f: Vec<BigInt>) -> Vec<BigInt> {
    while f.len() > 1 && f.last().is_some_and(|c| c.is_zero()) {
        f.pop();
    }
    if f.is_empty() {
        f.push(BigInt::zero());
    }
    f
}

/// `(a * b) mod f` for monic `f` of degree 3, coefficients mod `p`.
fn poly_mulmod(a: &[BigInt], b: &[BigInt], f: &[BigInt], p: &BigInt) -> Vec<BigInt> {
    let mut prod = vec![BigInt::zero(); a.len() + b.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            prod[i + j] += x * y;
        }
    }
    let deg = f.len() - 1;
    for k in (deg..prod.len()).rev() {
        let lead = prod[k].mod_floor(p);
        if lead.is_zero() {
            continue;
        }
        for (i, fi) in f.iter().enumerate() {
            prod[k - deg + i] -= &lead * fi;
        }
    }
    prod.truncate(deg);
    prod.into_iter().map(|c| c.mod_floor(p)).collect()
}

fn poly_powmod_x(e: &BigInt, f: &[BigInt], p: &BigInt) -> Vec<BigInt> {
    let deg = f.len() - 1;
    let mut base = vec![BigInt::zero(); deg];
    base[1] = BigInt::one();
    let mut acc = vec![BigInt::zero(); deg];
    acc[0] = BigInt::one();
    for i in (0..e.bits()).rev() {
        acc = poly_mulmod(&acc, &acc, f, p);
        if e.bit(i) {
            acc = poly_mulmod(&acc, &base, f, p);
        }
    }
    acc
}

fn poly_rem(mut a: Vec<BigInt>, b: &[BigInt], p: &BigInt) -> Vec<BigInt> {
    let db = b.len() - 1;
    let inv = b[db].mod_floor(p).extended_gcd(p).x.mod_floor(p);
    while a.len() > db && !(a.len() == 1 && a[0].is_zero()) {
        let da = a.len() - 1;
        let coef = (a[da].clone() * &inv).mod_floor(p);
        for (i, bi) in b.iter().enumerate() {
            a[da - db + i] = (&a[da - db + i] - &coef * bi).mod_floor(p);
        }
        a = trim(a);
        if a.len() - 1 < db || (a.len() == 1 && a[0].is_zero()) {
            break;
        }
    }
    a
}

fn poly_gcd(mut a: Vec<BigInt>, mut b: Vec<BigInt>, p: &BigInt) -> Vec<BigInt> {
    a = trim(a.into_iter().map(|c| c.mod_floor(p)).collect());
    b = trim(b.into_iter().map(|c| c.mod_floor(p)).collect());
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = poly_rem(a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// Runs Tate's algorithm for `curve` at the prime `p`.
pub fn reduction_data(curve: &WeierstrassCurve, p: &BigInt) -> LocalData {
    let l = Local { p };
    let two = BigInt::from(2);
    let three = BigInt::from(3);
    let is2 = p == &two;
    let is3 = p == &three;
    let half = l.half();
    let mut c = curve.clone();
    let mut scaling = 0u32;

    loop {
        let (b2, b4, b6, _) = c.b_invariants();
        let c4 = c.c4();
        let vd = l.val(c.discriminant());
        let done = |kodaira, reduction, f, tamagawa, c: WeierstrassCurve| LocalData {
            prime: p.clone(),
            kodaira,
            reduction,
            conductor_exponent: f,
            tamagawa,
            discriminant_valuation: vd,
            scaling_exponent: scaling,
            minimal_model: c,
        };
        if vd == 0 {
            return done(Kodaira::I(0), Reduction::Good, 0, 1, c);
        }
        if !l.divides(&c4) {
            // split iff -c6 is a square in Q_p
            let minus_c6 = -c.c6();
            let split = if is2 {
                minus_c6.mod_floor(&BigInt::from(8)).is_one()
            } else {
                l.is_square(&minus_c6)
            };
            let (reduction, tamagawa) = if split {
                (Reduction::SplitMultiplicative, vd)
            } else if vd % 2 == 0 {
                (Reduction::NonsplitMultiplicative, 2)
            } else {
                (Reduction::NonsplitMultiplicative, 1)
            };
            return done(Kodaira::I(vd), reduction, 1, tamagawa, c);
        }

        // additive: move the singular point to (0, 0)
        let [a1, a2, a3, a4, a6] = c.a_invariants().clone();
        let (r, t) = if is2 {
            if l.divides(&b2) {
                let r = l.proot(&a4);
                let t = l.proot(&(((&r + &a2) * &r + &a4) * &r + &a6));
                (r, t)
            } else {
                let inv = l.inverse(&a1);
                let r = &inv * &a3;
                let t = &inv * (&a4 + &r * &r);
                (r, t)
            }
        } else if is3 {
            let r = if l.divides(&b2) {
                l.proot(&-&b6)
            } else {
                -l.inverse(&b2) * &b4
            };
            let t = &a1 * &r + &a3;
            (r, t)
        } else {
            let r = -l.inverse(&BigInt::from(12)) * &b2;
            let t = -&half * (&a1 * &r + &a3);
            (r, t)
        };
        let (r, t) = (l.reduce(&r), l.reduce(&t));
        c = c.rst_transform(&r, &BigInt::zero(), &t);
        let (_, _, b6, b8) = c.b_invariants();
        let [a1, a2, a3, a4, a6] = c.a_invariants().clone();
        debug_assert!(l.divides(&a3) && l.divides(&a4) && l.divides(&a6));

        if l.val(&a6) < 2 {
            return done(Kodaira::II, Reduction::Additive, vd, 1, c);
        }
        if l.val(&b8) < 3 {
            return done(Kodaira::III, Reduction::Additive, vd - 1, 2, c);
        }
        if l.val(&b6) < 3 {
            let cp = if l.quad_roots(&BigInt::one(), &l.exact(&a3, 1), &-l.exact(&a6, 2)) {
                3
            } else {
                1
            };
            return done(Kodaira::IV, Reduction::Additive, vd - 2, cp, c);
        }

        // p | a1, a2; p^2 | a3, a4; p^3 | a6
        let (s, t) = if is2 {
            (l.proot(&a2), p * l.proot(&l.exact(&a6, 2)))
        } else if is3 {
            (a1.clone(), a3.clone())
        } else {
            (-&a1 * &half, -&a3 * &half)
        };
        c = c.rst_transform(&BigInt::zero(), &s, &t);
        let [_, a2, _, a4, a6] = c.a_invariants().clone();

        let b = l.exact(&a2, 1);
        let cc_ = l.exact(&a4, 2);
        let d = l.exact(&a6, 3);
        let bb = &b * &b;
        let cc = &cc_ * &cc_;
        let bc = &b * &cc_;
        let w = 27 * &d * &d - &bb * &cc + 4 * &b * &bb * &d - 18 * &bc * &d + 4 * &cc_ * &cc;
        let x = 3 * &cc_ - &bb;
        let sw = if l.divides(&w) {
            if l.divides(&x) {
                3
            } else {
                2
            }
        } else {
            1
        };

        if sw == 1 {
            let cp = 1 + l.cubic_roots(&b, &cc_, &d);
            return done(Kodaira::IStar(0), Reduction::Additive, vd - 4, cp, c);
        }

        if sw == 2 {
            // double root: move it to T = 0
            let r = if is2 {
                l.proot(&cc_)
            } else if is3 {
                &cc_ * l.inverse(&b)
            } else {
                (&bc - 9 * &d) * l.inverse(&(2 * &x))
            };
            let r = p * l.reduce(&r);
            c = c.rst_transform(&r, &BigInt::zero(), &BigInt::zero());
            let mut ix = 3u32;
            let mut iy = 3u32;
            let mut mx = l.pow(2);
            let mut my = mx.clone();
            let cp;
            loop {
                let [_, a2, a3, a4, a6] = c.a_invariants().clone();
                let a2t = l.exact(&a2, 1);
                let a3t = &a3 / &my;
                let a4t = &a4 / (p * &mx);
                let a6t = &a6 / (&mx * &my);
                if l.divides(&(&a3t * &a3t + 4 * &a6t)) {
                    let t = if is2 {
                        &my * l.proot(&a6t)
                    } else {
                        &my * l.reduce(&(-&a3t * &half))
                    };
                    c = c.rst_transform(&BigInt::zero(), &BigInt::zero(), &t);
                    my *= p;
                    iy += 1;
                    let [_, a2, a3, a4, a6] = c.a_invariants().clone();
                    let a2t = l.exact(&a2, 1);
                    let _a3t = &a3 / &my;
                    let a4t = &a4 / (p * &mx);
                    let a6t = &a6 / (&mx * &my);
                    if l.divides(&(&a4t * &a4t - 4 * &a6t * &a2t)) {
                        let r = if is2 {
                            &mx * l.proot(&(&a6t * l.inverse(&a2t)))
                        } else {
                            &mx * l.reduce(&(-&a4t * l.inverse(&(2 * &a2t))))
                        };
                        c = c.rst_transform(&r, &BigInt::zero(), &BigInt::zero());
                        mx *= p;
                        ix += 1;
                    } else {
                        cp = if l.quad_roots(&a2t, &a4t, &a6t) { 4 } else { 2 };
                        break;
                    }
                } else {
                    cp = if l.quad_roots(&BigInt::one(), &a3t, &-&a6t) {
                        4
                    } else {
                        2
                    };
                    let _ = (a2t, a4t);
                    break;
                }
            }
            let m = ix + iy - 5;
            return done(Kodaira::IStar(m), Reduction::Additive, vd - m - 4, cp, c);
        }

        // triple root: move it to T = 0
        let r = if is2 {
            b.clone()
        } else if is3 {
            l.proot(&-&d)
        } else {
            -&b * l.inverse(&three)
        };
        let r = p * l.reduce(&r);
        c = c.rst_transform(&r, &BigInt::zero(), &BigInt::zero());
        let [_, _, a3, _, a6] = c.a_invariants().clone();
        let a3t = l.exact(&a3, 2);
        let a6t = l.exact(&a6, 4);
        if !l.divides(&(&a3t * &a3t + 4 * &a6t)) {
            let cp = if l.quad_roots(&BigInt::one(), &a3t, &-&a6t) {
                3
            } else {
                1
            };
            return done(Kodaira::IVStar, Reduction::Additive, vd - 6, cp, c);
        }
        let t = if is2 {
            -l.pow(2) * l.proot(&a6t)
        } else {
            l.pow(2) * l.reduce(&(-&a3t * &half))
        };
        c = c.rst_transform(&BigInt::zero(), &BigInt::zero(), &t);
        let [_, _, _, a4, a6] = c.a_invariants().clone();
        if l.val(&a4) < 4 {
            return done(Kodaira::IIIStar, Reduction::Additive, vd - 7, 2, c);
        }
        if l.val(&a6) < 6 {
            return done(Kodaira::IIStar, Reduction::Additive, vd - 8, 1, c);
        }
        // non-minimal: divide out and start over
        c = c.scaled_down(p);
        scaling += 1;
    }
}

pub fn reduction_data_u64(curve: &WeierstrassCurve, p: u64) -> LocalData {
    reduction_data(curve, &BigInt::from(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(a: [i64; 5]) -> WeierstrassCurve {
        WeierstrassCurve::from_i64(a).unwrap()
    }

    fn local(a: [i64; 5], p: u64) -> (Kodaira, u32, u32) {
        let d = reduction_data_u64(&curve(a), p);
        (d.kodaira, d.conductor_exponent, d.tamagawa)
    }

    #[test]
    fn curve_11a1() {
        let d = reduction_data_u64(&curve([0, -1, 1, -10, -20]), 11);
        assert_eq!(d.kodaira, Kodaira::I(5));
        assert_eq!(d.reduction, Reduction::SplitMultiplicative);
        assert_eq!(d.tamagawa, 5);
        assert_eq!(d.conductor_exponent, 1);
        assert_eq!(
            reduction_data_u64(&curve([0, -1, 1, -10, -20]), 2).reduction,
            Reduction::Good
        );
    }

    #[test]
    fn curve_14a1_both_primes() {
        let e = [1, 0, 1, 4, -6];
        let d2 = reduction_data_u64(&curve(e), 2);
        assert_eq!(d2.reduction, Reduction::NonsplitMultiplicative);
        assert_eq!((d2.kodaira, d2.tamagawa), (Kodaira::I(6), 2));
        let d7 = reduction_data_u64(&curve(e), 7);
        assert_eq!(d7.reduction, Reduction::SplitMultiplicative);
        assert_eq!((d7.kodaira, d7.tamagawa), (Kodaira::I(3), 3));
    }

    #[test]
    fn additive_types() {
        // y^2 = x^3 - x: conductor 32, type III at 2
        assert_eq!(local([0, 0, 0, -1, 0], 2), (Kodaira::III, 5, 2));
        // y^2 = x^3 + 1: conductor 36
        assert_eq!(local([0, 0, 0, 0, 1], 2).1, 2);
        assert_eq!(local([0, 0, 0, 0, 1], 3).1, 2);
        // 27a1: y^2 + y = x^3 - 7, IV* at 3 with conductor exponent 3
        assert_eq!(local([0, 0, 1, 0, -7], 3).1, 3);
        // y^2 = x^3 + 5x is III; y^2 = x^3 + 25x is I0* with T(T^2 + 1) split mod 5
        assert_eq!(local([0, 0, 0, 5, 0], 5), (Kodaira::III, 2, 2));
        assert_eq!(local([0, 0, 0, 25, 0], 5), (Kodaira::IStar(0), 2, 4));
        assert_eq!(local([0, 0, 0, 75, 0], 5), (Kodaira::IStar(0), 2, 2));
    }

    #[test]
    fn non_minimal_models_are_reduced() {
        // 11a1 scaled by u = 5: a_i * 5^i
        let scaled = curve([0, -25, 125, -6250, -312500]);
        let d = reduction_data_u64(&scaled, 5);
        assert_eq!(d.scaling_exponent, 1);
        assert_eq!(d.reduction, Reduction::Good);
        let d11 = reduction_data_u64(&scaled, 11);
        assert_eq!((d11.kodaira, d11.tamagawa), (Kodaira::I(5), 5));
    }
}
