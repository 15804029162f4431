use alloc::string::String;
use core::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::CurveError;

/// An integral Weierstrass model `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeierstrassCurve {
    a: [BigInt; 5],
    discriminant: BigInt,
}

impl WeierstrassCurve {
    pub fn new(
        a1: BigInt,
        a2: BigInt,
        a3: BigInt,
        a4: BigInt,
        a6: BigInt,
    ) -> Result<Self, CurveError> {
        let a = [a1, a2, a3, a4, a6];
        let discriminant = discriminant_of(&a);
        if discriminant.is_zero() {
            return Err(CurveError::Singular);
        }
        Ok(WeierstrassCurve { a, discriminant })
    }

    pub fn from_i64(a: [i64; 5]) -> Result<Self, CurveError> {
        let [a1, a2, a3, a4, a6] = a.map(BigInt::from);
        Self::new(a1, a2, a3, a4, a6)
    }

    /// `y^2 = x(x^2 + A x + B)`.
    pub fn two_torsion_form(big_a: BigInt, big_b: BigInt) -> Result<Self, CurveError> {
        Self::new(BigInt::zero(), big_a, BigInt::zero(), big_b, BigInt::zero())
    }

    pub fn a1(&self) -> &BigInt {
        &self.a[0]
    }
    pub fn a2(&self) -> &BigInt {
        &self.a[1]
    }
    pub fn a3(&self) -> &BigInt {
        &self.a[2]
    }
    pub fn a4(&self) -> &BigInt {
        &self.a[3]
    }
    pub fn a6(&self) -> &BigInt {
        &self.a[4]
    }

    pub fn a_invariants(&self) -> &[BigInt; 5] {
        &self.a
    }

    pub fn discriminant(&self) -> &BigInt {
        &self.discriminant
    }

    /// `(b2, b4, b6, b8)`.
    pub fn b_invariants(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        b_invariants(&self.a)
    }

    pub fn c4(&self) -> BigInt {
        let (b2, b4, _, _) = self.b_invariants();
        &b2 * &b2 - 24 * b4
    }

    pub fn c6(&self) -> BigInt {
        let (b2, b4, b6, _) = self.b_invariants();
        -(&b2 * &b2 * &b2) + 36 * &b2 * b4 - 216 * b6
    }

    /// `(A, B)` when the model is `y^2 = x(x^2 + A x + B)`.
    pub fn as_two_torsion_form(&self) -> Option<(&BigInt, &BigInt)> {
        let [a1, a2, a3, a4, a6] = &self.a;
        (a1.is_zero() && a3.is_zero() && a6.is_zero()).then_some((a2, a4))
    }

    /// Change of variables `x = x' + r`, `y = y' + s x' + t`.
    pub fn rst_transform(&self, r: &BigInt, s: &BigInt, t: &BigInt) -> Self {
        let [a1, a2, a3, a4, a6] = &self.a;
        let n1 = a1 + 2 * s;
        let n2 = a2 - s * a1 + 3 * r - s * s;
        let n3 = a3 + r * a1 + 2 * t;
        let n4 = a4 - s * a3 + 2 * r * a2 - (t + r * s) * a1 + 3 * r * r - 2 * s * t;
        let n6 = a6 + r * a4 + r * r * a2 + r * r * r - t * a3 - t * t - r * t * a1;
        WeierstrassCurve::new(n1, n2, n3, n4, n6).expect("isomorphic model is nonsingular")
    }

    /// Divides `a_i` by `u^i`; the caller guarantees exactness.
    pub(crate) fn scaled_down(&self, u: &BigInt) -> Self {
        let mut out = self.a.clone();
        for (slot, weight) in out.iter_mut().zip([1u32, 2, 3, 4, 6]) {
            let w = num_traits::pow(u.clone(), weight as usize);
            debug_assert!((&*slot % &w).is_zero());
            *slot = &*slot / w;
        }
        let [a1, a2, a3, a4, a6] = out;
        WeierstrassCurve::new(a1, a2, a3, a4, a6).expect("scaled model is nonsingular")
    }

    /// Right-hand side value `x^3 + a2 x^2 + a4 x + a6` (for `a1 = a3 = 0`).
    pub fn rhs(&self, x: &BigInt) -> BigInt {
        ((x + self.a2()) * x + self.a4()) * x + self.a6()
    }
}

pub(crate) fn b_invariants(a: &[BigInt; 5]) -> (BigInt, BigInt, BigInt, BigInt) {
    let [a1, a2, a3, a4, a6] = a;
    let b2 = a1 * a1 + 4 * a2;
    let b4 = 2 * a4 + a1 * a3;
    let b6 = a3 * a3 + 4 * a6;
    let b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    (b2, b4, b6, b8)
}

fn discriminant_of(a: &[BigInt; 5]) -> BigInt {
    let (b2, b4, b6, b8) = b_invariants(a);
    -(&b2 * &b2 * &b8) - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
}

fn term(out: &mut String, coeff: &BigInt, monomial: &str) {
    use core::fmt::Write;
    if coeff.is_zero() {
        return;
    }
    let sign = if coeff.is_negative() { " - " } else { " + " };
    out.push_str(sign);
    let mag = coeff.abs();
    if monomial.is_empty() {
        let _ = write!(out, "{mag}");
    } else if mag == BigInt::from(1) {
        out.push_str(monomial);
    } else {
        let _ = write!(out, "{mag}{monomial}");
    }
}

impl fmt::Display for WeierstrassCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a1, a2, a3, a4, a6] = &self.a;
        let mut lhs = String::from("y^2");
        term(&mut lhs, a1, "xy");
        term(&mut lhs, a3, "y");
        let mut rhs = String::from("x^3");
        term(&mut rhs, a2, "x^2");
        term(&mut rhs, a4, "x");
        term(&mut rhs, a6, "");
        write!(f, "{lhs} = {rhs}")
    }
}
