//! Rational torsion of `y^2 = x(x^2 + A x + B)`.
//!
//! Torsion points on this integral model have integral coordinates, so
//! every search below is over integer roots of integer polynomials, found
//! by lifting roots modulo a small prime.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::arith::primes::{is_prime_u64, primes_up_to};

type Poly = Vec<BigInt>;

fn eval(p: &[BigInt], x: &BigInt) -> BigInt {
    p.iter().rev().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &[BigInt]) -> Poly {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect()
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &[BigInt], b: &[BigInt]) -> Poly {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default())
        .collect()
}

fn poly_scale(a: &[BigInt], k: i64) -> Poly {
    a.iter().map(|c| c * k).collect()
}

/// All integer roots of `p`, which must be squarefree over the rationals
/// apart from a possible power of `x`.
pub(crate) fn integer_roots(p: &[BigInt]) -> Vec<BigInt> {
    let mut poly: Poly = p.to_vec();
    while poly.last().is_some_and(|c| c.is_zero()) {
        poly.pop();
    }
    let mut roots = Vec::new();
    if poly.len() <= 1 {
        return roots;
    }
    if poly[0].is_zero() {
        roots.push(BigInt::zero());
        while poly[0].is_zero() {
            poly.remove(0);
        }
    }
    if poly.len() == 1 {
        return roots;
    }
    let lead = poly.last().unwrap().abs();
    let max_coeff = poly.iter().map(|c| c.abs()).max().unwrap();
    let bound = max_coeff / &lead + 1u32;
    let dp = derivative(&poly);
    for ell in primes_up_to(2000).into_iter().skip(2) {
        let l = BigInt::from(ell);
        if (&lead % &l).is_zero() {
            continue;
        }
        let mod_roots: Vec<u64> = (0..ell)
            .filter(|&x| eval(&poly, &BigInt::from(x)).mod_floor(&l).is_zero())
            .collect();
        let simple = mod_roots
            .iter()
            .all(|&x| !eval(&dp, &BigInt::from(x)).mod_floor(&l).is_zero());
        if !simple {
            continue;
        }
        for r in mod_roots {
            let mut x = BigInt::from(r);
            let mut modulus = l.clone();
            while modulus <= 2 * &bound + 1u32 {
                modulus = &modulus * &modulus;
                let d = eval(&dp, &x).mod_floor(&modulus);
                let inv = d.extended_gcd(&modulus).x;
                x = (&x - eval(&poly, &x) * inv).mod_floor(&modulus);
            }
            if &x * 2 > modulus {
                x -= &modulus;
            }
            if x.abs() <= bound && eval(&poly, &x).is_zero() {
                roots.push(x);
            }
        }
        roots.sort();
        roots.dedup();
        return roots;
    }
    panic!("no prime below 2000 separates the roots");
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

struct Model {
    a: BigInt,
    b: BigInt,
}

impl Model {
    fn f(&self, x: &BigInt) -> BigInt {
        x * (x * x + &self.a * x + &self.b)
    }

    fn two_torsion_x(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::zero()];
        if let Some(root) = exact_sqrt(&(&self.a * &self.a - 4 * &self.b)) {
            out.push((-&self.a + &root) / 2);
            out.push((-&self.a - &root) / 2);
        }
        out
    }

    /// Affine points `Q` with `2Q = P`.
    fn halves(&self, x0: &BigInt, y0: &BigInt) -> Vec<(BigInt, BigInt)> {
        let mut out = Vec::new();
        if y0.is_zero() {
            // translate (x0, 0) to the origin: y^2 = x(x^2 + A' x + B')
            let a1 = &self.a + 3 * x0;
            let b1 = 3 * x0 * x0 + 2 * &self.a * x0 + &self.b;
            let Some(m) = exact_sqrt(&b1) else { return out };
            for sign in [1i32, -1] {
                let x = &m * sign;
                if let Some(w) = exact_sqrt(&(&a1 + 2 * &x)) {
                    let y = &m * w;
                    out.push((x0 + &x, y.clone()));
                    out.push((x0 + &x, -y));
                }
            }
            return out;
        }
        // (x^2 - B)^2 - 4 x0 x (x^2 + A x + B)
        let b = &self.b;
        let quartic = vec![
            b * b,
            -4 * b * x0,
            -(b * BigInt::from(2) + &self.a * x0 * BigInt::from(4)),
            -4 * x0,
            BigInt::one(),
        ];
        for x in integer_roots(&quartic) {
            if let Some(y) = exact_sqrt(&self.f(&x)).filter(|y| !y.is_zero()) {
                out.push((x.clone(), y.clone()));
                out.push((x, -y));
            }
        }
        out
    }

    fn two_power_torsion(&self) -> u32 {
        let mut seen: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
        let mut frontier: Vec<(BigInt, BigInt)> = self
            .two_torsion_x()
            .into_iter()
            .map(|x| (x, BigInt::zero()))
            .collect();
        while let Some(p) = frontier.pop() {
            if !seen.insert(p.clone()) {
                continue;
            }
            for q in self.halves(&p.0, &p.1) {
                if !seen.contains(&q) {
                    frontier.push(q);
                }
            }
        }
        1 + seen.len() as u32
    }

    fn division_poly_3(&self) -> Poly {
        // 3x^4 + b2 x^3 + 3 b4 x^2 + 3 b6 x + b8 with b2 = 4A, b4 = 2B, b6 = 0, b8 = -B^2
        let (a, b) = (&self.a, &self.b);
        vec![-(b * b), BigInt::zero(), 6 * b, 4 * a, BigInt::from(3)]
    }

    fn division_poly_5(&self) -> Poly {
        let (a, b) = (&self.a, &self.b);
        let f = vec![BigInt::zero(), b.clone(), a.clone(), BigInt::one()];
        let g4 = vec![
            -2 * b * b * b,
            -4 * a * b * b,
            -10 * b * b,
            BigInt::zero(),
            10 * b,
            4 * a,
            BigInt::from(2),
        ];
        let psi3 = self.division_poly_3();
        let lhs = poly_scale(&poly_mul(&poly_mul(&f, &f), &g4), 16);
        let rhs = poly_mul(&poly_mul(&psi3, &psi3), &psi3);
        poly_sub(&lhs, &rhs)
    }

    fn has_point_with_x_root(&self, psi: &[BigInt]) -> bool {
        integer_roots(psi)
            .iter()
            .any(|x| exact_sqrt(&self.f(x)).is_some_and(|y| !y.is_zero()))
    }

    /// `#E(F_p)` by enumeration, for small odd good `p`.
    fn count_mod(&self, p: u64) -> u64 {
        let a = self
            .a
            .mod_floor(&BigInt::from(p))
            .try_into()
            .unwrap_or(0u64);
        let b = self
            .b
            .mod_floor(&BigInt::from(p))
            .try_into()
            .unwrap_or(0u64);
        let mut squares = vec![0u32; p as usize];
        for y in 0..p {
            squares[(y * y % p) as usize] += 1;
        }
        1 + (0..p)
            .map(|x| {
                let v = x * ((x * x + a * x + b) % p) % p;
                squares[v as usize] as u64
            })
            .sum::<u64>()
    }
}

/// Order of the rational torsion subgroup of `y^2 = x(x^2 + A x + B)`.
pub fn torsion_order(a: &BigInt, b: &BigInt) -> u32 {
    let model = Model {
        a: a.clone(),
        b: b.clone(),
    };
    let two_part = model.two_power_torsion();
    // odd torsion injects into E(F_p) for odd good p
    let disc: BigInt = b * b * (a * a - b * BigInt::from(4));
    let mut g = 0u64;
    let mut used = 0;
    for p in (3u64..).filter(|&p| is_prime_u64(p)) {
        if (&disc % BigInt::from(p)).is_zero() {
            continue;
        }
        g = g.gcd(&model.count_mod(p));
        used += 1;
        if used == 30 {
            break;
        }
    }
    let mut odd = 1;
    if g % 3 == 0 && model.has_point_with_x_root(&model.division_poly_3()) {
        odd = 3;
    } else if g % 5 == 0 && model.has_point_with_x_root(&model.division_poly_5()) {
        odd = 5;
    }
    two_part * odd
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn t(a: i64, b: i64) -> u32 {
        torsion_order(&BigInt::from(a), &BigInt::from(b))
    }

    #[test]
    fn known_torsion_structures() {
        // y^2 = x^3 - x: Z/2 x Z/2
        assert_eq!(t(0, -1), 4);
        // y^2 = x^3 + x: Z/2
        assert_eq!(t(0, 1), 2);
        // y^2 = x^3 + 4x: (2, 4) has order 4
        assert_eq!(t(0, 4), 4);
        // y^2 = x(x + 1)(x + 4): Z/2 x Z/4
        assert_eq!(t(5, 4), 8);
        // y^2 = x^3 + 1 moved to x -> x - 1: Z/6
        assert_eq!(t(-3, 3), 6);
    }

    #[test]
    fn integer_roots_of_cubic() {
        // (x - 1)(x + 2)(x - 3)
        let cubic: Poly = [6, -5, -2, 1].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(
            integer_roots(&cubic),
            vec![BigInt::from(-2), BigInt::from(1), BigInt::from(3)]
        );
        let with_zero: Poly = [0, 0, -4, 0, 1].iter().map(|&c| BigInt::from(c)).collect();
        assert_eq!(
            integer_roots(&with_zero),
            vec![BigInt::from(-2), BigInt::zero(), BigInt::from(2)]
        );
    }

    #[test]
    fn agrees_with_exhaustive_search() {
        let mut structures = BTreeSet::new();
        for a in -12i64..=12 {
            for b in -12i64..=12 {
                if b == 0 || a * a == 4 * b {
                    continue;
                }
                let fast = t(a, b);
                assert_eq!(fast, brute_force_torsion(a, b), "A={a} B={b}");
                structures.insert(fast);
            }
        }
        // the grid exercises 2-power parts and odd torsion
        assert!(structures.contains(&8) && structures.contains(&6));
    }

    type Pt = Option<(BigRational, BigRational)>;

    fn add(a: i64, b: i64, p: &Pt, q: &Pt) -> Pt {
        let (Some((x1, y1)), Some((x2, y2))) = (p, q) else {
            return if p.is_none() { q.clone() } else { p.clone() };
        };
        let r = |v: i64| BigRational::from_integer(BigInt::from(v));
        let lambda = if x1 != x2 {
            (y2 - y1) / (x2 - x1)
        } else if (y1 + y2).is_zero() {
            return None;
        } else {
            (r(3) * x1 * x1 + r(2) * r(a) * x1 + r(b)) / (r(2) * y1)
        };
        let x3 = &lambda * &lambda - r(a) - x1 - x2;
        let y3 = &lambda * (x1 - &x3) - y1;
        Some((x3, y3))
    }

    fn order_at_most_12(a: i64, b: i64, p: &Pt) -> bool {
        let mut acc = p.clone();
        for _ in 1..12 {
            if acc.is_none() {
                return true;
            }
            acc = add(a, b, &acc, p);
        }
        acc.is_none()
    }

    /// Integral points with small x whose order is at most 12 (Mazur).
    fn brute_force_torsion(a: i64, b: i64) -> u32 {
        let f = |x: i64| x * (x * x + a * x + b);
        let mut count = 1;
        for x in -400i64..=400 {
            let v = f(x);
            if v < 0 {
                continue;
            }
            let y = (v as f64).sqrt().round() as i64;
            if y * y != v {
                continue;
            }
            for yy in if y == 0 { vec![0] } else { vec![y, -y] } {
                let p = Some((
                    BigRational::from_integer(BigInt::from(x)),
                    BigRational::from_integer(BigInt::from(yy)),
                ));
                if order_at_most_12(a, b, &p) {
                    count += 1;
                }
            }
        }
        count
    }
}
