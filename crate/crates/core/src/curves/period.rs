use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::arith::{agm, pi, ArithError, BigReal, Precision};

/// Real period `\int_{E(R)} |dx / 2y|` of `y^2 = x(x^2 + A x + B)`, counting
/// both components when the discriminant is positive.
pub fn real_period(a: &BigInt, b: &BigInt, precision: Precision) -> Result<BigReal, ArithError> {
    let work = precision.widened(10);
    let disc: BigInt = a * a - b * BigInt::from(4);
    let two_pi = pi(work).mul_int(2);
    let real = |n: &BigInt| BigReal::from_integer(n.clone(), work);
    let omega = if disc.is_positive() {
        let root = real(&disc).sqrt()?;
        let minus_a = -real(a);
        let hi = (&minus_a + &root).mul_pow2(-1);
        let lo = (&minus_a - &root).mul_pow2(-1);
        let zero = BigReal::zero(work);
        let mut e = [zero, hi, lo];
        e.sort();
        let [e3, e2, e1] = e;
        let m = agm(&(&e1 - &e3).sqrt()?, &(&e1 - &e2).sqrt()?, work)?.value;
        &two_pi / &m
    } else if disc.is_zero() {
        return Err(ArithError::Domain("singular cubic"));
    } else {
        // one real root at 0: beta = sqrt(B), alpha = A
        let beta = real(b).sqrt()?;
        let m = agm(
            &beta.sqrt()?.mul_int(2),
            &(&beta.mul_int(2) + &real(a)).sqrt()?,
            work,
        )?
        .value;
        &two_pi / &m
    };
    Ok(omega.with_precision(precision))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn omega(a: i64, b: i64) -> BigReal {
        real_period(&BigInt::from(a), &BigInt::from(b), Precision::digits(30)).unwrap()
    }

    #[test]
    fn lemniscatic_periods() {
        // reference values by numerical quadrature of dx / sqrt(f) over E(R)
        assert_eq!(omega(0, -1).to_sig_string(20), "5.2441151085842396209");
        assert_eq!(omega(0, 1).to_sig_string(20), "3.7081493546027438369");
    }
}
