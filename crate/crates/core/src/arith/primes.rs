//! Primality testing and small-prime sieves.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Rounds of Miller-Rabin used for integers that do not fit in 64 bits.
pub const PROBABILISTIC_ROUNDS: usize = 64;

/// All primes `<= limit`, ascending.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    out
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn strong_probable_prime_u64(n: u64, base: u64) -> bool {
    let base = base % n;
    if base == 0 {
        return true;
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    let mut x = pow_mod(base, d, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for all 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &SMALL {
        if n % p == 0 {
            return n == p;
        }
    }
    // The first twelve prime bases are a proven witness set below 3.3e24.
    SMALL.iter().all(|&b| strong_probable_prime_u64(n, b))
}

fn strong_probable_prime(n: &BigUint, base: &BigUint) -> bool {
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    let mut x = base.modpow(&d, n);
    if x == one || x == n_minus_one {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == n_minus_one {
            return true;
        }
    }
    false
}

/// Primality of an arbitrary non-negative integer.
///
/// Exact below 2^64; above, Miller-Rabin with [`PROBABILISTIC_ROUNDS`]
/// bases drawn from a generator seeded by `n` itself, so the verdict is
/// reproducible.
pub fn is_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    for p in primes_up_to(1000) {
        if (n % p).is_zero() {
            return false;
        }
    }
    let fixed = [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if !fixed
        .iter()
        .all(|&b| strong_probable_prime(n, &BigUint::from(b)))
    {
        return false;
    }
    let mut seed = [0u8; 32];
    for (slot, byte) in seed.iter_mut().zip(n.to_bytes_le()) {
        *slot = byte;
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    let span = n - 3u32;
    let mut bytes = alloc::vec![0u8; n.to_bytes_le().len() + 8];
    (0..PROBABILISTIC_ROUNDS.saturating_sub(fixed.len())).all(|_| {
        rng.fill_bytes(&mut bytes);
        let base = BigUint::from_bytes_le(&bytes) % &span + 2u32;
        strong_probable_prime(n, &base)
    })
}

/// Integer square root of a `u64`.
pub fn isqrt_u64(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    // Newton from above; the iterate decreases monotonically to the floor.
    let mut x = 1u64 << ((64 - n.leading_zeros()).div_ceil(2));
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Full factorization of a `u64`: trial division by small primes, then
/// Pollard rho (Brent) on the cofactor.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    if n <= 1 {
        return out;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    }
    let mut stack = Vec::new();
    if n > 1 {
        stack.push(n);
    }
    let mut primes = Vec::new();
    while let Some(m) = stack.pop() {
        if is_prime_u64(m) {
            primes.push(m);
            continue;
        }
        let d = rho_u64(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    for p in primes {
        match out.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => out.push((p, 1)),
        }
    }
    out
}

fn rho_u64(n: u64) -> u64 {
    if n % 2 == 0 {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut r = 1u64;
        let mut ys = 0u64;
        let m = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sieve_matches_trial_division() {
        let sieved = primes_up_to(2000);
        let trial: Vec<u64> = (2..=2000u64)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect();
        assert_eq!(sieved, trial);
        assert!(primes_up_to(1).is_empty());
    }

    #[test]
    fn u64_primality_edge_cases() {
        assert!(!is_prime_u64(0));
        assert!(!is_prime_u64(1));
        assert!(is_prime_u64(2));
        // strong pseudoprime to bases 2..37 would need > 3.3e24
        assert!(!is_prime_u64(3_215_031_751));
        assert!(is_prime_u64(18_446_744_073_709_551_557));
        assert!(!is_prime_u64(18_446_744_073_709_551_615));
        assert!(is_prime_u64(257_390_962_660_901));
        assert!(is_prime_u64(17_216_879));
    }

    #[test]
    fn big_primality() {
        // 2^89 - 1 is a Mersenne prime; 2^83 - 1 is not
        let m89 = (BigUint::one() << 89u32) - 1u32;
        let m83 = (BigUint::one() << 83u32) - 1u32;
        assert!(is_prime(&m89));
        assert!(!is_prime(&m83));
    }

    #[test]
    fn factor_u64_products() {
        assert_eq!(factor_u64(72), vec![(2, 3), (3, 2)]);
        assert_eq!(factor_u64(1), vec![]);
        let n = 17_216_879u64 * 1_000_003;
        assert_eq!(factor_u64(n), vec![(1_000_003, 1), (17_216_879, 1)]);
        assert_eq!(
            factor_u64(4_294_967_291 * 3),
            vec![(3, 1), (4_294_967_291, 1)]
        );
    }

    #[test]
    fn isqrt_boundaries() {
        for n in [
            0u64,
            1,
            2,
            3,
            4,
            15,
            16,
            17,
            u64::MAX,
            (1 << 32) * ((1 << 32) - 1),
        ] {
            let r = isqrt_u64(n);
            assert!(r as u128 * r as u128 <= n as u128);
            assert!((r as u128 + 1) * (r as u128 + 1) > n as u128);
        }
    }
}
