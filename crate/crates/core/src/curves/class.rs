use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use super::{real_period, reduction_data, torsion_order, CurveError, LocalData, WeierstrassCurve};
use crate::arith::{agm, pi, ArithError, BigReal, FactoredInteger, Precision};
use crate::triples::AbcTriple;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassError {
    #[error("twist must be nonzero")]
    ZeroTwist,
    #[error("twist {0} is not square-free")]
    NotSquareFree(BigInt),
    #[error(transparent)]
    Curve(#[from] CurveError),
    #[error(transparent)]
    Arith(#[from] ArithError),
    #[error("conductor exponent at {prime} differs across the class: {exponents:?}")]
    ConductorMismatch { prime: BigInt, exponents: [u32; 4] },
    #[error("local conductor {local} does not fit 2^(s-1) q^2 r / gcd(q, r) with s in [0, 5]")]
    ConductorFormula { local: BigInt },
    #[error("C_{k} = {value} is not a positive integer")]
    NonIntegralC { k: usize, value: String },
    #[error("C_k values {0:?} do not differ by powers of 4")]
    RatioNotPowerOfFour([u64; 4]),
}

/// Local data of the four curves at one prime dividing `2qr`.
#[derive(Clone, Debug)]
pub struct PrimeData {
    pub prime: BigInt,
    pub curves: [LocalData; 4],
}

impl PrimeData {
    pub fn conductor_exponent(&self) -> u32 {
        self.curves[0].conductor_exponent
    }
}

/// Per-curve ingredients of `C_k`.
#[derive(Clone, Debug)]
pub struct CurveFactors {
    /// Product of the Tamagawa numbers.
    pub tamagawa_product: u64,
    /// Order of the rational torsion subgroup.
    pub torsion: u32,
    /// `u` with `Omega_minimal = u * Omega_model`.
    pub scaling: BigInt,
    /// Real period of the model as written.
    pub period: BigReal,
}

/// The four curves attached to a triple and a square-free twist, with
/// conductor, Tamagawa coefficients and the ratio `G/L`.
#[derive(Clone, Debug)]
pub struct IsogenyClass {
    triple: AbcTriple,
    q: FactoredInteger,
    curves: [WeierstrassCurve; 4],
    two_torsion_forms: [(BigInt, BigInt); 4],
    primes: Vec<PrimeData>,
    conductor: FactoredInteger,
    s: u32,
    factors: [CurveFactors; 4],
    c: [u64; 4],
    k_star: usize,
    t: u32,
    alpha: BigReal,
    agm: BigReal,
    scale: BigReal,
    g_over_l: BigReal,
    precision: Precision,
}

/// `(A, B)` of `E_k : y^2 = x(x^2 + A x + B)` for `k = 1..4`.
pub fn class_models(a: &BigInt, b: &BigInt, c: &BigInt, q: &BigInt) -> [(BigInt, BigInt); 4] {
    let q2 = q * q;
    [
        (-2 * q * (b + c), &q2 * a * a),
        (2 * q * (a + c), &q2 * b * b),
        (-2 * q * (a - b), &q2 * c * c),
        (q * (b + c), &q2 * b * c),
    ]
}

/// Builds the class of `triple` twisted by `q` at the default precision.
pub fn build_class(triple: &AbcTriple, q: &FactoredInteger) -> Result<IsogenyClass, ClassError> {
    build_class_with(triple, q, Precision::default())
}

pub fn build_class_with(
    triple: &AbcTriple,
    q: &FactoredInteger,
    precision: Precision,
) -> Result<IsogenyClass, ClassError> {
    if q.value().is_zero() {
        return Err(ClassError::ZeroTwist);
    }
    if !q.is_square_free() {
        return Err(ClassError::NotSquareFree(q.value().clone()));
    }
    let (a, b, c) = (triple.a().value(), triple.b().value(), triple.c().value());
    let qv = q.value();
    let forms = class_models(a, b, c, qv);
    let mut curves = Vec::with_capacity(4);
    for (big_a, big_b) in &forms {
        curves.push(WeierstrassCurve::two_torsion_form(
            big_a.clone(),
            big_b.clone(),
        )?);
    }
    let curves: [WeierstrassCurve; 4] = curves.try_into().expect("four curves");

    // every bad prime divides 2qr
    let r = triple.radical();
    let candidates = FactoredInteger::from_u64(2).lcm(&q.abs()).lcm(r);
    let mut primes = Vec::new();
    let mut conductor_factors = Vec::new();
    for p in candidates.primes() {
        let p = BigInt::from(p.clone());
        let local: Vec<LocalData> = curves.iter().map(|e| reduction_data(e, &p)).collect();
        let local: [LocalData; 4] = local.try_into().expect("four curves");
        let exponents = [0, 1, 2, 3].map(|k| local[k].conductor_exponent);
        if exponents.iter().any(|&f| f != exponents[0]) {
            return Err(ClassError::ConductorMismatch {
                prime: p,
                exponents,
            });
        }
        if exponents[0] > 0 {
            conductor_factors.push((p.magnitude().clone(), exponents[0]));
        }
        primes.push(PrimeData {
            prime: p,
            curves: local,
        });
    }
    let conductor = FactoredInteger::from_factors(false, conductor_factors)?;
    let s = solve_s(&conductor, q, r).ok_or_else(|| ClassError::ConductorFormula {
        local: conductor.value().clone(),
    })?;

    let work = precision.widened(10);
    let alpha_sq = if qv.is_positive() {
        BigReal::from_ratio(b.clone(), c.clone(), work)
    } else {
        BigReal::from_ratio(a.clone(), c.clone(), work)
    };
    let alpha = alpha_sq.sqrt()?;
    let agm_value = agm(&BigReal::one(work), &alpha, work)?.value;
    let pi_w = pi(work);
    // sqrt(|q| c) AGM(1, alpha) / pi
    let scale = &(&BigReal::from_integer(qv.abs() * c, work).sqrt()? * &agm_value) / &pi_w;

    let mut factors = Vec::with_capacity(4);
    let mut cs = [0u64; 4];
    for k in 0..4 {
        let tamagawa_product: u64 = primes
            .iter()
            .map(|pd| pd.curves[k].tamagawa as u64)
            .product();
        let scaling: BigInt = primes
            .iter()
            .map(|pd| num_traits::pow(pd.prime.clone(), pd.curves[k].scaling_exponent as usize))
            .product();
        let (big_a, big_b) = &forms[k];
        let torsion = torsion_order(big_a, big_b);
        let period = real_period(big_a, big_b, work)?;
        let value = &(&(&period * &scale)
            * &BigReal::from_integer(&scaling * tamagawa_product, work))
            / &BigReal::from_i64((torsion * torsion) as i64, work);
        let rounded = value.round();
        let residual = (&value - &BigReal::from_integer(rounded.clone(), work)).abs();
        let tolerance = BigReal::from_ratio(1, 1_000_000_000_000i64, work);
        if !rounded.is_positive() || residual > tolerance {
            return Err(ClassError::NonIntegralC {
                k: k + 1,
                value: value.to_sig_string(20),
            });
        }
        cs[k] = rounded.to_u64().ok_or_else(|| ClassError::NonIntegralC {
            k: k + 1,
            value: value.to_sig_string(20),
        })?;
        factors.push(CurveFactors {
            tamagawa_product,
            torsion,
            scaling,
            period: period.with_precision(precision),
        });
    }
    let factors: [CurveFactors; 4] = factors.try_into().expect("four curves");

    let min = *cs.iter().min().expect("nonempty");
    let max = *cs.iter().max().expect("nonempty");
    let k_star = cs.iter().position(|&v| v == min).expect("min attained") + 1;
    if cs
        .iter()
        .any(|&v| v % min != 0 || !is_power_of_four(v / min))
    {
        return Err(ClassError::RatioNotPowerOfFour(cs));
    }
    let t = (max / min).trailing_zeros() / 2;
    if t > 5 {
        return Err(ClassError::RatioNotPowerOfFour(cs));
    }

    let sqrt_n = BigReal::from_integer(conductor.value().clone(), work).sqrt()?;
    let g_over_l = &scale / &(&sqrt_n * &BigReal::from_integer(min, work));

    Ok(IsogenyClass {
        triple: triple.clone(),
        q: q.clone(),
        curves,
        two_torsion_forms: forms,
        primes,
        conductor,
        s,
        factors,
        c: cs,
        k_star,
        t,
        alpha: alpha.with_precision(precision),
        agm: agm_value.with_precision(precision),
        scale: scale.with_precision(precision.widened(4)),
        g_over_l: g_over_l.with_precision(precision),
        precision,
    })
}

fn is_power_of_four(n: u64) -> bool {
    n.is_power_of_two() && n.trailing_zeros() % 2 == 0
}

/// `s` with `N = 2^(s-1) q^2 r / gcd(q, r)`, if one exists in `[0, 5]`.
fn solve_s(n: &FactoredInteger, q: &FactoredInteger, r: &FactoredInteger) -> Option<u32> {
    let q = q.abs();
    let m = q.mul(&q).mul(r).checked_div(&q.gcd(r))?;
    let two = num_bigint::BigUint::from(2u32);
    let vn = n.valuation(&two) as i64;
    let vm = m.valuation(&two) as i64;
    let s = vn - vm + 1;
    if !(0..=5).contains(&s) {
        return None;
    }
    let odd = |f: &FactoredInteger| f.value() >> f.valuation(&two);
    (odd(n) == odd(&m)).then_some(s as u32)
}

impl IsogenyClass {
    pub fn triple(&self) -> &AbcTriple {
        &self.triple
    }

    pub fn q(&self) -> &FactoredInteger {
        &self.q
    }

    /// `E_1 .. E_4`.
    pub fn curves(&self) -> &[WeierstrassCurve; 4] {
        &self.curves
    }

    /// `(A, B)` of each curve `y^2 = x(x^2 + A x + B)`.
    pub fn two_torsion_forms(&self) -> &[(BigInt, BigInt); 4] {
        &self.two_torsion_forms
    }

    /// Local data at every prime dividing `2qr`.
    pub fn prime_data(&self) -> &[PrimeData] {
        &self.primes
    }

    pub fn conductor(&self) -> &FactoredInteger {
        &self.conductor
    }

    /// The exponent in `N = 2^(s-1) q^2 r / gcd(q, r)`.
    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn curve_factors(&self) -> &[CurveFactors; 4] {
        &self.factors
    }

    /// `C_1 .. C_4`.
    pub fn c(&self) -> [u64; 4] {
        self.c
    }

    /// Smallest `k` (1-based) with `C_k` minimal.
    pub fn k_star(&self) -> usize {
        self.k_star
    }

    pub fn c_min(&self) -> u64 {
        self.c[self.k_star - 1]
    }

    /// `log_4(max C / min C)`.
    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn alpha(&self) -> &BigReal {
        &self.alpha
    }

    /// `AGM(1, alpha)`.
    pub fn agm(&self) -> &BigReal {
        &self.agm
    }

    /// `sqrt(|q| c) AGM(1, alpha) / pi`, so that `|Sha_k| = L * scale / C_k`.
    pub fn sha_scale(&self) -> &BigReal {
        &self.scale
    }

    /// `G / L = sqrt(|q| c) AGM(1, alpha) / (pi C_min sqrt N)`.
    pub fn g_over_l(&self) -> &BigReal {
        &self.g_over_l
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Primes `l` with `l^2 | N`.
    pub fn bad_prime_squares(&self) -> Vec<BigInt> {
        self.primes
            .iter()
            .filter(|pd| pd.conductor_exponent() >= 2)
            .map(|pd| pd.prime.clone())
            .collect()
    }

    /// `a_p` at every prime dividing `N`.
    pub fn bad_primes(&self) -> Vec<(BigInt, i32)> {
        self.primes
            .iter()
            .filter(|pd| pd.conductor_exponent() > 0)
            .map(|pd| (pd.prime.clone(), pd.curves[0].bad_ap().expect("bad prime")))
            .collect()
    }

    /// Primes dividing `2qr` at which the class has good reduction, with a
    /// model that is minimal there.
    pub fn good_primes_needing_minimal_model(&self) -> Vec<(BigInt, WeierstrassCurve)> {
        self.primes
            .iter()
            .filter(|pd| pd.conductor_exponent() == 0)
            .map(|pd| (pd.prime.clone(), pd.curves[0].minimal_model.clone()))
            .collect()
    }

    /// Stable identity of `(a, c, q)`, hex SHA-256.
    pub fn hash(&self) -> String {
        class_hash(&self.triple, &self.q)
    }
}

pub fn class_hash(triple: &AbcTriple, q: &FactoredInteger) -> String {
    let text = format!(
        "freysha-class-v1\na={}\nc={}\nq={}\n",
        triple.a(),
        triple.c(),
        q
    );
    let digest = Sha256::digest(text.as_bytes());
    let mut out = String::with_capacity(64);
    for byte in digest.iter() {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

impl IsogenyClass {
    /// `N` as a big integer.
    pub fn conductor_value(&self) -> &BigInt {
        self.conductor.value()
    }

    /// Whether `q` divides `r`.
    pub fn q_divides_r(&self) -> bool {
        let r = self.triple.radical().value();
        (r % self.q.value()).is_zero() || self.q.value().abs().is_one()
    }
}
