//! `|Sha|` from the central value, the Goldfeld-Szpiro ratio and the burden
//! estimate, and the rows of the result tables.

use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::primes::factor_u64;
use crate::arith::{
    factorize, pi, ArithError, BigReal, FactoredInteger, IterationBudget, Precision,
};
use crate::curves::IsogenyClass;
use crate::lseries::{stopping_check, LSeriesJob, SumContext};

/// Largest prime previously seen dividing an analytic `|Sha|`.
pub const RECORD_PRIME_THRESHOLD: u64 = 19861;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShaError {
    #[error("central value is not positive")]
    NonPositiveL,
    #[error("index k = {0} is outside 1..=4")]
    BadIndex(usize),
    #[error("burden logarithm is degenerate (argument at most 1)")]
    DegenerateLog,
    #[error("job has not converged")]
    NotConverged,
    #[error("partial sums converge to zero: rank > 0 suspected")]
    RankSuspect,
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// `L sqrt(|q| c) AGM(1, alpha) / (pi C_k)` without the sign check.
pub fn sha_raw(l: &BigReal, class: &IsogenyClass, k: usize) -> BigReal {
    let ck = class.c()[k - 1];
    &(l * class.sha_scale()) / &BigReal::from_integer(ck, l.precision())
}

/// `|Sha(E_k)|` predicted from `L`.
pub fn sha_from_l(l: &BigReal, class: &IsogenyClass, k: usize) -> Result<BigReal, ShaError> {
    if !(1..=4).contains(&k) {
        return Err(ShaError::BadIndex(k));
    }
    if !l.is_positive() {
        return Err(ShaError::NonPositiveL);
    }
    Ok(sha_raw(l, class, k))
}

/// `G = |Sha| / sqrt N`.
pub fn goldfeld_szpiro(sha: &BigInt, conductor: &BigInt, precision: Precision) -> BigReal {
    let work = precision.widened(6);
    let root = BigReal::from_integer(conductor.clone(), work)
        .sqrt()
        .expect("positive conductor");
    (&BigReal::from_integer(sha.clone(), work) / &root).with_precision(precision)
}

/// Nearest integer to
/// `(|Sha| log(4 sqrt|Sha| / (2^t L)) / (2 pi G 10^8))^(5/4) prod (1 - 1/l)`
/// over primes `l` with `l^2 | N`.
pub fn burden(
    sha: &BigReal,
    g: &BigReal,
    l: &BigReal,
    t: u32,
    bad_prime_squares: &[BigInt],
) -> Result<u64, ShaError> {
    let p = sha
        .precision()
        .max(g.precision())
        .max(l.precision())
        .widened(6);
    let arg = &sha.sqrt()?.mul_int(4) / &l.mul_pow2(t as i64);
    if arg <= BigReal::one(p) {
        return Err(ShaError::DegenerateLog);
    }
    let denom = &(&pi(p).mul_int(2) * g) * &BigReal::from_integer(100_000_000, p);
    let base = &(sha * &arg.ln()?) / &denom;
    let mut value = base.pow(&BigReal::from_ratio(5, 4, p))?;
    for ell in bad_prime_squares {
        let factor = BigReal::from_ratio(ell - 1, ell.clone(), p);
        value = &value * &factor;
    }
    value.round().to_u64().ok_or(ShaError::DegenerateLog)
}

/// A converged analytic `|Sha|` with the table columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShaReport {
    pub class_hash: String,
    pub a: FactoredInteger,
    pub c: FactoredInteger,
    pub q: FactoredInteger,
    pub k_star: usize,
    pub s: u32,
    pub t: u32,
    pub c_values: [u64; 4],
    pub conductor: BigInt,
    pub n_terms: u64,
    pub l: BigReal,
    pub sha_raw: BigReal,
    /// `sqrt|Sha|`.
    pub sha_root: BigInt,
    pub sha: BigInt,
    pub g: BigReal,
    pub burden: Option<u64>,
    /// `|sqrt(sha_raw) - sqrt(sha)|`.
    pub residual: BigReal,
}

impl ShaReport {
    /// `|Sha|, c, a, q, k, L, G` with six significant digits for `L` and `G`.
    pub fn row(&self) -> [String; 7] {
        use alloc::format;
        use alloc::string::ToString;
        [
            format!("{}^2", self.sha_root),
            self.c.render(),
            self.a.render(),
            self.q.value().to_string(),
            self.k_star.to_string(),
            self.l.to_sig_string(6),
            self.g.to_sig_string(6),
        ]
    }
}

/// Snaps the converged job to `|Sha| = (2^t root)^2` and fills the report.
pub fn make_report(
    job: &LSeriesJob,
    ctx: &SumContext,
    class: &IsogenyClass,
) -> Result<ShaReport, ShaError> {
    let check = stopping_check(job, ctx, class);
    if check.rank_suspect {
        return Err(ShaError::RankSuspect);
    }
    if !check.converged {
        return Err(ShaError::NotConverged);
    }
    let precision = ctx.precision();
    let l = job.partial_l(ctx);
    let raw = sha_from_l(&l, class, class.k_star())?;
    let sha_root = check.root << class.t();
    let sha = &sha_root * &sha_root;
    let g = goldfeld_szpiro(&sha, class.conductor_value(), precision);
    let residual = (&raw.sqrt()? - &BigReal::from_integer(sha_root.clone(), raw.precision())).abs();
    let squares = class.bad_prime_squares();
    let burden = burden(
        &BigReal::from_integer(sha.clone(), precision),
        &g,
        &l,
        class.t(),
        &squares,
    )
    .ok();
    Ok(ShaReport {
        class_hash: class.hash(),
        a: class.triple().a().clone(),
        c: class.triple().c().clone(),
        q: class.q().clone(),
        k_star: class.k_star(),
        s: class.s(),
        t: class.t(),
        c_values: class.c(),
        conductor: class.conductor_value().clone(),
        n_terms: job.n_current(),
        l: l.with_precision(precision),
        sha_raw: raw.with_precision(precision),
        sha_root,
        sha,
        g,
        burden,
        residual: residual.with_precision(precision),
    })
}

/// Distinct primes dividing `|Sha|`, each with a flag for exceeding
/// `threshold`.
pub fn prime_divisors_of_sha(sha_root: &BigInt, threshold: u64) -> Vec<(BigUint, bool)> {
    let n = sha_root.abs();
    if n.is_zero() || n.is_one() {
        return Vec::new();
    }
    let primes: Vec<BigUint> = match n.to_u64() {
        Some(small) => factor_u64(small)
            .into_iter()
            .map(|(p, _)| BigUint::from(p))
            .collect(),
        None => match factorize(&n, &mut IterationBudget::default()) {
            Ok(f) => f.primes().cloned().collect(),
            Err(_) => Vec::new(),
        },
    };
    primes
        .into_iter()
        .map(|p| {
            let flagged = p > BigUint::from(threshold);
            (p, flagged)
        })
        .collect()
}
