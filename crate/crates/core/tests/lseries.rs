use freysha_core::arith::primes::{is_prime_u64, primes_up_to};
use freysha_core::arith::{parse_factored, BigReal, FactoredInteger, IterationBudget, Precision};
use freysha_core::curves::{build_class, IsogenyClass, WeierstrassCurve};
use freysha_core::lseries::*;
use freysha_core::triples::{make_triple, make_triple_with};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;

fn f(s: &str) -> FactoredInteger {
    parse_factored(s).unwrap()
}

fn de_weger() -> IsogenyClass {
    let t = make_triple_with(
        f("7^3"),
        f("2^4 3 11 13^2 19^5"),
        Some(f("5^13 181")),
        &mut IterationBudget::default(),
        Precision::default(),
    )
    .unwrap();
    build_class(&t, &FactoredInteger::one()).unwrap()
}

fn forty_four() -> IsogenyClass {
    let t = make_triple(f("2^2 11"), f("5^9 139^6")).unwrap();
    build_class(&t, &FactoredInteger::from_i64(104945)).unwrap()
}

fn e11a1_oracle() -> (WeierstrassCurve, ApOracle) {
    let e = WeierstrassCurve::from_i64([0, -1, 1, -10, -20]).unwrap();
    let oracle = ApOracle::new(e.clone(), &[(BigInt::from(11), 1)], &[]);
    (e, oracle)
}

#[test]
fn central_value_of_11a1() {
    let (_, oracle) = e11a1_oracle();
    let p = Precision::digits(30);
    let ctx = SumContext::new(&BigInt::from(11), p).unwrap();
    let mut cache = CoefficientCache::new(1000, &oracle);
    let mut job = LSeriesJob::for_hash("11a1".into(), 100, p);
    job.advance_to(300, &ctx, &mut cache, &oracle, &Sequential)
        .unwrap();
    assert_eq!(
        job.partial_l(&ctx).to_sig_string(20),
        "0.25384186085591068434"
    );
    // q-expansion
    let expected = [
        1, -2, -1, 2, 1, 2, -2, 0, -2, -2, 1, -2, 4, 4, -1, -4, -2, 4, 0, 2,
    ];
    for (n, a) in expected.iter().enumerate() {
        assert_eq!(cache.get(n as u64 + 1), Some(*a as i64), "a({})", n + 1);
    }
}

#[test]
fn rank_two_curve_sums_to_zero() {
    // 389a1 has analytic rank 2 and root number +1
    let e = WeierstrassCurve::from_i64([0, 1, 1, -2, 0]).unwrap();
    let bad = bad_prime_ap(&e, &BigInt::from(389)).unwrap();
    assert_eq!(bad, 1);
    let oracle = ApOracle::new(e, &[(BigInt::from(389), bad)], &[]);
    let p = Precision::digits(30);
    let ctx = SumContext::new(&BigInt::from(389), p).unwrap();
    let mut cache = CoefficientCache::new(10_000, &oracle);
    let mut job = LSeriesJob::for_hash("389a1".into(), 100, p);
    job.advance_to(2000, &ctx, &mut cache, &oracle, &Sequential)
        .unwrap();
    assert!(job.partial_l(&ctx).abs() < BigReal::parse_decimal("1e-25", p).unwrap());
}

#[test]
fn empty_sum_is_zero() {
    let k = de_weger();
    let oracle = ApOracle::from_class(&k);
    let mut cache = CoefficientCache::new(1000, &oracle);
    let l = evaluate_l(
        &k,
        0,
        Precision::default(),
        &mut cache,
        &oracle,
        &Sequential,
    )
    .unwrap();
    assert!(l.is_zero());
}

#[test]
fn frey_class_coefficients() {
    let k = de_weger();
    let oracle = ApOracle::from_class(&k);
    let mut cache = CoefficientCache::new(200_000, &oracle);
    cache.fill_to(100_000, &oracle, &Sequential).unwrap();
    assert_eq!(cache.get(1), Some(1));
    // primes with l^2 | N kill a(n)
    for &l in cache.bad_prime_squares() {
        for n in (l..100_000).step_by(l as usize) {
            assert_eq!(cache.get(n), Some(0), "n = {n}");
        }
    }
    for p in primes_up_to(100_000) {
        let ap = cache.get(p).unwrap();
        if oracle.bad_ap(p).is_none() {
            assert!(ap * ap <= 4 * p as i64, "Hasse at {p}");
            if p * p < 100_000 {
                assert_eq!(cache.get(p * p).unwrap(), ap * ap - p as i64);
            }
        }
    }
    // block sieve against per-n factorisation below 10^5
    let fresh = CoefficientCache::new(1, &oracle);
    for n in 1..100_000u64 {
        assert_eq!(
            fresh.extend_an(n, &oracle).unwrap(),
            cache.get(n).unwrap(),
            "n = {n}"
        );
    }
}

#[test]
fn coefficients_beyond_the_cache() {
    let k = de_weger();
    let oracle = ApOracle::from_class(&k);
    let mut small = CoefficientCache::new(5_000, &oracle);
    let mut large = CoefficientCache::new(60_000, &oracle);
    let a = small.block(1, 50_001, &oracle, &Sequential).unwrap();
    let b = large.block(1, 50_001, &oracle, &Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(small.filled(), 5_000);
    let c = small.block(40_000, 50_001, &oracle, &Sequential).unwrap();
    assert_eq!(&c[..], &b[39_999..]);
}

#[test]
fn bsgs_agrees_with_naive_on_frey_curves() {
    let k = forty_four();
    let mut rng = 0x9e3779b97f4a7c15u64;
    let mut checked = 0;
    while checked < 60 {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        let p = 1_000 + rng % 999_000;
        if !is_prime_u64(p) || k.conductor_value().is_multiple_of(&BigInt::from(p)) {
            continue;
        }
        let values: Vec<i64> = k.curves().iter().map(|e| ap_bsgs(e, p).unwrap()).collect();
        assert_eq!(values[0], ap_naive(&k.curves()[0], p).unwrap(), "p = {p}");
        assert!(
            values.iter().all(|&v| v == values[0]),
            "isogeny invariance at {p}"
        );
        checked += 1;
    }
    let p = (1 << 20) + 7;
    let a = ap_bsgs(&k.curves()[0], p).unwrap();
    assert!(a.abs() <= 2048);
    assert_eq!(a, ap_naive(&k.curves()[0], p).unwrap());
    assert!((p as i64 + 1 - a) % 4 == 0);
}

#[test]
fn truncation_bound_examples() {
    let p = Precision::default();
    let r = |s: &str| BigReal::parse_decimal(s, p).unwrap();
    let sha = BigReal::from_integer(BigInt::from(1029212u64) * 1029212u64, p);
    let m = truncation_bound(&sha, &r("0.174117"), &r("40.8169"), 2, &r("4")).unwrap();
    assert!((9.7e12..9.9e12).contains(&(m as f64)), "m = {m}");
    let doubled = truncation_bound(&sha, &r("0.174117"), &r("40.8169"), 2, &r("8")).unwrap();
    let shift = BigReal::from_integer(doubled - m, p);
    let expected = &(&sha / &(&freysha_core::arith::pi(p).mul_int(2) * &r("0.174117")))
        * &freysha_core::arith::ln2(p);
    assert!((&shift - &expected).abs() <= BigReal::one(p));
    // K sqrt|Sha| = 2^t L exactly
    let err = truncation_bound(&r("16"), &r("1"), &r("4"), 2, &r("4")).unwrap_err();
    assert_eq!(err, LSeriesError::DegenerateBound);
}

#[test]
fn stopping_rule_cases() {
    let p = Precision::default();
    let vals = |xs: &[&str]| {
        xs.iter()
            .map(|x| BigReal::parse_decimal(x, p).unwrap())
            .collect::<Vec<_>>()
    };
    let good: Vec<&str> = ["6210.97", "6211.03", "6211.0", "6210.99"]
        .iter()
        .cycle()
        .take(20)
        .copied()
        .collect();
    let (converged, root) = stopping_rule(&vals(&good));
    assert!(converged);
    assert_eq!(root, BigInt::from(6211));
    let mut outlier = good.clone();
    outlier[0] = "6211.2";
    assert!(!stopping_rule(&vals(&outlier)).0);
    assert!(!stopping_rule(&vals(&good[..19])).0);
    let straddle: Vec<&str> = ["6211.49", "6211.51"]
        .iter()
        .cycle()
        .take(20)
        .copied()
        .collect();
    assert!(!stopping_rule(&vals(&straddle)).0);
}

#[test]
fn converges_on_de_weger_class_with_tail_sanity() {
    let k = de_weger();
    let p = Precision::default();
    let ctx = SumContext::for_class(&k, p).unwrap();
    let oracle = ApOracle::from_class(&k);
    let mut cache = CoefficientCache::new(DEFAULT_CACHE_LIMIT, &oracle);
    let mut job = LSeriesJob::new(&k, 1000, p);
    let check = loop {
        job.run_step(&ctx, &mut cache, &oracle, &Sequential)
            .unwrap();
        let check = stopping_check(&job, &ctx, &k);
        if check.converged {
            break check;
        }
        assert!(job.n_current() < 200_000);
    };
    assert_eq!(check.root, BigInt::from(56));
    assert!(!check.rank_suspect);
    // |L(m) - L(m')| <= K exp(-2 pi m / sqrt N)
    let l_final = job.partial_l(&ctx);
    let four = BigReal::from_i64(4, p);
    for m in [5_000u64, 10_000, 15_000] {
        let l_m = evaluate_l(&k, m, p, &mut cache, &oracle, &Sequential).unwrap();
        let bound = tail_bound(m, k.conductor_value(), &four).unwrap();
        assert!((&l_m - &l_final).abs() <= bound, "m = {m}");
    }
}

#[test]
fn checkpoint_round_trip_and_refusals() {
    let k = de_weger();
    let p = Precision::default();
    let ctx = SumContext::for_class(&k, p).unwrap();
    let oracle = ApOracle::from_class(&k);
    let mut cache = CoefficientCache::new(100_000, &oracle);
    let mut job = LSeriesJob::new(&k, 700, p);
    job.advance_to(5_000, &ctx, &mut cache, &oracle, &Sequential)
        .unwrap();
    let text = checkpoint_text(&job, &ctx);
    let back = parse_checkpoint(&text, Some(&k.hash())).unwrap();
    assert_eq!(back, job);
    assert!(matches!(
        parse_checkpoint(&text, Some("other")),
        Err(LSeriesError::ClassMismatch { .. })
    ));
    let tampered = text.replace("n_current 5000", "n_current 5001");
    assert!(matches!(
        parse_checkpoint(&tampered, None),
        Err(LSeriesError::Checkpoint(_))
    ));
    let truncated = &text[..text.len() / 2];
    assert!(parse_checkpoint(truncated, None).is_err());
}

fn monolithic_sum(target: u64) -> LSeriesJob {
    let k = de_weger();
    let p = Precision::default();
    let ctx = SumContext::for_class(&k, p).unwrap();
    let oracle = ApOracle::from_class(&k);
    let mut cache = CoefficientCache::new(DEFAULT_CACHE_LIMIT, &oracle);
    let mut job = LSeriesJob::new(&k, 1000, p);
    job.advance_to(target, &ctx, &mut cache, &oracle, &Sequential)
        .unwrap();
    job
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn resume_is_bit_exact(cuts in proptest::collection::vec(1u64..140_000, 1..4), cache_limit in 1u64..200_000) {
        let target = 140_000;
        let reference = monolithic_sum(target);
        let k = de_weger();
        let p = Precision::default();
        let ctx = SumContext::for_class(&k, p).unwrap();
        let oracle = ApOracle::from_class(&k);
        let mut job = LSeriesJob::new(&k, 1000, p);
        let mut cuts = cuts;
        cuts.sort_unstable();
        cuts.push(target);
        for cut in cuts {
            // a fresh process: new cache, state only from the checkpoint text
            let mut cache = CoefficientCache::new(cache_limit, &oracle);
            job = parse_checkpoint(&checkpoint_text(&job, &ctx), Some(&k.hash())).unwrap();
            job.advance_to(cut, &ctx, &mut cache, &oracle, &Sequential).unwrap();
        }
        prop_assert_eq!(job, reference);
    }

    #[test]
    fn multiplicativity(m in 1u64..1_000, n in 1u64..1_000) {
        let k = forty_four();
        let oracle = ApOracle::from_class(&k);
        let cache = CoefficientCache::new(1, &oracle);
        prop_assume!(m.gcd(&n) == 1);
        let amn = cache.extend_an(m * n, &oracle).unwrap();
        let am = cache.extend_an(m, &oracle).unwrap();
        let an = cache.extend_an(n, &oracle).unwrap();
        prop_assert_eq!(amn, am * an);
    }
}
