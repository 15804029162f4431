use freysha_core::arith::{parse_factored, BigReal, FactoredInteger, IterationBudget, Precision};
use freysha_core::curves::{build_class, IsogenyClass};
use freysha_core::lseries::*;
use freysha_core::sha::*;
use freysha_core::triples::{make_triple, make_triple_with};
use num_bigint::BigInt;
use proptest::prelude::*;

fn f(s: &str) -> FactoredInteger {
    parse_factored(s).unwrap()
}

fn class(a: &str, c: &str, q: i64) -> IsogenyClass {
    build_class(
        &make_triple(f(a), f(c)).unwrap(),
        &FactoredInteger::from_i64(q),
    )
    .unwrap()
}

fn with_b(a: &str, b: &str, c: &str, q: i64) -> IsogenyClass {
    let t = make_triple_with(
        f(a),
        f(c),
        Some(f(b)),
        &mut IterationBudget::default(),
        Precision::default(),
    )
    .unwrap();
    build_class(&t, &FactoredInteger::from_i64(q)).unwrap()
}

fn real(s: &str) -> BigReal {
    BigReal::parse_decimal(s, Precision::default()).unwrap()
}

fn near_square(x: &BigReal, root: u64) -> bool {
    let target = BigReal::from_integer(BigInt::from(root) * root, x.precision());
    ((x - &target) / target).abs() < real("1e-5")
}

#[test]
fn sha_from_published_central_values() {
    let ex1 = class("2^2 11", "5^9 139^6", 104945);
    let sha = sha_from_l(&real("37.9640"), &ex1, 1).unwrap();
    assert!(near_square(&sha, 479144), "{sha}");
    let ex4 = class("2^5 67^8 107 22381", "3^22 7^14 43 83", 7);
    let sha = sha_from_l(&real("5.64497"), &ex4, 2).unwrap();
    assert!(near_square(&sha, 804572), "{sha}");
    // linear in L
    let double = sha_from_l(&real("11.28994"), &ex4, 2).unwrap();
    assert!((&double - &sha.mul_int(2)).abs() < real("1e-20"));
    assert_eq!(sha_from_l(&real("0"), &ex4, 2), Err(ShaError::NonPositiveL));
    // across k the values differ by the C_k ratios
    let c = ex4.c();
    for k in 1..=4 {
        let v = sha_from_l(&real("5.64497"), &ex4, k).unwrap();
        let scaled = &v * &BigReal::from_integer(c[k - 1], v.precision());
        let base = &sha * &BigReal::from_integer(c[1], v.precision());
        assert!(((&scaled - &base) / base).abs() < real("1e-30"));
    }
}

#[test]
fn goldfeld_szpiro_records() {
    let p = Precision::default();
    let w = with_b("7^3", "5^13 181", "2^4 3 11 13^2 19^5", 1);
    let g = goldfeld_szpiro(&BigInt::from(224 * 224), w.conductor_value(), p);
    assert_eq!(g.to_sig_string(6), "6.98260");
    let n = with_b("5^14 19", "2^5 3 7^13", "11^7 37^2 353", 11);
    let g = goldfeld_szpiro(&BigInt::from(1832 * 1832), n.conductor_value(), p);
    assert_eq!(g.to_sig_string(6), "42.2653");
}

#[test]
fn burden_of_table_records() {
    let b = |k: &IsogenyClass, sha: u64, g: &str, l: &str| {
        let sha = BigReal::from_integer(BigInt::from(sha) * sha, Precision::default());
        burden(&sha, &real(g), &real(l), k.t(), &k.bad_prime_squares()).unwrap()
    };
    let ex3 = class("5^4 19^13 103", "3^19 11^4 463^5", 285);
    assert_eq!(
        ex3.bad_prime_squares(),
        [BigInt::from(3), BigInt::from(5), BigInt::from(19)]
    );
    assert_eq!(b(&ex3, 1937832, "153.084", "21.154"), 958);
    let ex4 = class("2^5 67^8 107 22381", "3^22 7^14 43 83", 7);
    assert_eq!(b(&ex4, 804572, "163.119", "5.64497"), 189);
    let ex5 = class("29^4 2213^2", "2^9 5^16 11^9 79", 23);
    assert_eq!(b(&ex5, 793656, "162.256", "17.3059"), 167);
    let ex8 = class("29", "2 17216879 257390962660901", 3);
    let value = b(&ex8, 1029212, "0.174117", "40.8169");
    assert!(value.abs_diff(578970) <= 1, "{value}");
}

const TABLE: &[(u64, &str, &str, i64, &str)] = &[
    (1937832, "3^19 11^4 463^5", "5^4 19^13 103", 285, "153.084"),
    (
        804572,
        "3^22 7^14 43 83",
        "2^5 67^8 107 22381",
        7,
        "163.119",
    ),
    (793656, "2^9 5^16 11^9 79", "29^4 2213^2", 23, "162.256"),
    (589080, "3^19 11^4 463^5", "5^4 19^13 103", -95, "24.5023"),
    (
        574656,
        "3^13 5^8 11^3 53 73^2 89^2 103",
        "7^5 61",
        39,
        "24.4672",
    ),
    (514672, "11^8 109^2 3677^3", "2 5^10 13^4", 429, "24.4535"),
    (
        487408,
        "2 3^15 7^2 31^10",
        "5 67^3 127^2 19219",
        62,
        "20.0273",
    ),
    (480512, "2^37 89^3 167^2 1823", "3^22 9787^2", 29, "28.8220"),
    (479144, "5^9 139^6", "2^2 11", 104945, "96.2939"),
    (439312, "5^9 139^6", "2^2 11", 114998, "54.6806"),
    (421216, "5^11 7^10 79 389^2", "11 103^8", 778, "12.7045"),
    (
        394024,
        "2 3^15 7^2 31^10",
        "5 67^3 127^2 19219",
        26,
        "20.2112",
    ),
    (393216, "3^38 13^4 5233", "71^8 233^3", 5, "34.8223"),
    (338122, "3^38 397", "13^5 19^3", 5161, "16.9191"),
    (324440, "5^15 179^4 2141", "2^12 13^3 223^3", 30, "39.8368"),
    (321584, "5^9 139^6", "2^2 11", 5282, "31.3650"),
    (
        298500,
        "2 11^6 193^4 20551",
        "3 5^6 7^8 53",
        5010,
        "34.9472",
    ),
    (
        295432,
        "3^13 5^8 11^3 53 73^2 89^2 103",
        "7^5 61",
        1,
        "14.2781",
    ),
    (
        288182,
        "2^4 3^19 17^8 29",
        "5^2 23^10 106531",
        108273,
        "15.3808",
    ),
    (277548, "3^30 13^4 277", "5^11 31 191", 4966, "14.7707"),
];

#[test]
fn table_g_from_sha_and_conductor() {
    for &(root, c, a, q, g) in TABLE {
        let k = class(a, c, q);
        let value = goldfeld_szpiro(
            &(BigInt::from(root) * root),
            k.conductor_value(),
            Precision::default(),
        );
        assert_eq!(value.to_sig_string(6), g, "|Sha| = {root}^2");
    }
}

#[test]
fn de_weger_report() {
    let k = with_b("7^3", "5^13 181", "2^4 3 11 13^2 19^5", 1);
    let p = Precision::default();
    let ctx = SumContext::for_class(&k, p).unwrap();
    let oracle = ApOracle::from_class(&k);
    let mut cache = CoefficientCache::new(DEFAULT_CACHE_LIMIT, &oracle);
    let mut job = LSeriesJob::new(&k, 1000, p);
    job.advance_to(10_000, &ctx, &mut cache, &oracle, &Sequential)
        .unwrap();
    assert_eq!(
        make_report(&job, &ctx, &k).unwrap_err(),
        ShaError::NotConverged
    );
    while !stopping_check(&job, &ctx, &k).converged {
        job.run_step(&ctx, &mut cache, &oracle, &Sequential)
            .unwrap();
    }
    let report = make_report(&job, &ctx, &k).unwrap();
    assert_eq!(report.sha, BigInt::from(224 * 224));
    assert_eq!(report.g.to_sig_string(6), "6.98260");
    assert!(report.residual < real("0.05"));
    let row = report.row();
    assert_eq!(row[0], "224^2");
    assert_eq!(row[1], "2^4 3 11 13^2 19^5");
    assert_eq!(row[2], "7^3");
    assert_eq!(row[3], "1");
    // round trip: L from the snapped |Sha| gives the same |Sha| back
    let l = &(&BigReal::from_integer(report.sha.clone(), p) * &BigReal::from_integer(k.c_min(), p))
        / k.sha_scale();
    let back = sha_from_l(&l, &k, k.k_star()).unwrap();
    assert!((&back - &BigReal::from_integer(report.sha.clone(), p)).abs() < real("1e-30"));
    let primes = prime_divisors_of_sha(&report.sha_root, RECORD_PRIME_THRESHOLD);
    assert_eq!(
        primes.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(),
        [2u32.into(), 7u32.into()]
    );
}

proptest! {
    #[test]
    fn burden_decreases_with_g(g1 in 1u32..10_000, dg in 1u32..10_000) {
        let p = Precision::default();
        let sha = BigReal::from_integer(BigInt::from(2_000_000u64) * 2_000_000u64, p);
        let l = real("10");
        let lo = BigReal::from_ratio(g1, 100, p);
        let hi = BigReal::from_ratio(g1 + dg, 100, p);
        let b_lo = burden(&sha, &lo, &l, 2, &[]).unwrap();
        let b_hi = burden(&sha, &hi, &l, 2, &[]).unwrap();
        prop_assert!(b_hi <= b_lo);
    }

    #[test]
    fn g_times_root_n_is_sha(root in 1u64..10_000_000, n in 1u64..1_000_000_000_000) {
        let p = Precision::default();
        let sha = BigInt::from(root) * root;
        let g = goldfeld_szpiro(&sha, &BigInt::from(n), p);
        let back = &g * &BigReal::from_integer(n, p).sqrt().unwrap();
        let exact = BigReal::from_integer(sha, p);
        prop_assert!(((&back - &exact) / exact).abs() < real("1e-35"));
    }
}
