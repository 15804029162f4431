use freysha_core::arith::IterationBudget;
use freysha_core::arith::{parse_factored, BigReal, FactoredInteger, Precision};
use freysha_core::curves::{build_class, ClassError, IsogenyClass};
use freysha_core::triples::{make_triple, make_triple_with};
use num_bigint::BigInt;

fn f(s: &str) -> FactoredInteger {
    parse_factored(s).unwrap()
}

fn class(a: &str, c: &str, q: i64) -> IsogenyClass {
    let t = make_triple(f(a), f(c)).unwrap();
    build_class(&t, &FactoredInteger::from_i64(q)).unwrap()
}

fn sig(x: &BigReal, digits: u32) -> String {
    x.to_sig_string(digits)
}

#[test]
fn forty_four_triple_twisted_by_104945() {
    let k = class("2^2 11", "5^9 139^6", 104945);
    assert_eq!(k.s(), 4);
    assert_eq!(k.k_star(), 1);
    assert_eq!(k.c_min(), 64);
    assert_eq!(sig(k.g_over_l(), 6), "2.53645");
    let r = k.triple().radical().value().clone();
    assert_eq!(k.conductor_value(), &(BigInt::from(8) * 104945 * r));
    assert!(k.q_divides_r());
}

#[test]
fn record_class() {
    let k = class("5^4 19^13 103", "3^19 11^4 463^5", 285);
    assert_eq!(k.s(), 1);
    assert_eq!(k.k_star(), 3);
    assert_eq!(k.c_min(), 576);
    assert_eq!(k.t(), 3);
    assert_eq!(sig(k.agm(), 6), "0.999998");
    let r = k.triple().radical().value().clone();
    assert_eq!(k.conductor_value(), &(BigInt::from(285) * r));
    // G / L from the table row
    assert_eq!(sig(k.g_over_l(), 5), "7.2366");
    let l = BigReal::parse_decimal("21.1540", Precision::default()).unwrap();
    assert_eq!(sig(&(k.g_over_l() * &l), 6), "153.084");
}

#[test]
fn second_and_third_table_rows() {
    let k = class("2^5 67^8 107 22381", "3^22 7^14 43 83", 7);
    assert_eq!((k.k_star(), k.c_min(), k.s()), (2, 64, 1));
    assert_eq!(sig(k.g_over_l(), 6), "28.8963");
    let k = class("29^4 2213^2", "2^9 5^16 11^9 79", 23);
    assert_eq!((k.k_star(), k.c_min(), k.s()), (1, 160, 1));
    assert_eq!(sig(k.g_over_l(), 6), "9.37574");
}

#[test]
fn ansatz_class_with_large_sha() {
    let k = class("29", "2 17216879 257390962660901", 3);
    assert_eq!(k.s(), 5);
    assert_eq!(k.c()[0], 2);
    assert_eq!(k.c()[1], 2);
    assert_eq!(k.c()[2], 32);
    assert_eq!(k.k_star(), 1);
    assert_eq!(k.t(), 2);
    let c = k.triple().c().value().clone();
    assert_eq!(k.conductor_value(), &(BigInt::from(4176) * c));
    let p = Precision::digits(40);
    let one_minus = &BigReal::one(p) - k.agm();
    assert!(one_minus.abs() < BigReal::parse_decimal("1e-21", p).unwrap());
    let pi = freysha_core::arith::pi(p);
    let expected = &BigReal::one(p) / &(&BigReal::from_i64(87, p).sqrt().unwrap().mul_int(8) * &pi);
    assert_eq!(sig(k.g_over_l(), 12), sig(&expected, 12));
}

#[test]
fn untwisted_and_previously_twisted_records() {
    let t = make_triple_with(
        f("7^3"),
        f("2^4 3 11 13^2 19^5"),
        Some(f("5^13 181")),
        &mut IterationBudget::default(),
        Precision::default(),
    )
    .unwrap();
    let k = build_class(&t, &FactoredInteger::one()).unwrap();
    assert_eq!(k.s(), 0);
    assert_eq!(k.conductor_value(), &BigInt::from(51636585));
    assert!(k
        .good_primes_needing_minimal_model()
        .iter()
        .any(|(p, _)| p == &BigInt::from(2)));

    let t = make_triple_with(
        f("5^14 19"),
        f("11^7 37^2 353"),
        Some(f("2^5 3 7^13")),
        &mut IterationBudget::default(),
        Precision::default(),
    )
    .unwrap();
    let k = build_class(&t, &FactoredInteger::from_i64(11)).unwrap();
    assert_eq!(k.s(), 1);
    assert_eq!(k.conductor_value(), &(BigInt::from(11) * 573247290));
}

#[test]
fn rejects_bad_twists() {
    let t = make_triple(f("2^2 11"), f("5^9 139^6")).unwrap();
    assert_eq!(
        build_class(&t, &FactoredInteger::from_i64(12)).unwrap_err(),
        ClassError::NotSquareFree(BigInt::from(12))
    );
}

/// `|Sha|, c, a, q, k, L, G` rows of the large-Sha table.
const TABLE: &str = "
1937832^2 3^19_11^4_463^5 5^4_19^13_103 285 3 21.1540 153.084
804572^2 3^22_7^14_43_83 2^5_67^8_107_22381 7 2 5.64497 163.119
793656^2 2^9_5^16_11^9_79 29^4_2213^2 23 1 17.3059 162.256
589080^2 3^19_11^4_463^5 5^4_19^13_103 -95 1 6.98206 24.5023
574656^2 3^13_5^8_11^3_53_73^2_89^2_103 7^5_61 39 1 4.61571 24.4672
514672^2 11^8_109^2_3677^3 2_5^10_13^4 429 3 7.22644 24.4535
487408^2 2_3^15_7^2_31^10 5_67^3_127^2_19219 62 3 2.82526 20.0273
480512^2 2^37_89^3_167^2_1823 3^22_9787^2 29 1 4.85512 28.8220
479144^2 5^9_139^6 2^2_11 104945 1 37.9640 96.2939
439312^2 5^9_139^6 2^2_11 114998 1 30.4875 54.6806
421216^2 5^11_7^10_79_389^2 11_103^8 778 1 0.78741 12.7045
394024^2 2_3^15_7^2_31^10 5_67^3_127^2_19219 26 3 2.85120 20.2112
393216^2 3^38_13^4_5233 71^8_233^3 5 1 1.46770 34.8223
338122^2 3^38_397 13^5_19^3 5161 1 20.7254 16.9191
324440^2 5^15_179^4_2141 2^12_13^3_223^3 30 3 11.1895 39.8368
321584^2 5^9_139^6 2^2_11 5282 3 38.1136 31.3650
298500^2 2_11^6_193^4_20551 3_5^6_7^8_53 5010 3 25.1811 34.9472
295432^2 3^13_5^8_11^3_53_73^2_89^2_103 7^5_61 1 1 11.4278 14.2781
288182^2 2^4_3^19_17^8_29 5^2_23^10_106531 108273 2 13.3365 15.3808
277548^2 3^30_13^4_277 5^11_31_191 4966 3 5.44574 14.7707
";

#[test]
fn large_sha_table_rows() {
    let p = Precision::default();
    for row in TABLE.lines().filter(|l| !l.trim().is_empty()) {
        let cols: Vec<&str> = row.split_whitespace().collect();
        let k = class(
            &cols[2].replace('_', " "),
            &cols[1].replace('_', " "),
            cols[3].parse().unwrap(),
        );
        assert_eq!(k.k_star(), cols[4].parse::<usize>().unwrap(), "{row}");
        let l = BigReal::parse_decimal(cols[5], p).unwrap();
        // both L and G are rounded: the intervals they imply must overlap
        let half_ulp = |text: &str| {
            0.5 * 10f64.powi(-(text.len() as i32 - 1 - text.find('.').unwrap() as i32))
        };
        let ratio = k.g_over_l().to_f64();
        let (l_val, g_val): (f64, f64) = (cols[5].parse().unwrap(), cols[6].parse().unwrap());
        let lo = ratio * (l_val - half_ulp(cols[5]));
        let hi = ratio * (l_val + half_ulp(cols[5]));
        assert!(
            hi >= g_val - half_ulp(cols[6]) && lo <= g_val + half_ulp(cols[6]),
            "{row}: G/L = {ratio}"
        );
        // |Sha| = L sqrt(|q| c) AGM / (pi C_k)
        let sha: u64 = cols[0].trim_end_matches("^2").parse().unwrap();
        let from_l = &(k.sha_scale() * &l) / &BigReal::from_integer(k.c_min(), p);
        let rel = &(&from_l - &BigReal::from_integer(sha * sha, p)) / &from_l;
        assert!(rel.abs().to_f64() < 1e-5, "{row}: {}", from_l);
    }
}
