mod common;

use cmlv_core::gaussint::GaussInt;
use cmlv_core::padicscan::{
    cp_plus_mod, cp_residue_checked, embed, make_ctx, parse_csv_row, scan, verdict, CpResult, Ord,
    ScanConfig, TableDigit, Verdict,
};
use cmlv_core::traceexact::{cp_plus_exact, rational_residue, EXACT_P_MAX};
use proptest::prelude::*;
use rug::Integer;

fn digits(report: &cmlv_core::padicscan::ScanReport) -> Vec<(u64, TableDigit)> {
    report
        .results
        .iter()
        .map(|r| (r.p, r.table_digit))
        .collect()
}

#[test]
fn hensel_roots() {
    let params = common::params(17);
    assert_eq!(make_ctx(5, 1, &params).unwrap().r, 2);
    assert_eq!(make_ctx(5, 2, &params).unwrap().r, 7);
    assert_eq!(make_ctx(13, 1, &params).unwrap().r, 5);
    for (p, k) in [(5u64, 8u32), (277, 4), (11057, 5), (13, 20)] {
        let c = make_ctx(p, k, &params).unwrap();
        assert_eq!(c.modulus, (p as u128).pow(k));
        assert_eq!(c.mul(c.r, c.r), c.modulus - 1);
        assert_eq!(c.add(c.r, c.r_conj), 0);
        assert_eq!(embed(&GaussInt::one(), &c), 1);
        assert_eq!(embed(&GaussInt::i(), &c), c.r);
    }
    assert!(make_ctx(17, 3, &params).is_err());
    assert!(make_ctx(19, 3, &params).is_err());
    assert!(make_ctx(13, 0, &params).is_err());
    assert!(make_ctx(11057, 8, &params).is_err());
}

proptest! {
    #[test]
    fn embedding_is_a_ring_homomorphism(
        (a, b, c, e) in (any::<i64>(), any::<i64>(), any::<i64>(), any::<i64>()),
        idx in 0usize..4,
        k in 1u32..6,
    ) {
        let p = [5u64, 13, 277, 11057][idx];
        let ctx = make_ctx(p, k, &common::params(-14)).unwrap();
        let z = GaussInt::new(a, b);
        let w = GaussInt::new(c, e);
        prop_assert_eq!(embed(&(&z * &w), &ctx), ctx.mul(embed(&z, &ctx), embed(&w, &ctx)));
        prop_assert_eq!(embed(&(&z + &w), &ctx), ctx.add(embed(&z, &ctx), embed(&w, &ctx)));
        let n = Integer::from(a);
        prop_assert_eq!(embed(&GaussInt::from_int(n.clone()), &ctx), ctx.reduce(&n));
    }
}

#[test]
fn verdict_rules() {
    assert_eq!(verdict(2, 2, 13, true, true), Verdict::ShaTrivialAtP);
    assert_eq!(verdict(3, 2, 29, true, true), Verdict::ShaFiniteAtP);
    assert_eq!(verdict(4, 2, 29, true, true), Verdict::Inconclusive);
    assert_eq!(verdict(2, 2, 13, false, true), Verdict::Inconclusive);
    assert_eq!(verdict(2, 2, 5, true, true), Verdict::ShaFiniteAtP);
    assert_eq!(verdict(2, 2, 13, true, false), Verdict::ShaFiniteAtP);
}

#[test]
fn small_range_scans() {
    let cfg = ScanConfig::new(2);
    let b17 = common::bundle(17);
    let r = scan(&b17.params, &b17, 5, 41, &cfg).unwrap();
    let d = |v: u64| TableDigit::Digit(v);
    assert_eq!(
        digits(&r),
        vec![(5, d(3)), (13, d(8)), (29, d(22)), (37, d(20)), (41, d(29))]
    );
    assert_eq!(r.skipped.len(), 1);
    assert_eq!(r.skipped[0].0, 17);

    let b14 = common::bundle(-14);
    let r = scan(&b14.params, &b14, 5, 41, &cfg).unwrap();
    assert_eq!(
        digits(&r),
        vec![
            (5, d(4)),
            (13, d(4)),
            (17, d(7)),
            (29, d(0)),
            (37, d(9)),
            (41, d(12))
        ]
    );
    assert!(r.skipped.is_empty());
    let p29 = &r.results[3];
    assert!(p29.exceptional);
    assert_eq!(p29.ord, Ord::Exact(3));
    assert_eq!(p29.unit_digit, Some(27));
    assert_eq!(
        p29.verdict,
        Verdict::Inconclusive,
        "parity hypothesis not asserted"
    );
}

#[test]
fn empty_range() {
    let b = common::bundle(3);
    let cfg = ScanConfig::new(2);
    for (lo, hi) in [(6u64, 12u64), (41, 5), (14, 16)] {
        let r = scan(&b.params, &b, lo, hi, &cfg).unwrap();
        assert!(r.results.is_empty() && r.skipped.is_empty(), "[{lo}, {hi}]");
    }
}

#[test]
fn single_prime_examples() {
    let b17 = common::bundle(17);
    let cfg = ScanConfig {
        k: 3,
        ..ScanConfig::new(2)
    };
    let r = cp_plus_mod(&b17.params, &b17, 13, &cfg).unwrap();
    assert_eq!(r.table_digit, TableDigit::Digit(8));

    let b14 = common::bundle(-14);
    let cfg = ScanConfig {
        k: 4,
        parity_ok: true,
        ..ScanConfig::new(2)
    };
    let r = cp_plus_mod(&b14.params, &b14, 277, &cfg).unwrap();
    assert_eq!(r.ord, Ord::Exact(3));
    assert_eq!(r.residue, 155 * 277u128.pow(3));
    assert!(r.exceptional);
    assert_eq!(r.verdict, Verdict::ShaFiniteAtP);
}

#[test]
fn saturation_is_reported_as_lower_bound() {
    let b14 = common::bundle(-14);
    let cfg = ScanConfig {
        k: 3,
        ..ScanConfig::new(2)
    };
    let r = cp_plus_mod(&b14.params, &b14, 29, &cfg).unwrap();
    assert_eq!(r.ord, Ord::AtLeast(3));
    assert_eq!(r.unit_digit, None);
    assert_eq!(r.verdict, Verdict::Inconclusive);
    let cfg = ScanConfig {
        k: 2,
        ..ScanConfig::new(2)
    };
    let r = cp_plus_mod(&b14.params, &b14, 13, &cfg).unwrap();
    assert_eq!(r.ord, Ord::AtLeast(2));
    assert_eq!(r.table_digit, TableDigit::Unknown);
}

#[test]
fn exact_and_modular_agree() {
    for d in [3i64, 5, 17, -14] {
        let b = common::bundle(d);
        for p in common::valid_primes(d, EXACT_P_MAX) {
            let k = 5;
            let exact = cp_plus_exact(&b.params, &b, p).unwrap();
            let (ctx, modular) = cp_residue_checked(&b.params, &b, p, k).unwrap();
            let want = rational_residue(&exact, p, 0, k).unwrap();
            assert_eq!(modular, want as u128, "D = {d}, p = {p}");
            assert!(modular < ctx.modulus);
        }
    }
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let b = common::bundle(-14);
    let cfg = ScanConfig::new(2);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| scan(&b.params, &b, 5, 300, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
    let ps: Vec<u64> = one.results.iter().map(|r| r.p).collect();
    assert!(ps.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn csv_round_trip() {
    let b = common::bundle(-14);
    let r = scan(&b.params, &b, 5, 300, &ScanConfig::new(2)).unwrap();
    assert_eq!(
        CpResult::CSV_HEADER.split(',').count(),
        r.results[0].csv_row().split(',').count()
    );
    for row in &r.results {
        let (p, ord, unit, td, exc, v) = parse_csv_row(&row.csv_row()).unwrap();
        assert_eq!(
            (p, ord, unit, td, exc, v),
            (
                row.p,
                row.ord,
                row.unit_digit,
                row.table_digit,
                row.exceptional,
                row.verdict
            )
        );
    }
    assert!(parse_csv_row("5,2,3").is_none());
    assert!(parse_csv_row("5,x,3,3,false,ShaFiniteAtP").is_none());
}
