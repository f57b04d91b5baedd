//! Invariants that cross module boundaries, as properties over random inputs.

use delta2_capacity::cli::output::Range;
use delta2_capacity::cli::Settings;
use delta2_capacity::constructions::{eval_g, g_interval};
use delta2_capacity::fixtures;
use delta2_capacity::hierarchy::{delta2_anytime, sigma1_shift, Delta2Cert, REEnumerator, SpeckerNumber};
use delta2_capacity::{Interval, Rational};
use proptest::prelude::*;

fn rat() -> impl Strategy<Value = Rational> {
    (-10_000i64..10_000, 1i64..1000).prop_map(|(n, d)| Rational::frac(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Distinct enumerated values make strictly increasing partial sums below 1.
    #[test]
    fn specker_partials_increase(values in prop::collection::btree_set(1u64..200, 1..40)) {
        let values: Vec<u64> = values.into_iter().rev().collect();
        let n = values.len() as u64;
        let s = SpeckerNumber::new(REEnumerator::from_table("t", values).unwrap());
        let mut prev = Rational::zero();
        for k in 1..=n {
            let p = s.partial(k).unwrap();
            prop_assert!(p > prev && p < Rational::one());
            prev = p;
        }
    }

    /// Adding the same rational to both sides leaves a Δ₂ estimate unchanged.
    #[test]
    fn delta2_shift_invariant(u in rat(), k in 0u64..64) {
        let d = Delta2Cert::new(fixtures::geo_shifted(), fixtures::geo_quarter());
        let s = Delta2Cert::new(sigma1_shift(&d.a, &u), sigma1_shift(&d.b, &u));
        prop_assert_eq!(delta2_anytime(&s, k), delta2_anytime(&d, k));
    }

    /// The bump is nonnegative and its interval form encloses every point value.
    #[test]
    fn bump_enclosure(a in rat(), w in 0i64..50) {
        let g = eval_g(&a);
        prop_assert!(!g.is_negative());
        let x = Interval::new(a.clone(), &a + &Rational::frac(w, 100)).unwrap();
        prop_assert!(g_interval(&x).contains(&g));
    }

    /// Decimal renderings of a range never cut into it.
    #[test]
    fn range_decimals_round_outward(a in rat(), b in rat()) {
        let i = Interval::hull_of(a, b);
        let r = Range::from(&i);
        let lo: Rational = r.lo_decimal.parse().unwrap();
        let hi: Rational = r.hi_decimal.parse().unwrap();
        prop_assert!(&lo <= i.lo() && i.hi() <= &hi);
    }

    /// Flags win over the file, and output plumbing never reaches the digest.
    #[test]
    fn overlay_and_digest(file_k in prop::option::of(1u64..100), flag_k in prop::option::of(1u64..100), threads in 1usize..16) {
        let file = Settings { k: file_k, ..Default::default() };
        let flags = Settings { k: flag_k, threads: Some(threads), ..Default::default() };
        let s = flags.over(file);
        prop_assert_eq!(s.k, flag_k.or(file_k));
        let bare = Settings { k: s.k, ..Default::default() };
        prop_assert_eq!(s.digest(), bare.digest());
    }
}
