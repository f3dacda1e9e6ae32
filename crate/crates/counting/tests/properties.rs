//! Exact doubling-map counts: monotone in ε and sandwiched between cover
//! and packing numbers.

use proptest::prelude::*;

use fibertherm::{Observable, SkewSystem};
use fibertherm_counting::oracle_cover_and_packing;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_counts_are_monotone_and_sandwiched(n in 2usize..=14, alpha in 0.0..1.0f64, delta in 0.01..0.5f64, eps in 0.02..0.25f64, shrink in 0.1..0.99f64) {
        let sys = SkewSystem::doubling();
        let phi = Observable::first_digit();
        let (cover, pack) = oracle_cover_and_packing(&sys, &phi, n, alpha, delta, eps).unwrap();
        let (_, pack_small) = oracle_cover_and_packing(&sys, &phi, n, alpha, delta, eps * shrink).unwrap();
        let (cover_half, _) = oracle_cover_and_packing(&sys, &phi, n, alpha, delta, eps / 2.0).unwrap();
        prop_assert!(pack_small >= pack);
        prop_assert!(cover <= pack && pack <= cover_half, "{} {} {}", cover, pack, cover_half);
    }
}
