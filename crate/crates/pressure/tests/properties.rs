//! Curve shapes and the Legendre upper bound on level-set rates.

use std::f64::consts::SQRT_2;

use proptest::prelude::*;

use fibertherm::observable::TrigTerm;
use fibertherm::{BasePoint, Forcing, FourierTerm, Observable, SkewSystem};
use fibertherm_counting::GridSpec;
use fibertherm_pressure::pressure::{pressure_curve, PressureMethod, PressureOptions};
use fibertherm_pressure::spectrum::{legendre_conjugate, level_set_rates, LevelSetOptions};

fn cat() -> SkewSystem {
    let forcing = Forcing {
        components: [
            vec![FourierTerm { m: 1, a: 0.1, b: 0.05 }],
            vec![FourierTerm { m: 2, a: -0.07, b: 0.0 }],
        ],
    };
    SkewSystem::cat_map(SQRT_2 - 1.0, forcing).unwrap()
}

fn trig() -> Observable {
    Observable::fiber_trig(vec![TrigTerm { m: [1, 0], c: 0.5, s: 0.2 }])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // The smallest window δ = 0.02 biases the rate towards H(α - δ); beyond
    // |α - 1/2| = 0.4 that bias alone reaches the 0.05 tolerance.
    #[test]
    fn legendre_bounds_level_rates(alpha in 0.1..0.9f64) {
        let sys = SkewSystem::doubling();
        let phi = Observable::first_digit();
        let mut po = PressureOptions::new(0.1, (8..=16).collect());
        po.method = PressureMethod::Cylinder;
        let q: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.5).collect();
        let curve = pressure_curve(&sys, &phi, &q, &po).unwrap();
        let spec = legendre_conjugate(&curve, &[alpha]).unwrap();
        let lo = LevelSetOptions::new(0.1, (20..=120).step_by(20).collect(), vec![0.1, 0.05, 0.02]);
        let rate = level_set_rates(&sys, &phi, &BasePoint::Unit, &[alpha], &lo).unwrap().pop().unwrap();
        prop_assert!(rate.rate <= spec.value[0] + 0.05, "{} {}", rate.rate, spec.value[0]);
    }
}

#[test]
fn oracle_curves_are_convex_and_concave() {
    let sys = SkewSystem::doubling();
    let mut po = PressureOptions::new(0.1, (8..=16).collect());
    po.method = PressureMethod::Cylinder;
    let q: Vec<f64> = (-12..=12).map(|i| i as f64 * 0.5).collect();
    for phi in [Observable::first_digit(), Observable::first_digit().scaled(-2.0).shifted(0.3)] {
        let curve = pressure_curve(&sys, &phi, &q, &po).unwrap();
        assert!(curve.convexity_defect <= 1e-2);
        let alphas: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
        let spec = legendre_conjugate(&curve, &alphas).unwrap();
        assert!(spec.concavity_defect <= 1e-2);
    }
}

#[test]
fn grid_curves_are_convex_and_concave() {
    let sys = cat();
    let mut po = PressureOptions::new(0.2, (3..=6).collect());
    po.method = PressureMethod::Grid(GridSpec::for_epsilon(0.2));
    let q: Vec<f64> = (-6..=6).map(|i| i as f64 * 0.5).collect();
    let curve = pressure_curve(&sys, &trig(), &q, &po).unwrap();
    assert!(curve.convexity_defect <= 1e-2, "{}", curve.convexity_defect);
    let alphas: Vec<f64> = (-5..=5).map(|i| i as f64 * 0.1).collect();
    let spec = legendre_conjugate(&curve, &alphas).unwrap();
    assert!(spec.concavity_defect <= 1e-2, "{}", spec.concavity_defect);
    // The conjugate never exceeds the entropy, attained where q = 0 is active.
    let h = curve.entropy().unwrap();
    for (v, q) in spec.value.iter().zip(&spec.argmin) {
        assert!(*v <= h + 1e-12);
        if *q == 0.0 {
            assert!((v - h).abs() < 1e-6);
        }
    }
}
