//! Randomized invariants: metric axioms, the cocycle law, base group law,
//! ω-independence of the Bowen metric and Birkhoff additivity.

use std::f64::consts::SQRT_2;

use proptest::prelude::*;

use fibertherm::base::{base_distance, base_step, sturmian_symbol, DrivingSystem};
use fibertherm::observable::birkhoff_sum;
use fibertherm::skew::fiber_distance;
use fibertherm::{bowen_distance, fiber_step, FiberPoint, Forcing, FourierTerm, IntMat2, Observable, SkewSystem};

fn cat() -> SkewSystem {
    let forcing = Forcing {
        components: [
            vec![FourierTerm { m: 1, a: 0.1, b: 0.05 }],
            vec![FourierTerm { m: 2, a: -0.07, b: 0.0 }],
        ],
    };
    SkewSystem::cat_map(SQRT_2 - 1.0, forcing).unwrap()
}

fn cocycle() -> SkewSystem {
    SkewSystem::cocycle(SQRT_2 - 1.0, vec![IntMat2::new(2, 1, 1, 1), IntMat2::new(1, 1, 1, 2)]).unwrap()
}

fn torus() -> impl Strategy<Value = FiberPoint> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| FiberPoint::torus(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bowen_metric_axioms(w in 0.0..1.0f64, x in torus(), y in torus(), z in torus(), n in 1usize..14, which in 0usize..2) {
        let sys = if which == 0 { cat() } else { cocycle() };
        let omega = sys.driving.point(w);
        let dxy = bowen_distance(&sys, &omega, &x, &y, n);
        prop_assert_eq!(dxy, bowen_distance(&sys, &omega, &y, &x, n));
        prop_assert_eq!(bowen_distance(&sys, &omega, &x, &x, n), 0.0);
        let via = bowen_distance(&sys, &omega, &x, &z, n) + bowen_distance(&sys, &omega, &z, &y, n);
        prop_assert!(dxy <= via + 1e-12);
        prop_assert!(dxy <= bowen_distance(&sys, &omega, &x, &y, n + 1));
        if n == 1 {
            prop_assert_eq!(dxy, fiber_distance(&x, &y));
        }
    }

    #[test]
    fn cocycle_law(w in 0.0..1.0f64, x in torus(), s in -20i64..=20, t in -20i64..=20, which in 0usize..2) {
        let sys = if which == 0 { cat() } else { cocycle() };
        let omega = sys.driving.point(w);
        let direct = fiber_step(&sys, &omega, &x, s + t).unwrap();
        let mid = fiber_step(&sys, &omega, &x, s).unwrap();
        let composed = fiber_step(&sys, &base_step(&sys.driving, &omega, s), &mid, t).unwrap();
        prop_assert!(fiber_distance(&direct, &composed) < 1e-9);
    }

    #[test]
    fn base_group_law(w in 0.0..1.0f64, s in -10_000i64..=10_000, t in -10_000i64..=10_000) {
        let d = DrivingSystem::Rotation { alpha: SQRT_2 - 1.0 };
        let omega = d.point(w);
        let direct = base_step(&d, &omega, s + t);
        let composed = base_step(&d, &base_step(&d, &omega, s), t);
        prop_assert_eq!(base_distance(&d, &direct, &composed), 0.0);
        prop_assert!((0.0..1.0).contains(&direct.phase()));
    }

    #[test]
    fn sturmian_shift_equivariance(x0 in 0.0..1.0f64, i in -1000i64..1000) {
        let a = 0.381_966_011_250_105;
        prop_assert_eq!(sturmian_symbol(a, (x0 + a).fract(), i), sturmian_symbol(a, x0, i + 1));
    }

    #[test]
    fn bowen_metric_is_omega_independent(w1 in 0.0..1.0f64, w2 in 0.0..1.0f64, x in torus(), y in torus(), n in 1usize..=15) {
        let sys = cat();
        let d1 = bowen_distance(&sys, &sys.driving.point(w1), &x, &y, n);
        let d2 = bowen_distance(&sys, &sys.driving.point(w2), &x, &y, n);
        prop_assert!((d1 - d2).abs() <= 1e-12);
    }

    #[test]
    fn birkhoff_additivity(w in 0.0..1.0f64, x in torus(), m in 1usize..15, n in 1usize..15) {
        let sys = cat();
        let phi = Observable::product(vec![FourierTerm { m: 1, a: 0.3, b: 0.1 }], vec![fibertherm::observable::TrigTerm { m: [1, 2], c: 0.4, s: -0.2 }]);
        let omega = sys.driving.point(w);
        let whole = birkhoff_sum(&sys, &phi, &omega, &x, m + n);
        let xm = fiber_step(&sys, &omega, &x, m as i64).unwrap();
        let split = birkhoff_sum(&sys, &phi, &omega, &x, m) + birkhoff_sum(&sys, &phi, &base_step(&sys.driving, &omega, m as i64), &xm, n);
        prop_assert!((whole - split).abs() < 1e-9);
    }
}
