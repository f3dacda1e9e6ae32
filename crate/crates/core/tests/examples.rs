//! Worked cases with closed-form answers.

use std::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fibertherm::base::{base_step, sturmian_symbol, DrivingSystem};
use fibertherm::skew::LinearPart;
use fibertherm::{
    bowen_ball_area, bowen_distance, expansivity_constants, hyperbolic_frame, FiberPoint, Forcing, FourierTerm,
    IntMat2, SkewSystem,
};

const GOLDEN_CONJUGATE: f64 = 0.381_966_011_250_105;

fn forced_cat() -> SkewSystem {
    let forcing = Forcing {
        components: [
            vec![FourierTerm { m: 1, a: 0.1, b: 0.05 }],
            vec![FourierTerm { m: 2, a: -0.07, b: 0.0 }],
        ],
    };
    SkewSystem::cat_map(SQRT_2 - 1.0, forcing).unwrap()
}

fn lambda_u() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

// Base systems.

#[test]
fn sturmian_frequency_matches_alpha() {
    let twos = (0..10_000).filter(|&i| sturmian_symbol(GOLDEN_CONJUGATE, 0.0, i) == 2).count();
    assert!((twos as f64 / 1e4 - GOLDEN_CONJUGATE).abs() < 1e-3);
}

#[test]
fn rotation_orbit_equidistributes() {
    let d = DrivingSystem::Rotation { alpha: SQRT_2 - 1.0 };
    let n = 20_000;
    let omega = d.point(0.123);
    let mut hits = [0usize; 10];
    for i in 0..n {
        hits[(base_step(&d, &omega, i).phase() * 10.0) as usize] += 1;
    }
    for h in hits {
        assert!((h as f64 / n as f64 - 0.1).abs() < 3.0 / (n as f64).sqrt());
    }
}

// Skew systems.

#[test]
fn cat_map_separation_grows_by_lambda() {
    let sys = SkewSystem::cat_map(SQRT_2 - 1.0, Forcing::zero()).unwrap();
    let omega = sys.driving.point(0.0);
    let (x, y) = (FiberPoint::torus(0.0, 0.0), FiberPoint::torus(1e-6, 0.0));
    for n in 3..10 {
        let r = bowen_distance(&sys, &omega, &x, &y, n + 1) / bowen_distance(&sys, &omega, &x, &y, n);
        assert!((r - lambda_u()).abs() < 1e-3, "n={n}: {r}");
    }
}

#[test]
fn cat_frame_is_the_golden_eigenbasis() {
    let f = hyperbolic_frame(&forced_cat()).unwrap();
    assert!((f.lambda_u - lambda_u()).abs() < 1e-12);
    assert!((f.lambda_u * f.lambda_s - 1.0).abs() < 1e-10);
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    assert!((f.e_u[0] / f.e_u[1] - phi).abs() < 1e-12);
    let t = IntMat2::new(2, 1, 1, 1);
    for (e, mu) in [(f.e_u, f.mu_u), (f.e_s, f.mu_s)] {
        let te = [t.a as f64 * e[0] + t.b as f64 * e[1], t.c as f64 * e[0] + t.d as f64 * e[1]];
        assert!((te[0] - mu * e[0]).abs() < 1e-12 && (te[1] - mu * e[1]).abs() < 1e-12);
    }
    let fib = IntMat2::new(1, 1, 1, 0);
    let squared = SkewSystem::affine(DrivingSystem::Rotation { alpha: SQRT_2 - 1.0 }, fib.mul(&fib), Forcing::zero()).unwrap();
    assert_eq!(hyperbolic_frame(&squared).unwrap(), f);
}

#[test]
fn expansivity_of_the_cat_map() {
    let r = expansivity_constants(&forced_cat(), 0.01).unwrap();
    assert!((r.eta - 0.0691).abs() < 1e-3);
    assert_eq!(r.horizon, 5);
    assert_eq!(expansivity_constants(&forced_cat(), 0.1).unwrap().horizon, 0);
}

/// Monte-Carlo area of the Bowen ball in the frame max-metric.
fn sampled_ball_area(n: usize, eps: f64, samples: usize) -> f64 {
    let sys = forced_cat();
    let f = hyperbolic_frame(&sys).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    // Sample the parallelogram's bounding box around the center.
    let half = eps * (f.e_u[0].abs() + f.e_s[0].abs()).max(f.e_u[1].abs() + f.e_s[1].abs());
    let inside = (0..samples)
        .filter(|_| {
            let v = [rng.random_range(-half..half), rng.random_range(-half..half)];
            (0..n).all(|i| {
                let (u, s) = f.coords(v);
                let scale = f.lambda_u.powi(i as i32);
                (u * scale).abs() <= eps && (s / scale).abs() <= eps
            })
        })
        .count();
    inside as f64 / samples as f64 * (2.0 * half) * (2.0 * half)
}

#[test]
fn bowen_ball_area_matches_sampling() {
    let sys = forced_cat();
    for n in 1..=3 {
        let exact = bowen_ball_area(&sys, n, 0.1).unwrap();
        let sampled = sampled_ball_area(n, 0.1, 2_000_000);
        assert!((sampled / exact - 1.0).abs() < 0.01 * 3f64.powi(n as i32 - 1), "n={n}: {sampled} vs {exact}");
    }
    let ratio = bowen_ball_area(&sys, 9, 0.1).unwrap() / bowen_ball_area(&sys, 8, 0.1).unwrap();
    assert!((ratio - 0.381966).abs() < 1e-6);
}

#[test]
fn cocycle_products_are_positive_and_grow() {
    let sys = SkewSystem::cocycle(SQRT_2 - 1.0, vec![IntMat2::new(2, 1, 1, 1), IntMat2::new(1, 1, 1, 2)]).unwrap();
    let (lo, hi) = (sys.min_expansion().ln(), sys.max_norm().ln());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let omega = sys.driving.point(rng.random());
        let n = 25;
        let product = sys.linear_parts(&omega, n).iter().fold(IntMat2::IDENTITY, |acc, p| match p {
            LinearPart::Matrix(m) => m.mul(&acc),
            LinearPart::Scalar(_) => unreachable!(),
        });
        let entries = [product.a, product.b, product.c, product.d];
        assert!(entries.iter().all(|&e| e > 0));
        // Entry sum is 1ᵀP1: at least 2·lo^n and at most 2‖P‖.
        let growth = (entries.iter().sum::<i64>() as f64 / 2.0).ln() / n as f64;
        assert!(growth >= lo - 1e-12 && growth <= hi + 1e-12, "{lo} <= {growth} <= {hi}");
    }
}
