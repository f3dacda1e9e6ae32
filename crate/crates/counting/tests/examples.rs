//! Worked counting cases with exact answers.

use std::f64::consts::{LN_2, SQRT_2};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fibertherm::observable::TrigTerm;
use fibertherm::{bowen_distance, BasePoint, FiberPoint, Forcing, FourierTerm, Observable, SkewSystem};
use fibertherm_counting::{
    max_separated_set, min_spanning_count, CountRow, CountTable, GridSpec, Method, Restriction, ScanOrder,
    SearchOptions,
};

fn forced_cat() -> SkewSystem {
    let forcing = Forcing {
        components: [
            vec![FourierTerm { m: 1, a: 0.1, b: 0.05 }],
            vec![FourierTerm { m: 2, a: -0.07, b: 0.0 }],
        ],
    };
    SkewSystem::cat_map(SQRT_2 - 1.0, forcing).unwrap()
}

#[test]
fn three_points_fit_at_three_tenths() {
    let s = max_separated_set(&SkewSystem::doubling(), &BasePoint::Unit, 1, 0.3, None, &SearchOptions::default()).unwrap();
    assert_eq!(s.count(), 3);
}

#[test]
fn grid_counts_track_cylinder_counts() {
    let sys = SkewSystem::doubling();
    for eps in [0.4, 0.45] {
        for n in 1..=12 {
            let opts = SearchOptions {
                grid: Some(GridSpec {
                    resolution: 1 << 16,
                    order: ScanOrder::Lexicographic,
                }),
                budget: u64::MAX,
            };
            let s = max_separated_set(&sys, &BasePoint::Unit, n, eps, None, &opts).unwrap();
            let gap = (s.count() as f64).ln() - n as f64 * LN_2;
            assert!(gap.abs() <= 0.05 * n as f64, "eps={eps} n={n}: {gap}");
        }
    }
}

#[test]
fn separated_sets_pass_the_audit_and_are_maximal() {
    let sys = forced_cat();
    let omega = sys.driving.point(0.7);
    let grid = GridSpec::for_epsilon(0.2);
    let opts = SearchOptions {
        grid: Some(grid),
        ..SearchOptions::default()
    };
    for n in [1, 3, 5] {
        let s = max_separated_set(&sys, &omega, n, 0.2, None, &opts).unwrap();
        assert!(s.violations(&sys, 1e-12).is_empty());
        let k = grid.resolution;
        let lattice: Vec<FiberPoint> = (0..k * k)
            .map(|i| FiberPoint::torus((i / k) as f64 / k as f64, (i % k) as f64 / k as f64))
            .collect();
        assert!(s.uncovered(&sys, &lattice).is_empty());
    }
}

#[test]
fn grid_counts_do_not_decrease_as_epsilon_shrinks() {
    let sys = forced_cat();
    let omega = sys.driving.point(0.2);
    let grid = GridSpec {
        resolution: 96,
        order: ScanOrder::Lexicographic,
    };
    let mut table = CountTable::default();
    for eps in [0.3, 0.2, 0.15, 0.1] {
        for n in [1, 2, 3] {
            let opts = SearchOptions {
                grid: Some(grid),
                ..SearchOptions::default()
            };
            let s = max_separated_set(&sys, &omega, n, eps, None, &opts).unwrap();
            table.rows.push(CountRow {
                n,
                epsilon: Some(eps),
                alpha: None,
                delta: None,
                count: s.count() as u128,
                method: Method::Grid,
                empty: s.is_empty(),
            });
        }
    }
    assert!(table.monotonicity_violations().is_empty());
    let csv = table.to_csv();
    assert!(csv.starts_with("n,epsilon,alpha,delta,count,method\n"));
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.lines().nth(1).unwrap().starts_with("1,0.3,,,"));
}

#[test]
fn impossible_restriction_counts_one() {
    let sys = forced_cat();
    let phi = Observable::fiber_trig(vec![TrigTerm { m: [1, 0], c: 1.0, s: 0.0 }]);
    let r = Restriction {
        alpha: phi.sup_norm() + 1.0,
        phi,
        delta: 0.1,
    };
    let s = max_separated_set(&sys, &sys.driving.point(0.1), 4, 0.2, Some(&r), &SearchOptions::default()).unwrap();
    assert!(s.is_empty());
    assert_eq!(s.count(), 1);
}

#[test]
fn spanning_counts_of_tight_samples() {
    let sys = forced_cat();
    let omega = sys.driving.point(0.5);
    assert_eq!(min_spanning_count(&sys, &omega, 3, 0.1, &[FiberPoint::torus(0.3, 0.3)], 0.1).unwrap().count, 1);
    let center = FiberPoint::torus(0.5, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    // Offsets small enough that three iterates stay within ε/2.
    let tight: Vec<FiberPoint> = (0..200)
        .map(|_| center.translate([rng.random_range(-1e-3..1e-3), rng.random_range(-1e-3..1e-3)]))
        .collect();
    assert!(tight.iter().all(|p| bowen_distance(&sys, &omega, &center, p, 3) < 0.05));
    assert_eq!(min_spanning_count(&sys, &omega, 3, 0.1, &tight, 0.1).unwrap().count, 1);
}
