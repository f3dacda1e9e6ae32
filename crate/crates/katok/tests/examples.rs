use std::f64::consts::SQRT_2;

use fibertherm::{BasePoint, Forcing, FourierTerm, IntMat2, SkewSystem};
use fibertherm_katok::{katok_at_expansivity, katok_entropy_estimate, KatokOptions, MeasureSampler};

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
fn katok_is_insensitive_to_delta() {
    let sys = SkewSystem::doubling();
    let sampler = MeasureSampler::for_system(&sys, 3);
    let run = |delta| katok_at_expansivity(&sys, &sampler, &BasePoint::Unit, &KatokOptions::new(0.0, delta, (6..=12).collect())).unwrap();
    let (d1, d3) = (run(0.1), run(0.3));
    assert!((d1.slope - d3.slope).abs() <= 0.1);
    let mut o = KatokOptions::new(0.0, 0.99, (6..=12).collect());
    o.sample_size = 2000;
    let d99 = katok_at_expansivity(&sys, &sampler, &BasePoint::Unit, &o).unwrap();
    assert!(d99.slope <= d1.slope + 0.05, "{} vs {}", d99.slope, d1.slope);
}

#[test]
fn cocycle_sampler_is_labelled() {
    let sys = SkewSystem::cocycle(SQRT_2 - 1.0, vec![IntMat2::new(2, 1, 1, 1), IntMat2::new(1, 1, 1, 2)]).unwrap();
    let sampler = MeasureSampler::for_system(&sys, 1);
    let e = katok_entropy_estimate(&sys, &sampler, &sys.driving.point(0.2), &KatokOptions::new(0.05, 0.2, (2..=4).collect())).unwrap();
    assert!(!e.sampler_invariant);
    assert!(MeasureSampler::for_system(&forced_cat(), 1).proven_invariant(&forced_cat()));
}
