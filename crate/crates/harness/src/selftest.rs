//! Oracle battery. Every check compares an estimator with a closed form or
//! an exact count at a pinned tolerance. Files hold results only; runtimes
//! stay in memory so reruns are byte-identical.

use std::f64::consts::{LN_2, SQRT_2};
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fibertherm::base::{base_step, BasePoint};
use fibertherm_counting::oracle_cover_and_packing;
use fibertherm_katok::{katok_at_expansivity, katok_entropy_estimate, KatokOptions, MeasureSampler};
use fibertherm_pressure::pressure::{pressure_curve, pressure_estimate, PressureCurve, PressureMethod, PressureOptions};
use fibertherm_shadowing::{mixing_gap, random_specification, shadow};
use fibertherm::skew::fiber_distance;
use fibertherm_pressure::spectrum::{legendre_conjugate, level_set_rates, LevelSetOptions};
use fibertherm::{
    bowen_ball_area, bowen_distance, fiber_step, hyperbolic_frame, FiberPoint, Forcing, FourierTerm, IntMat2, Observable,
    SkewSystem,
};

use crate::output::{num, OutputDir, Provenance};
use crate::run::Failure;

/// One compared quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub group: &'static str,
    pub quantity: String,
    pub value: f64,
    pub target: f64,
    /// Allowed `|value - target|`, or the upper bound when `target` is NaN.
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn near(group: &'static str, quantity: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Check {
        Check {
            group,
            quantity: quantity.into(),
            value,
            target,
            tolerance,
            pass: (value - target).abs() <= tolerance,
        }
    }

    fn at_most(group: &'static str, quantity: impl Into<String>, value: f64, bound: f64) -> Check {
        Check {
            group,
            quantity: quantity.into(),
            value,
            target: f64::NAN,
            tolerance: bound,
            pass: value <= bound,
        }
    }

    fn relative(group: &'static str, quantity: impl Into<String>, value: f64, target: f64, rel: f64) -> Check {
        Check::near(group, quantity, value, target, rel * target.abs())
    }
}

#[derive(Clone, Debug)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Multiplies the unstable eigenvalue used by the entropy oracles; 1
    /// except in sensitivity tests.
    pub lambda_scale: f64,
    /// Restricts the run to these groups.
    pub only: Option<Vec<String>>,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 0,
            lambda_scale: 1.0,
            only: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupResult {
    pub name: &'static str,
    pub checks: Vec<Check>,
    pub seconds: f64,
}

impl GroupResult {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Clone, Debug)]
pub struct SelftestReport {
    pub groups: Vec<GroupResult>,
}

impl SelftestReport {
    pub fn pass(&self) -> bool {
        self.groups.iter().all(GroupResult::pass)
    }

    pub fn group(&self, name: &str) -> Option<&GroupResult> {
        self.groups.iter().find(|g| g.name == name)
    }

    /// Fixed-width pass/fail table, one row per check.
    pub fn table(&self) -> String {
        let mut s = format!("{:<20} {:<44} {:>12} {:>12} {:>10}  result\n", "group", "quantity", "value", "target", "tol");
        for c in self.groups.iter().flat_map(|g| &g.checks) {
            s.push_str(&format!(
                "{:<20} {:<44} {:>12.6} {:>12} {:>10.3e}  {}\n",
                c.group,
                c.quantity,
                c.value,
                if c.target.is_nan() { "<=".to_string() } else { format!("{:.6}", c.target) },
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Group names in run order.
pub const GROUPS: [&str; 8] = [
    "oracle_pressure",
    "oracle_spectrum",
    "cat_entropy",
    "fiber_independence",
    "shadowing",
    "katok",
    "gibbs_ratio",
    "invariants",
];

/// Cat map `[[2,1],[1,1]]` over the silver-ratio rotation with a
/// two-harmonic forcing.
pub fn reference_system() -> SkewSystem {
    let forcing = Forcing {
        components: [
            vec![FourierTerm { m: 1, a: 0.1, b: 0.05 }],
            vec![FourierTerm { m: 2, a: -0.07, b: 0.0 }],
        ],
    };
    SkewSystem::cat_map(SQRT_2 - 1.0, forcing).expect("cat map is hyperbolic")
}

fn binary_entropy(a: f64) -> f64 {
    -a * a.ln() - (1.0 - a) * (1.0 - a).ln()
}

const ORACLE_Q: [f64; 7] = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0];
const ORACLE_ALPHA: [f64; 5] = [0.3, 0.4, 0.5, 0.6, 0.7];

fn oracle_curve() -> Result<PressureCurve, Failure> {
    let mut po = PressureOptions::new(0.1, (8..=16).collect());
    po.method = PressureMethod::Cylinder;
    Ok(pressure_curve(&SkewSystem::doubling(), &Observable::first_digit(), &ORACLE_Q, &po)?)
}

fn oracle_level_options() -> LevelSetOptions {
    LevelSetOptions::new(0.1, (20..=120).step_by(20).collect(), vec![0.1, 0.05, 0.02])
}

struct Ctx<'a> {
    opts: &'a SelftestOptions,
    dir: &'a mut OutputDir,
}

fn oracle_pressure(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let curve = oracle_curve()?;
    let rows: Vec<Vec<String>> = (0..curve.q.len())
        .map(|i| {
            let exact = (1.0 + curve.q[i].exp()).ln();
            vec![num(curve.q[i]), num(curve.pressure[i]), num(exact)]
        })
        .collect();
    cx.dir.csv("oracle_pressure.csv", &["q", "pressure", "exact"], &rows)?;
    Ok(curve
        .q
        .iter()
        .zip(&curve.pressure)
        .map(|(&q, &p)| Check::near("oracle_pressure", format!("pressure q={q}"), p, (1.0 + q.exp()).ln(), 0.02))
        .collect())
}

fn oracle_spectrum(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let sys = SkewSystem::doubling();
    let phi = Observable::first_digit();
    let spec = legendre_conjugate(&oracle_curve()?, &ORACLE_ALPHA)?;
    let rates = level_set_rates(&sys, &phi, &BasePoint::Unit, &ORACLE_ALPHA, &oracle_level_options())?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for (i, &a) in ORACLE_ALPHA.iter().enumerate() {
        let h = binary_entropy(a);
        checks.push(Check::near("oracle_spectrum", format!("legendre alpha={a}"), spec.value[i], h, 0.05));
        checks.push(Check::near("oracle_spectrum", format!("level rate alpha={a}"), rates[i].rate, h, 0.05));
        checks.push(Check::at_most(
            "oracle_spectrum",
            format!("discrepancy alpha={a}"),
            (spec.value[i] - rates[i].rate).abs(),
            0.05,
        ));
        rows.push(vec![num(a), num(spec.value[i]), num(rates[i].rate), num(h)]);
    }
    cx.dir.csv("oracle_spectrum.csv", &["alpha", "legendre", "counting_rate", "binary_entropy"], &rows)?;
    Ok(checks)
}

fn cat_entropy(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let sys = reference_system();
    let lambda = hyperbolic_frame(&sys)?.lambda_u * cx.opts.lambda_scale;
    let mut po = PressureOptions::new(0.05, (6..=12).collect());
    po.omega_samples = 3;
    po.seed = cx.opts.seed;
    let e = pressure_estimate(&sys, &Observable::zero(), &po)?;
    let rows: Vec<Vec<String>> = e
        .fits
        .iter()
        .enumerate()
        .map(|(i, f)| vec![i.to_string(), num(f.omega.phase()), num(f.fit.slope)])
        .collect();
    cx.dir.csv("cat_entropy.csv", &["omega_index", "omega", "slope"], &rows)?;
    let slopes: Vec<f64> = e.fits.iter().map(|f| f.fit.slope).collect();
    let spread = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![
        Check::relative("cat_entropy", "entropy eps=0.05", e.slope, lambda.ln(), 0.05),
        Check::at_most("cat_entropy", "omega spread", spread, 0.05),
        Check::at_most("cat_entropy", "fiber steps", e.fiber_steps as f64, 1e7),
    ])
}

fn random_torus(rng: &mut ChaCha8Rng) -> FiberPoint {
    FiberPoint::torus(rng.random(), rng.random())
}

fn fiber_independence(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let sys = reference_system();
    let mut rng = ChaCha8Rng::seed_from_u64(cx.opts.seed ^ 0x4649_4245);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (x, y) = (random_torus(&mut rng), random_torus(&mut rng));
        let n = rng.random_range(1..=15);
        let w1 = sys.driving.point(rng.random());
        let w2 = sys.driving.point(rng.random());
        worst = worst.max((bowen_distance(&sys, &w1, &x, &y, n) - bowen_distance(&sys, &w2, &x, &y, n)).abs());
    }
    Ok(vec![Check::at_most("fiber_independence", "max omega difference (1000 pairs)", worst, 1e-12)])
}

fn shadowing(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    const EPS: [f64; 3] = [0.05, 0.1, 0.2];
    let sys = reference_system();
    let gaps: Vec<i64> = EPS.iter().map(|&e| mixing_gap(&sys, e).map(|g| g.n)).collect::<Result<_, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cx.opts.seed ^ 0x5348_4144);
    let (mut ok, mut intervals, mut within_half) = (0usize, 0usize, 0usize);
    let mut worst_ratio: f64 = 0.0;
    let mut rows = Vec::new();
    for i in 0..500 {
        let eps = EPS[i % 3];
        let k = rng.random_range(1..=6);
        let spec = random_specification(&sys, &mut rng, k, gaps[i % 3], 20)?;
        let sh = shadow(&sys, &spec, eps)?;
        let c = &sh.certificate;
        ok += (c.max_distance < eps) as usize;
        intervals += c.interval_max.len();
        within_half += c.interval_max.iter().filter(|&&d| d <= eps / 2.0).count();
        worst_ratio = worst_ratio.max(c.max_distance / eps);
        rows.push(vec![i.to_string(), num(eps), k.to_string(), num(c.max_distance)]);
    }
    cx.dir.csv("shadowing.csv", &["index", "epsilon", "intervals", "max_distance"], &rows)?;
    Ok(vec![
        Check::near("shadowing", "verified specifications", ok as f64, 500.0, 0.0),
        Check::at_most("shadowing", "max distance / eps", worst_ratio, 1.0),
        Check {
            group: "shadowing",
            quantity: "intervals within eps/2 (fraction)".into(),
            value: within_half as f64 / intervals as f64,
            target: f64::NAN,
            tolerance: 0.99,
            pass: within_half as f64 >= 0.99 * intervals as f64,
        },
    ])
}

fn katok(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let doubling = SkewSystem::doubling();
    let o = KatokOptions::new(0.0, 0.1, (6..=12).collect());
    let d = katok_at_expansivity(&doubling, &MeasureSampler::for_system(&doubling, cx.opts.seed), &BasePoint::Unit, &o)?;

    let sys = reference_system();
    let lambda = hyperbolic_frame(&sys)?.lambda_u * cx.opts.lambda_scale;
    let omega = sys.driving.point(0.3);
    let sampler = MeasureSampler::for_system(&sys, cx.opts.seed);
    let c1 = katok_entropy_estimate(&sys, &sampler, &omega, &KatokOptions::new(0.1, 0.1, (5..=10).collect()))?;
    let c3 = katok_entropy_estimate(&sys, &sampler, &omega, &KatokOptions::new(0.1, 0.3, (5..=10).collect()))?;
    let mut rows = Vec::new();
    for (name, e) in [("doubling", &d), ("cat delta=0.1", &c1), ("cat delta=0.3", &c3)] {
        for r in &e.rows {
            rows.push(vec![name.to_string(), r.n.to_string(), r.count.to_string(), num(e.eps), num(e.delta), r.sample_size.to_string()]);
        }
    }
    cx.dir.csv("katok.csv", &["run", "n", "spanning_count", "epsilon", "delta", "sample_size"], &rows)?;
    Ok(vec![
        Check::relative("katok", "doubling at expansivity scale", d.slope, LN_2, 0.1),
        Check::relative("katok", "cat eps=0.1 delta=0.1", c1.slope, lambda.ln(), 0.1),
        Check::at_most("katok", "delta gap (0.1 vs 0.3)", (c1.slope - c3.slope).abs(), 0.1),
    ])
}

fn gibbs_ratio(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let sys = reference_system();
    let lambda = hyperbolic_frame(&sys)?.lambda_u;
    let products: Vec<f64> = (3..=10)
        .map(|n| bowen_ball_area(&sys, n, 0.1).map(|a| a * lambda.powi(n as i32)))
        .collect::<Result<_, _>>()?;
    let rows: Vec<Vec<String>> = products.iter().enumerate().map(|(i, p)| vec![(i + 3).to_string(), num(*p)]).collect();
    cx.dir.csv("gibbs_ratio.csv", &["n", "area_times_lambda_n"], &rows)?;
    let hi = products.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = products.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(vec![Check::at_most("gibbs_ratio", "max/min - 1 over n=3..10", hi / lo - 1.0, 0.02)])
}

/// Seeded invariant sweeps: metric axioms, cocycle law, count monotonicity,
/// the cover/packing sandwich, curve shapes and the Legendre upper bound.
fn invariants(cx: &mut Ctx) -> Result<Vec<Check>, Failure> {
    let g = "invariants";
    let mut rng = ChaCha8Rng::seed_from_u64(cx.opts.seed ^ 0x494e_5641);
    let cat = reference_system();
    let cocycle = SkewSystem::cocycle(SQRT_2 - 1.0, vec![IntMat2::new(2, 1, 1, 1), IntMat2::new(1, 1, 1, 2)])?;
    let mut checks = Vec::new();

    let (mut sym, mut tri, mut self_d, mut mono) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..300 {
        let w = cat.driving.point(rng.random());
        let (x, y, z) = (random_torus(&mut rng), random_torus(&mut rng), random_torus(&mut rng));
        let n = rng.random_range(1..=12);
        let (dxy, dyx) = (bowen_distance(&cat, &w, &x, &y, n), bowen_distance(&cat, &w, &y, &x, n));
        let (dxz, dzy) = (bowen_distance(&cat, &w, &x, &z, n), bowen_distance(&cat, &w, &z, &y, n));
        sym = sym.max((dxy - dyx).abs());
        tri = tri.max(dxy - dxz - dzy);
        self_d = self_d.max(bowen_distance(&cat, &w, &x, &x, n));
        mono = mono.max(dxy - bowen_distance(&cat, &w, &x, &y, n + 1));
    }
    checks.push(Check::at_most(g, "metric symmetry", sym, 0.0));
    checks.push(Check::at_most(g, "metric triangle excess", tri, 1e-12));
    checks.push(Check::at_most(g, "metric d(x,x)", self_d, 0.0));
    checks.push(Check::at_most(g, "metric monotone in n", mono, 0.0));

    let mut cocycle_err: f64 = 0.0;
    for sys in [&cat, &cocycle] {
        for _ in 0..250 {
            let w = sys.driving.point(rng.random());
            let x = random_torus(&mut rng);
            let (s, t) = (rng.random_range(-20..=20), rng.random_range(-20..=20));
            let direct = fiber_step(sys, &w, &x, s + t)?;
            let mid = fiber_step(sys, &w, &x, s)?;
            let composed = fiber_step(sys, &base_step(&sys.driving, &w, s), &mid, t)?;
            cocycle_err = cocycle_err.max(fiber_distance(&direct, &composed));
        }
    }
    checks.push(Check::at_most(g, "cocycle law (500 triples)", cocycle_err, 1e-9));

    // Exact counts on the doubling oracle.
    let doubling = SkewSystem::doubling();
    let digit = Observable::first_digit();
    let (mut mono_bad, mut sandwich_bad, mut cases) = (0u32, 0u32, 0u32);
    for n in 4..=12 {
        for &(alpha, delta) in &[(0.5, 0.1), (0.3, 0.05), (0.7, 0.2), (0.5, 0.5)] {
            for &eps in &[0.2, 0.1, 0.05] {
                let (cover, pack) = oracle_cover_and_packing(&doubling, &digit, n, alpha, delta, eps)?;
                let (cover_half, pack_half) = oracle_cover_and_packing(&doubling, &digit, n, alpha, delta, eps / 2.0)?;
                cases += 1;
                mono_bad += (pack_half < pack) as u32;
                sandwich_bad += !(cover <= pack && pack <= cover_half) as u32;
            }
        }
    }
    checks.push(Check::at_most(g, format!("count monotonicity failures of {cases}"), mono_bad as f64, 0.0));
    checks.push(Check::at_most(g, format!("sandwich failures of {cases}"), sandwich_bad as f64, 0.0));

    let curve = oracle_curve()?;
    checks.push(Check::at_most(g, "pressure convexity defect", curve.convexity_defect, 1e-2));
    let alphas: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
    let spec = legendre_conjugate(&curve, &alphas)?;
    checks.push(Check::at_most(g, "spectrum concavity defect", spec.concavity_defect, 1e-2));
    let rates = level_set_rates(&doubling, &digit, &BasePoint::Unit, &alphas, &oracle_level_options())?;
    let excess = rates
        .iter()
        .zip(&spec.value)
        .filter(|(r, _)| !r.out_of_range)
        .map(|(r, v)| r.rate - v)
        .fold(f64::NEG_INFINITY, f64::max);
    checks.push(Check::at_most(g, "level rate minus Legendre", excess, 0.05));
    Ok(checks)
}

type GroupFn = fn(&mut Ctx) -> Result<Vec<Check>, Failure>;

fn group_fn(name: &str) -> GroupFn {
    match name {
        "oracle_pressure" => oracle_pressure,
        "oracle_spectrum" => oracle_spectrum,
        "cat_entropy" => cat_entropy,
        "fiber_independence" => fiber_independence,
        "shadowing" => shadowing,
        "katok" => katok,
        "gibbs_ratio" => gibbs_ratio,
        _ => invariants,
    }
}

fn config_text(opts: &SelftestOptions) -> String {
    let mut s = format!("task = \"selftest\"\nseed = {}\nlambda_scale = {}\n", opts.seed, num(opts.lambda_scale));
    if let Some(only) = &opts.only {
        let quoted: Vec<String> = only.iter().map(|g| format!("\"{g}\"")).collect();
        s.push_str(&format!("only = [{}]\n", quoted.join(", ")));
    }
    s
}

/// Runs the battery and writes `selftest.csv`, the per-group CSVs and
/// `summary.json` into `out`.
pub fn selftest(opts: &SelftestOptions, out: &Path) -> Result<SelftestReport, Failure> {
    if let Some(only) = &opts.only {
        if let Some(bad) = only.iter().find(|g| !GROUPS.contains(&g.as_str())) {
            return Err(Failure::Config(crate::config::ConfigError::at("only", format!("unknown check group {bad}"))));
        }
    }
    let mut dir = OutputDir::create(out, Provenance::new(&config_text(opts), opts.seed))?;
    let mut groups = Vec::new();
    for name in GROUPS {
        if opts.only.as_ref().is_some_and(|o| !o.iter().any(|g| g == name)) {
            continue;
        }
        let start = Instant::now();
        let checks = group_fn(name)(&mut Ctx { opts, dir: &mut dir })?;
        groups.push(GroupResult {
            name,
            checks,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    let report = SelftestReport { groups };
    let rows: Vec<Vec<String>> = report
        .groups
        .iter()
        .flat_map(|g| &g.checks)
        .map(|c| {
            vec![
                c.group.to_string(),
                c.quantity.clone(),
                num(c.value),
                if c.target.is_nan() { String::new() } else { num(c.target) },
                num(c.tolerance),
                if c.pass { "pass" } else { "fail" }.to_string(),
            ]
        })
        .collect();
    dir.csv("selftest.csv", &["group", "quantity", "value", "target", "tolerance", "result"], &rows)?;
    let failed: Vec<&str> = report.groups.iter().filter(|g| !g.pass()).map(|g| g.name).collect();
    dir.json(
        "summary.json",
        serde_json::json!({ "task": "selftest", "pass": report.pass(), "failed_groups": failed }),
    )?;
    Ok(report)
}
