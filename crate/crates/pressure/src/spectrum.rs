//! Legendre spectra and level-set counting rates.
//!
//! Conjugates are minima over the supplied q grid; when the minimum sits
//! on a grid endpoint the true infimum may lie outside, so the point is
//! flagged instead of extrapolated.

use fibertherm::base::BasePoint;
use fibertherm_counting::{cylinder_counts, Budget, GridSpec, LatticeSearch, DEFAULT_BUDGET};
use fibertherm::error::{invalid, Result};
use fibertherm::observable::Observable;
use crate::pressure::{omega_samples, pressure_curve, PressureCurve, PressureMethod, PressureOptions};
use fibertherm::skew::{FiberKind, SkewSystem};
use fibertherm::stats::{fit_line, LineFit};

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumCurve {
    pub alpha: Vec<f64>,
    pub value: Vec<f64>,
    /// Minimizing `q` for each α.
    pub argmin: Vec<f64>,
    /// Minimum attained at an endpoint of the q grid.
    pub boundary: Vec<bool>,
    /// Range of one-sided slopes at the ends of the pressure curve, an
    /// estimate of the interval of attainable averages.
    pub observed_range: (f64, f64),
    /// Largest dip of a point below the chord through its neighbors.
    pub concavity_defect: f64,
}

/// `α ↦ min_q (π̂(q) - qα)` over the curve's grid.
pub fn legendre_conjugate(curve: &PressureCurve, alpha_grid: &[f64]) -> Result<SpectrumCurve> {
    let m = curve.q.len();
    if m < 3 {
        return Err(invalid("a pressure curve needs at least 3 points"));
    }
    let mut value = Vec::with_capacity(alpha_grid.len());
    let mut argmin = Vec::with_capacity(alpha_grid.len());
    let mut boundary = Vec::with_capacity(alpha_grid.len());
    for &a in alpha_grid {
        let (i, v) = curve
            .q
            .iter()
            .zip(&curve.pressure)
            .map(|(q, p)| p - q * a)
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
        value.push(v);
        argmin.push(curve.q[i]);
        boundary.push(i == 0 || i == m - 1);
    }
    let lo = (curve.pressure[1] - curve.pressure[0]) / (curve.q[1] - curve.q[0]);
    let hi = (curve.pressure[m - 1] - curve.pressure[m - 2]) / (curve.q[m - 1] - curve.q[m - 2]);
    let negated: Vec<f64> = value.iter().map(|v| -v).collect();
    Ok(SpectrumCurve {
        alpha: alpha_grid.to_vec(),
        concavity_defect: crate::pressure::convexity_defect(alpha_grid, &negated),
        value,
        argmin,
        boundary,
        observed_range: (lo, hi),
    })
}

/// How level-set counts are produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CountMethod {
    /// Exact binomial counts for the doubling system with a digit
    /// observable, otherwise the default lattice for ε.
    Auto,
    Cylinder,
    Grid(GridSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetOptions {
    pub eps: f64,
    pub ns: Vec<usize>,
    /// Strictly decreasing.
    pub deltas: Vec<f64>,
    pub method: CountMethod,
    pub budget: u64,
}

impl LevelSetOptions {
    pub fn new(eps: f64, ns: Vec<usize>, deltas: Vec<f64>) -> LevelSetOptions {
        LevelSetOptions {
            eps,
            ns,
            deltas,
            method: CountMethod::Auto,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Counts and fit at one δ.
#[derive(Clone, Debug, PartialEq)]
pub struct DeltaFit {
    pub delta: f64,
    pub counts: Vec<u128>,
    pub fit: LineFit,
    pub empty: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetRate {
    pub alpha: f64,
    /// Slope at the smallest δ.
    pub rate: f64,
    pub stderr: f64,
    pub per_delta: Vec<DeltaFit>,
    /// Every deviation set was empty: α lies outside the observed range
    /// and the rate 0 is a convention, not an entropy.
    pub out_of_range: bool,
}

fn check_level_options(opts: &LevelSetOptions) -> Result<()> {
    if opts.deltas.len() < 2 {
        return Err(invalid("δ schedule needs at least 2 entries"));
    }
    if opts.deltas.windows(2).any(|w| w[0] <= w[1]) || opts.deltas.iter().any(|&d| d <= 0.0) {
        return Err(invalid("δ schedule must be positive and strictly decreasing"));
    }
    if opts.ns.len() < 2 || opts.ns.windows(2).any(|w| w[0] >= w[1]) || opts.ns[0] == 0 {
        return Err(invalid("n range must be positive and strictly increasing"));
    }
    Ok(())
}

fn exact_counts(sys: &SkewSystem, phi: &Observable, method: CountMethod) -> Result<bool> {
    let exact = matches!(sys.fiber, FiberKind::Doubling) && phi.digit_affine().is_some();
    match method {
        CountMethod::Cylinder if !exact => Err(invalid("cylinder counts need the doubling system and a digit observable")),
        CountMethod::Cylinder => Ok(true),
        CountMethod::Auto => Ok(exact),
        CountMethod::Grid(_) => Ok(false),
    }
}

fn finish(alpha: f64, per_delta: Vec<DeltaFit>) -> LevelSetRate {
    let last = per_delta.last().unwrap();
    let out_of_range = per_delta.iter().all(|d| d.empty.iter().all(|&e| e));
    let (rate, stderr) = if out_of_range { (0.0, 0.0) } else { (last.fit.slope, last.fit.stderr) };
    LevelSetRate {
        alpha,
        rate,
        stderr,
        per_delta,
        out_of_range,
    }
}

/// Slope of `log count` in `n`. Empty deviation sets carry the count-1
/// convention, not a measurement, so they are left out whenever two or
/// more nonempty counts remain.
fn fit_counts(ns: &[usize], counts: &[u128], empty: &[bool]) -> LineFit {
    let keep = |i: usize| empty.iter().filter(|&&e| !e).count() < 2 || !empty[i];
    let xs: Vec<f64> = (0..ns.len()).filter(|&i| keep(i)).map(|i| ns[i] as f64).collect();
    let ys: Vec<f64> = (0..ns.len()).filter(|&i| keep(i)).map(|i| (counts[i] as f64).ln()).collect();
    fit_line(&xs, &ys)
}

/// Level-set rates for several α at one base point, sharing the lattice
/// table and the Birkhoff sums.
pub fn level_set_rates(
    sys: &SkewSystem,
    phi: &Observable,
    omega: &BasePoint,
    alphas: &[f64],
    opts: &LevelSetOptions,
) -> Result<Vec<LevelSetRate>> {
    check_level_options(opts)?;
    if exact_counts(sys, phi, opts.method)? {
        return alphas
            .iter()
            .map(|&alpha| {
                let per_delta = opts
                    .deltas
                    .iter()
                    .map(|&delta| {
                        let rows = opts
                            .ns
                            .iter()
                            .map(|&n| cylinder_counts(sys, phi, n, alpha, delta))
                            .collect::<Result<Vec<_>>>()?;
                        let counts: Vec<u128> = rows.iter().map(|r| r.count).collect();
                        let empty: Vec<bool> = rows.iter().map(|r| r.empty).collect();
                        Ok(DeltaFit {
                            delta,
                            fit: fit_counts(&opts.ns, &counts, &empty),
                            counts,
                            empty,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(finish(alpha, per_delta))
            })
            .collect();
    }
    let grid = match opts.method {
        CountMethod::Grid(g) => g,
        _ => GridSpec::for_epsilon(opts.eps),
    };
    let budget = Budget::new(opts.budget);
    let search = LatticeSearch::new(sys, omega, &opts.ns, opts.eps, grid, &budget)?;
    let sums = search.birkhoff(phi)?;
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let per_delta = opts
                .deltas
                .iter()
                .map(|&delta| {
                    let sets = search.separated(Some((&sums, alpha, delta)));
                    let counts: Vec<u128> = sets.iter().map(|s| s.count() as u128).collect();
                    let empty: Vec<bool> = sets.iter().map(|s| s.is_empty()).collect();
                    DeltaFit {
                        delta,
                        fit: fit_counts(&opts.ns, &counts, &empty),
                        counts,
                        empty,
                    }
                })
                .collect();
            finish(alpha, per_delta)
        })
        .collect())
}

/// Slope of `log M(α, δ, n, ε, ω)` in `n` at the smallest δ, with the other
/// δ values kept as a trend diagnostic.
pub fn level_set_rate(
    sys: &SkewSystem,
    phi: &Observable,
    omega: &BasePoint,
    alpha: f64,
    opts: &LevelSetOptions,
) -> Result<LevelSetRate> {
    Ok(level_set_rates(sys, phi, omega, &[alpha], opts)?.pop().unwrap())
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckConfig {
    pub q_grid: Vec<f64>,
    pub pressure: PressureOptions,
    pub level: LevelSetOptions,
}

impl CrosscheckConfig {
    /// Exact-count configuration for the doubling system.
    pub fn oracle() -> CrosscheckConfig {
        CrosscheckConfig {
            q_grid: (-12..=12).map(|i| i as f64 * 0.5).collect(),
            pressure: PressureOptions::new(0.1, (8..=16).collect()),
            level: LevelSetOptions::new(0.1, (20..=120).step_by(20).collect(), vec![0.1, 0.05, 0.02]),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrosscheckRow {
    pub alpha: f64,
    pub omega_index: usize,
    pub legendre: f64,
    pub rate: f64,
    pub discrepancy: f64,
    pub boundary: bool,
    pub out_of_range: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrosscheckReport {
    pub curve: PressureCurve,
    pub spectrum: SpectrumCurve,
    pub rows: Vec<CrosscheckRow>,
    /// Over rows that are neither boundary-flagged nor out of range.
    pub max_interior_discrepancy: f64,
}

/// Tabulates `|Λ̂(α, ω) - π̂*(α)|` for every α and sampled base point.
pub fn spectrum_crosscheck(
    sys: &SkewSystem,
    phi: &Observable,
    alpha_grid: &[f64],
    config: &CrosscheckConfig,
) -> Result<CrosscheckReport> {
    let curve = pressure_curve(sys, phi, &config.q_grid, &config.pressure)?;
    let spectrum = legendre_conjugate(&curve, alpha_grid)?;
    let omegas = omega_samples(sys, config.pressure.omega_samples, config.pressure.seed);
    let mut rows = Vec::new();
    for (w, omega) in omegas.iter().enumerate() {
        let rates = level_set_rates(sys, phi, omega, alpha_grid, &config.level)?;
        for (i, r) in rates.iter().enumerate() {
            rows.push(CrosscheckRow {
                alpha: alpha_grid[i],
                omega_index: w,
                legendre: spectrum.value[i],
                rate: r.rate,
                discrepancy: (r.rate - spectrum.value[i]).abs(),
                boundary: spectrum.boundary[i],
                out_of_range: r.out_of_range,
            });
        }
    }
    let max_interior_discrepancy = rows
        .iter()
        .filter(|r| !r.boundary && !r.out_of_range)
        .map(|r| r.discrepancy)
        .fold(0.0, f64::max);
    Ok(CrosscheckReport {
        curve,
        spectrum,
        rows,
        max_interior_discrepancy,
    })
}

/// Pressure method matching a count method, for configurations that set
/// one lattice for both.
pub fn matching_pressure_method(m: CountMethod) -> PressureMethod {
    match m {
        CountMethod::Auto => PressureMethod::Auto,
        CountMethod::Cylinder => PressureMethod::Cylinder,
        CountMethod::Grid(g) => PressureMethod::Grid(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_entropy(a: f64) -> f64 {
        -a * a.ln() - (1.0 - a) * (1.0 - a).ln()
    }

    fn constant_curve(c: f64, qmax: f64) -> PressureCurve {
        let q: Vec<f64> = (-4..=4).map(|i| i as f64 * qmax / 4.0).collect();
        PressureCurve {
            pressure: vec![c; q.len()],
            stderr: vec![0.0; q.len()],
            convexity_defect: 0.0,
            q,
            estimates: Vec::new(),
            ns: Vec::new(),
            eps: 0.1,
            method: fibertherm_counting::Method::Grid,
        }
    }

    #[test]
    fn constant_curve_conjugate() {
        let s = legendre_conjugate(&constant_curve(0.7, 3.0), &[-0.2, 0.0, 0.1]).unwrap();
        assert!((s.value[0] - (0.7 - 0.6)).abs() < 1e-12);
        assert_eq!(s.value[1], 0.7);
        assert!((s.value[2] - (0.7 - 0.3)).abs() < 1e-12);
        assert!(s.boundary[0] && s.boundary[2]);
    }

    #[test]
    fn oracle_conjugate() {
        let sys = SkewSystem::doubling();
        let c = CrosscheckConfig::oracle();
        let curve = pressure_curve(&sys, &Observable::first_digit(), &c.q_grid, &c.pressure).unwrap();
        let s = legendre_conjugate(&curve, &[0.3, 0.5]).unwrap();
        assert!((s.value[1] - 2f64.ln()).abs() < 1e-9);
        assert!((s.value[0] - binary_entropy(0.3)).abs() < 0.01);
    }

    #[test]
    fn impossible_alpha_is_flagged() {
        let sys = SkewSystem::doubling();
        let o = LevelSetOptions::new(0.1, vec![4, 8, 12, 16], vec![0.1, 0.05]);
        let r = level_set_rate(&sys, &Observable::first_digit(), &BasePoint::Unit, 1.5, &o).unwrap();
        assert!(r.out_of_range);
        assert_eq!(r.rate, 0.0);
    }

    #[test]
    fn balanced_rate() {
        let sys = SkewSystem::doubling();
        let o = LevelSetOptions::new(0.1, vec![8, 12, 16, 20], vec![0.1, 0.05]);
        let r = level_set_rate(&sys, &Observable::first_digit(), &BasePoint::Unit, 0.5, &o).unwrap();
        assert!((r.rate - 2f64.ln()).abs() < 0.05, "{}", r.rate);
    }

    #[test]
    fn grid_counts_at_impossible_alpha() {
        let sys = SkewSystem::doubling();
        let mut o = LevelSetOptions::new(0.2, vec![2, 3, 4], vec![0.1, 0.05]);
        o.method = CountMethod::Grid(GridSpec::for_epsilon(0.2));
        let r = level_set_rate(&sys, &Observable::zero(), &BasePoint::Unit, 3.0, &o).unwrap();
        assert!(r.out_of_range);
    }
}
