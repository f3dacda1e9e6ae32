//! Partition sums and finite-scale fiber pressure.
//!
//! Rates are least-squares slopes of `log Z_n` in `n`, which cancels the
//! bounded intercept. ε is never extrapolated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fibertherm::base::BasePoint;
use fibertherm_counting::{Budget, GridSpec, LatticeSearch, Method, ScanOrder, SeparatedSet, DEFAULT_BUDGET};
use fibertherm::error::{invalid, Result};
use fibertherm::observable::{birkhoff_sum, Observable};
use fibertherm::skew::{FiberKind, SkewSystem};
use fibertherm::stats::{fit_line, log_sum_exp, LineFit};

/// Default bound on `|q|` for pressure curves.
pub const Q_MAX: f64 = 6.0;

/// `Z_n = Σ_{x∈Q} exp(S_n φ(x))`.
pub fn partition_sum(sys: &SkewSystem, phi: &Observable, omega: &BasePoint, q: &SeparatedSet, n: usize) -> f64 {
    log_partition_sum(sys, phi, omega, q, n).exp()
}

/// `log Z_n`, computed without overflow. An empty set gives `-∞`.
pub fn log_partition_sum(sys: &SkewSystem, phi: &Observable, omega: &BasePoint, q: &SeparatedSet, n: usize) -> f64 {
    if let Some(c) = phi.as_constant() {
        if q.points.is_empty() {
            return f64::NEG_INFINITY;
        }
        return (q.points.len() as f64).ln() + c * n as f64;
    }
    log_sum_exp(q.points.iter().map(|x| birkhoff_sum(sys, phi, omega, x, n)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PressureMethod {
    /// Exact cylinders for the doubling system with a digit observable,
    /// otherwise a shuffled grid fine enough for ε.
    Auto,
    Cylinder,
    Grid(GridSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureOptions {
    pub eps: f64,
    pub ns: Vec<usize>,
    pub omega_samples: usize,
    pub seed: u64,
    pub method: PressureMethod,
    pub budget: u64,
}

impl PressureOptions {
    pub fn new(eps: f64, ns: Vec<usize>) -> PressureOptions {
        PressureOptions {
            eps,
            ns,
            omega_samples: 1,
            seed: 0,
            method: PressureMethod::Auto,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Shuffled lattice with `ε K ≈ 760`, capped at `2^14`. The packing
/// density of a shuffled greedy pass does not drift with `n`, so the slope
/// is unbiased; the cap keeps the table within the default budget.
pub fn fine_grid(eps: f64, seed: u64) -> GridSpec {
    GridSpec {
        resolution: ((760.0 / eps).ceil() as u64).clamp(16, 1 << 14),
        order: ScanOrder::Shuffled(seed),
    }
}

/// Slope fit of one base point.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaFit {
    pub omega: BasePoint,
    pub log_z: Vec<f64>,
    pub fit: LineFit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PressureEstimate {
    /// Mean of the per-ω slopes.
    pub slope: f64,
    pub stderr: f64,
    pub fits: Vec<OmegaFit>,
    /// Largest `|slope_ω - slope|`, the consistency check across base points.
    pub max_deviation: f64,
    pub method: Method,
    pub fiber_steps: u64,
}

fn check_ns(ns: &[usize]) -> Result<()> {
    if ns.len() < 4 {
        return Err(invalid("n range needs at least 4 entries"));
    }
    if ns[0] == 0 {
        return Err(invalid("n values must be positive"));
    }
    let step = ns[1] as i64 - ns[0] as i64;
    if step <= 0 || ns.windows(2).any(|w| w[1] as i64 - w[0] as i64 != step) {
        return Err(invalid("n range must be an increasing arithmetic sequence"));
    }
    Ok(())
}

/// Base points drawn from the seed; the point base yields copies of itself.
pub fn omega_samples(sys: &SkewSystem, count: usize, seed: u64) -> Vec<BasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| sys.driving.point(rng.random::<f64>())).collect()
}

fn uses_cylinders(sys: &SkewSystem, phi: &Observable, method: PressureMethod) -> Result<bool> {
    let exact = matches!(sys.fiber, FiberKind::Doubling) && phi.digit_affine().is_some();
    match method {
        PressureMethod::Cylinder if !exact => Err(invalid("cylinder method needs the doubling system and a digit observable")),
        PressureMethod::Cylinder => Ok(true),
        PressureMethod::Auto => Ok(exact),
        PressureMethod::Grid(_) => Ok(false),
    }
}

/// `log Z_n(qφ)` indexed `[ω][q][n]`.
struct PartitionTable {
    omegas: Vec<BasePoint>,
    log_z: Vec<Vec<Vec<f64>>>,
    method: Method,
    steps: u64,
}

fn partition_table(sys: &SkewSystem, phi: &Observable, qs: &[f64], opts: &PressureOptions) -> Result<PartitionTable> {
    check_ns(&opts.ns)?;
    if opts.omega_samples == 0 {
        return Err(invalid("at least one base sample is required"));
    }
    if !(opts.eps > 0.0 && opts.eps < 0.5) {
        return Err(invalid(format!("epsilon {} outside (0, 1/2)", opts.eps)));
    }
    let omegas = omega_samples(sys, opts.omega_samples, opts.seed);
    if uses_cylinders(sys, phi, opts.method)? {
        let rows = qs
            .iter()
            .map(|&q| {
                let scaled = phi.scaled(q);
                opts.ns
                    .iter()
                    .map(|&n| fibertherm_counting::cylinder_log_partition(sys, &scaled, n))
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok(PartitionTable {
            log_z: vec![rows; omegas.len()],
            omegas,
            method: Method::Cylinder,
            steps: 0,
        });
    }
    let budget = Budget::new(opts.budget);
    let mut log_z = Vec::with_capacity(omegas.len());
    for (w, omega) in omegas.iter().enumerate() {
        // Each base point gets its own scan order.
        let grid = match opts.method {
            PressureMethod::Grid(g) => g,
            _ => fine_grid(opts.eps, opts.seed.wrapping_add(w as u64 + 1)),
        };
        let search = LatticeSearch::new(sys, omega, &opts.ns, opts.eps, grid, &budget)?;
        let sets = search.separated(None);
        // Birkhoff sums of the members only; the sets do not depend on q.
        let mut sums: Vec<Vec<f64>> = Vec::with_capacity(sets.len());
        for set in &sets {
            if phi.as_constant().is_some() {
                sums.push(vec![phi.as_constant().unwrap() * set.n as f64; set.points.len()]);
            } else {
                budget.charge(set.points.len() as u64 * set.n as u64)?;
                sums.push(fibertherm::parallel::map_chunks(set.points.len(), |i| {
                    birkhoff_sum(sys, phi, omega, &set.points[i], set.n)
                }));
            }
        }
        let rows = qs
            .iter()
            .map(|&q| sums.iter().map(|s| log_sum_exp(s.iter().map(|v| q * v))).collect())
            .collect();
        log_z.push(rows);
    }
    Ok(PartitionTable {
        omegas,
        log_z,
        method: Method::Grid,
        steps: budget.spent(),
    })
}

fn combine(table: &PartitionTable, qi: usize, ns: &[usize]) -> PressureEstimate {
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fits: Vec<OmegaFit> = table
        .omegas
        .iter()
        .zip(&table.log_z)
        .map(|(omega, rows)| OmegaFit {
            omega: *omega,
            log_z: rows[qi].clone(),
            fit: fit_line(&xs, &rows[qi]),
        })
        .collect();
    let k = fits.len() as f64;
    let slope = fits.iter().map(|f| f.fit.slope).sum::<f64>() / k;
    let stderr = fits.iter().map(|f| f.fit.stderr * f.fit.stderr).sum::<f64>().sqrt() / k;
    let max_deviation = fits.iter().map(|f| (f.fit.slope - slope).abs()).fold(0.0, f64::max);
    PressureEstimate {
        slope,
        stderr,
        fits,
        max_deviation,
        method: table.method,
        fiber_steps: table.steps,
    }
}

/// Slope of `log Z_n(φ)` in `n`, averaged over sampled base points.
pub fn pressure_estimate(sys: &SkewSystem, phi: &Observable, opts: &PressureOptions) -> Result<PressureEstimate> {
    let table = partition_table(sys, phi, &[1.0], opts)?;
    Ok(combine(&table, 0, &opts.ns))
}

/// `q ↦ π̂(qφ)` on a sorted grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PressureCurve {
    pub q: Vec<f64>,
    pub pressure: Vec<f64>,
    pub stderr: Vec<f64>,
    pub estimates: Vec<PressureEstimate>,
    pub ns: Vec<usize>,
    pub eps: f64,
    pub method: Method,
    /// Largest excess of a point over the chord through its neighbors.
    pub convexity_defect: f64,
}

impl PressureCurve {
    /// Curve value at `q = 0` if it is on the grid.
    pub fn entropy(&self) -> Option<f64> {
        self.q.iter().position(|&q| q == 0.0).map(|i| self.pressure[i])
    }
}

/// `max_i (p_i - chord_i)^+` over interior grid points.
pub fn convexity_defect(xs: &[f64], ys: &[f64]) -> f64 {
    (1..xs.len().saturating_sub(1))
        .map(|i| {
            let t = (xs[i] - xs[i - 1]) / (xs[i + 1] - xs[i - 1]);
            let chord = ys[i - 1] + t * (ys[i + 1] - ys[i - 1]);
            (ys[i] - chord).max(0.0)
        })
        .fold(0.0, f64::max)
}

/// Pressure of `qφ` for each `q`. Grid methods reuse one separated set per
/// `(ω, n)` for every `q`.
pub fn pressure_curve(sys: &SkewSystem, phi: &Observable, q_grid: &[f64], opts: &PressureOptions) -> Result<PressureCurve> {
    if q_grid.is_empty() {
        return Err(invalid("q grid is empty"));
    }
    if q_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("q grid must be strictly increasing"));
    }
    if q_grid.iter().any(|q| q.abs() > Q_MAX) {
        return Err(invalid(format!("q grid exceeds |q| ≤ {Q_MAX}")));
    }
    let table = partition_table(sys, phi, q_grid, opts)?;
    let estimates: Vec<PressureEstimate> = (0..q_grid.len()).map(|i| combine(&table, i, &opts.ns)).collect();
    let pressure: Vec<f64> = estimates.iter().map(|e| e.slope).collect();
    Ok(PressureCurve {
        q: q_grid.to_vec(),
        stderr: estimates.iter().map(|e| e.stderr).collect(),
        convexity_defect: convexity_defect(q_grid, &pressure),
        pressure,
        estimates,
        ns: opts.ns.clone(),
        eps: opts.eps,
        method: table.method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use fibertherm_counting::{max_separated_set, SearchOptions};
    use fibertherm::skew::FiberPoint;

    fn opts() -> PressureOptions {
        PressureOptions::new(0.1, vec![8, 10, 12, 14, 16])
    }

    #[test]
    fn doubling_entropy_and_tilt() {
        let sys = SkewSystem::doubling();
        let phi = Observable::first_digit();
        let e0 = pressure_estimate(&sys, &phi.scaled(0.0), &opts()).unwrap();
        assert!((e0.slope - 2f64.ln()).abs() < 1e-9);
        let e1 = pressure_estimate(&sys, &phi, &opts()).unwrap();
        assert!((e1.slope - (1.0 + 1f64.exp()).ln()).abs() < 1e-9);
    }

    #[test]
    fn reflection_symmetry() {
        let sys = SkewSystem::doubling();
        let phi = Observable::first_digit();
        let qs = [-2.0, -1.0, 0.0, 1.0, 2.0];
        let a = pressure_curve(&sys, &phi, &qs, &opts()).unwrap();
        let b = pressure_curve(&sys, &phi.scaled(-1.0), &qs, &opts()).unwrap();
        for i in 0..qs.len() {
            assert!((a.pressure[i] - b.pressure[qs.len() - 1 - i]).abs() < 1e-9);
        }
    }

    #[test]
    fn partition_sum_of_zero_is_cardinality() {
        let sys = SkewSystem::doubling();
        let q = max_separated_set(&sys, &BasePoint::Unit, 3, 0.2, None, &SearchOptions::default()).unwrap();
        let z = partition_sum(&sys, &Observable::zero(), &BasePoint::Unit, &q, 3);
        assert!((z - q.points.len() as f64).abs() < 1e-9);
    }

    #[test]
    fn single_point_partition_sum() {
        let sys = SkewSystem::doubling();
        let x = FiberPoint::circle(0.3);
        let q = SeparatedSet {
            points: vec![x],
            omega: BasePoint::Unit,
            n: 6,
            eps: 0.2,
            method: Method::Grid,
            resolution: None,
            candidates: 1,
        };
        let phi = Observable::first_digit();
        let s = birkhoff_sum(&sys, &phi, &BasePoint::Unit, &x, 6);
        assert!((partition_sum(&sys, &phi, &BasePoint::Unit, &q, 6) - s.exp()).abs() < 1e-12);
    }

    #[test]
    fn rejects_short_ranges() {
        let sys = SkewSystem::doubling();
        let o = PressureOptions::new(0.1, vec![3, 4, 5]);
        assert!(pressure_estimate(&sys, &Observable::zero(), &o).is_err());
        let o = PressureOptions::new(0.1, vec![3, 4, 6, 7]);
        assert!(pressure_estimate(&sys, &Observable::zero(), &o).is_err());
    }

    #[test]
    fn convexity_defect_of_a_kink() {
        assert_eq!(convexity_defect(&[0.0, 1.0, 2.0], &[0.0, 1.0, 0.0]), 1.0);
        assert_eq!(convexity_defect(&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0]), 0.0);
    }
}
