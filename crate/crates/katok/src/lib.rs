//! Katok entropy from measure samples.
//!
//! `S(ω, n, ε, δ)` is replaced by a greedy cover of `(1-δ)` of a sample by
//! Bowen balls centered at sample points. Greedy cover overcounts by a
//! factor that depends on how many sample points a ball holds, so with
//! `per_ball` set the sample grows with `n` to keep that number fixed and
//! the factor cancels in the slope. A fixed sample saturates once balls
//! hold single points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fibertherm::base::BasePoint;
use fibertherm_counting::{min_spanning_count, Budget};
use fibertherm::error::{invalid, Error, Result};
use fibertherm::neighbors::NeighborIndex;
use fibertherm::skew::{expansivity_constants, FiberKind, FiberPoint, SkewSystem};
use fibertherm::stats::{fit_line, LineFit};
use fibertherm::torus::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    /// Haar measure on T².
    Haar,
    /// Lebesgue measure on the circle.
    UniformCircle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureSampler {
    pub kind: SamplerKind,
    pub seed: u64,
}

impl MeasureSampler {
    pub fn for_system(sys: &SkewSystem, seed: u64) -> MeasureSampler {
        let kind = if sys.fiber_dim() == 1 {
            SamplerKind::UniformCircle
        } else {
            SamplerKind::Haar
        };
        MeasureSampler { kind, seed }
    }

    fn dim(&self) -> usize {
        match self.kind {
            SamplerKind::Haar => 2,
            SamplerKind::UniformCircle => 1,
        }
    }

    /// `count` points from the stream `(seed, stream)`.
    pub fn draw(&self, stream: u64, count: usize) -> Vec<FiberPoint> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        (0..count)
            .map(|_| match self.kind {
                SamplerKind::Haar => FiberPoint::Torus([Phase(rng.random()), Phase(rng.random())]),
                SamplerKind::UniformCircle => FiberPoint::Circle(Phase(rng.random())),
            })
            .collect()
    }

    /// Whether the sampled measure is known to be invariant for `sys`.
    pub fn proven_invariant(&self, sys: &SkewSystem) -> bool {
        !matches!(sys.fiber, FiberKind::MatrixCocycle { .. })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KatokOptions {
    pub eps: f64,
    pub delta: f64,
    pub ns: Vec<usize>,
    /// Minimum sample size; must be at least `10/δ`.
    pub sample_size: usize,
    /// Target mean number of sample points per Bowen ball; `None` keeps
    /// the sample at `sample_size` for every `n`.
    pub per_ball: Option<f64>,
    pub max_sample: usize,
    pub budget: u64,
}

impl KatokOptions {
    pub fn new(eps: f64, delta: f64, ns: Vec<usize>) -> KatokOptions {
        KatokOptions {
            eps,
            delta,
            ns,
            sample_size: 2000,
            per_ball: Some(8.0),
            max_sample: 2_500_000,
            budget: 100_000_000,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KatokRow {
    pub n: usize,
    pub count: u64,
    pub covered: u64,
    pub sample_size: u64,
    /// Mean fraction of the sample inside one Bowen ball.
    pub ball_mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KatokEstimate {
    pub slope: f64,
    pub stderr: f64,
    pub fit: LineFit,
    pub rows: Vec<KatokRow>,
    pub eps: f64,
    pub delta: f64,
    /// False for samplers whose measure is not known to be invariant; the
    /// estimate is then only a covering rate.
    pub sampler_invariant: bool,
    /// Sample points times iterates, summed over every cover attempted.
    pub fiber_steps: u64,
}

/// Mean number of other sample points per ball, from at most 4000 centers.
fn mean_neighbors(sample: &[FiberPoint], index: &NeighborIndex, eps: f64) -> f64 {
    let probes = sample.len().min(4000);
    let stride = sample.len() / probes;
    let total: usize = fibertherm::parallel::map_chunks(probes, |i| index.within(&sample[i * stride], eps).len() - 1)
        .into_iter()
        .sum();
    total as f64 / probes as f64
}

/// Slope of `log S(ω, n, ε, δ)` in `n`. Greedy covers are upper bounds, so
/// the count is biased up by a factor that is constant in `n` only when
/// `per_ball` is set.
pub fn katok_entropy_estimate(
    sys: &SkewSystem,
    sampler: &MeasureSampler,
    omega: &BasePoint,
    opts: &KatokOptions,
) -> Result<KatokEstimate> {
    if !(opts.delta > 0.0 && opts.delta < 1.0) {
        return Err(invalid(format!("delta {} outside (0, 1)", opts.delta)));
    }
    if (opts.sample_size as f64) < 10.0 / opts.delta {
        return Err(invalid(format!("sample size {} below 10/δ", opts.sample_size)));
    }
    if opts.sample_size == 0 {
        return Err(Error::EmptySample);
    }
    if opts.ns.len() < 2 || opts.ns[0] == 0 || opts.ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("n range must be positive, increasing and hold at least 2 entries"));
    }
    if sampler.dim() != sys.fiber_dim() {
        return Err(invalid("sampler and fiber dimensions differ"));
    }
    if !(opts.eps > 0.0 && opts.eps < 0.5) {
        return Err(invalid(format!("epsilon {} outside (0, 1/2)", opts.eps)));
    }
    let budget = Budget::new(opts.budget);
    let mut rows = Vec::with_capacity(opts.ns.len());
    let mut size = opts.sample_size;
    let mut masses: Vec<f64> = Vec::new();
    for &n in &opts.ns {
        if let (Some(target), [.., a, b]) = (opts.per_ball, masses.as_slice()) {
            // Ball mass decays geometrically in n; extrapolate one step.
            if *a > 0.0 && *b > 0.0 {
                let predicted = b * b / a;
                let want = (target / predicted).ceil() as usize;
                size = want.clamp(size, opts.max_sample);
            }
        }
        let parts = sys.linear_parts(omega, n);
        let mut attempt = 0u64;
        let (sample, mass) = loop {
            budget.charge((size * n) as u64)?;
            let sample = sampler.draw((n as u64) << 8 | attempt, size);
            let index = NeighborIndex::new(&sample, &parts, opts.eps);
            let m = mean_neighbors(&sample, &index, opts.eps);
            let mass = m / (size.max(2) - 1) as f64;
            let Some(target) = opts.per_ball else { break (sample, mass) };
            if m >= 0.5 * target || size >= opts.max_sample || attempt >= 4 {
                break (sample, mass);
            }
            // Ball mass is roughly m/size; aim for `target` points per ball.
            let want = (size as f64 * target / m.max(0.25)).ceil() as usize;
            size = want.clamp(size + 1, opts.max_sample);
            attempt += 1;
        };
        masses.push(mass);
        let s = min_spanning_count(sys, omega, n, opts.eps, &sample, opts.delta)?;
        rows.push(KatokRow {
            n,
            count: s.count,
            covered: s.covered,
            sample_size: s.sample_size,
            ball_mass: mass,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.count.max(1) as f64).ln()).collect();
    let fit = fit_line(&xs, &ys);
    Ok(KatokEstimate {
        slope: fit.slope,
        stderr: fit.stderr,
        fit,
        rows,
        eps: opts.eps,
        delta: opts.delta,
        sampler_invariant: sampler.proven_invariant(sys),
        fiber_steps: budget.spent(),
    })
}

/// The estimate at the expansivity scale `ε = η`, where no limit in ε is
/// needed. `opts.eps` is ignored.
pub fn katok_at_expansivity(
    sys: &SkewSystem,
    sampler: &MeasureSampler,
    omega: &BasePoint,
    opts: &KatokOptions,
) -> Result<KatokEstimate> {
    let eta = expansivity_constants(sys, 0.01)?.eta;
    let o = KatokOptions { eps: eta, ..opts.clone() };
    katok_entropy_estimate(sys, sampler, omega, &o)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_reproducible() {
        let s = MeasureSampler {
            kind: SamplerKind::Haar,
            seed: 9,
        };
        assert_eq!(s.draw(3, 50), s.draw(3, 50));
        assert_ne!(s.draw(3, 50), s.draw(4, 50));
    }

    #[test]
    fn rejects_small_samples() {
        let sys = SkewSystem::doubling();
        let mut o = KatokOptions::new(0.1, 0.1, vec![2, 3, 4]);
        o.sample_size = 50;
        let s = MeasureSampler::for_system(&sys, 1);
        assert!(katok_entropy_estimate(&sys, &s, &BasePoint::Unit, &o).is_err());
    }

    #[test]
    fn doubling_at_expansivity_scale() {
        let sys = SkewSystem::doubling();
        let o = KatokOptions::new(0.0, 0.1, (4..=9).collect());
        let s = MeasureSampler::for_system(&sys, 1);
        let e = katok_at_expansivity(&sys, &s, &BasePoint::Unit, &o).unwrap();
        assert!((e.slope - 2f64.ln()).abs() < 0.1 * 2f64.ln(), "{}", e.slope);
    }
}
