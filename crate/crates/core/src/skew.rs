//! Skew products Θ(ω, x) = (θω, F_ω x) with affine toral fibers, Sturmian
//! matrix cocycles, or the doubling map.
//!
//! Every fiber map here is affine on R^d/Z^d, so the difference of two fiber
//! orbits evolves by the linear part alone. Bowen distances therefore depend
//! on `x - y` and on the base orbit only through the sequence of linear parts.

use std::f64::consts::TAU;

use crate::base::{base_step, BasePoint, DrivingSystem};
use crate::error::{invalid, Error, Result};
use crate::torus::{torus_distance, IntMat2, Phase};

/// One harmonic `a cos(2π m ω) + b sin(2π m ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourierTerm {
    pub m: i32,
    pub a: f64,
    pub b: f64,
}

/// Forcing h: Ω → T² given by a finite Fourier sum per coordinate.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Forcing {
    pub components: [Vec<FourierTerm>; 2],
}

impl Forcing {
    pub fn zero() -> Forcing {
        Forcing::default()
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.iter().all(|t| t.a == 0.0 && t.b == 0.0))
    }

    pub fn eval(&self, omega: &BasePoint) -> [Phase; 2] {
        let w = omega.phase();
        let f = |terms: &[FourierTerm]| {
            terms
                .iter()
                .map(|t| {
                    let arg = TAU * t.m as f64 * w;
                    t.a * arg.cos() + t.b * arg.sin()
                })
                .sum::<f64>()
        };
        [
            Phase::from_f64(f(&self.components[0])),
            Phase::from_f64(f(&self.components[1])),
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FiberKind {
    /// F_ω x = T x + h(ω).
    AffineToral { t: IntMat2, forcing: Forcing },
    /// F_ω = B_{ω_0} over a Sturmian base.
    MatrixCocycle { generators: Vec<IntMat2> },
    /// x ↦ 2x on R/Z over the one-point base; forward only.
    Doubling,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewSystem {
    pub driving: DrivingSystem,
    pub fiber: FiberKind,
}

/// A point of the fiber: T² for matrix fibers, R/Z for the doubling map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FiberPoint {
    Circle(Phase),
    Torus([Phase; 2]),
}

impl FiberPoint {
    pub fn torus(x1: f64, x2: f64) -> FiberPoint {
        FiberPoint::Torus([Phase::from_f64(x1), Phase::from_f64(x2)])
    }

    pub fn circle(x: f64) -> FiberPoint {
        FiberPoint::Circle(Phase::from_f64(x))
    }

    pub fn dim(&self) -> usize {
        match self {
            FiberPoint::Circle(_) => 1,
            FiberPoint::Torus(_) => 2,
        }
    }

    /// Coordinates in `[0,1)`; the second is 0 on the circle.
    pub fn coords(&self) -> [f64; 2] {
        match self {
            FiberPoint::Circle(p) => [p.to_f64(), 0.0],
            FiberPoint::Torus(p) => [p[0].to_f64(), p[1].to_f64()],
        }
    }

    pub fn phases(&self) -> [Phase; 2] {
        match *self {
            FiberPoint::Circle(p) => [p, Phase::ZERO],
            FiberPoint::Torus(p) => p,
        }
    }

    /// Circle point from `p[0]` when `dim == 1`, torus point otherwise.
    pub fn from_phases(dim: usize, p: [Phase; 2]) -> FiberPoint {
        if dim == 1 {
            FiberPoint::Circle(p[0])
        } else {
            FiberPoint::Torus(p)
        }
    }

    /// `self + v` with `v` given in real coordinates.
    pub fn translate(&self, v: [f64; 2]) -> FiberPoint {
        let p = self.phases();
        let q = [p[0].add(Phase::from_f64(v[0])), p[1].add(Phase::from_f64(v[1]))];
        FiberPoint::from_phases(self.dim(), q)
    }
}

/// Distance on the fiber manifold.
pub fn fiber_distance(x: &FiberPoint, y: &FiberPoint) -> f64 {
    match (x, y) {
        (FiberPoint::Circle(a), FiberPoint::Circle(b)) => a.sub(*b).signed().abs(),
        _ => torus_distance(x.phases(), y.phases()),
    }
}

/// Linear part of a single fiber map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearPart {
    Matrix(IntMat2),
    /// Multiplication by an integer on R/Z.
    Scalar(i64),
}

impl LinearPart {
    pub fn apply_phase(&self, v: [Phase; 2]) -> [Phase; 2] {
        match self {
            LinearPart::Matrix(m) => m.apply_phase(v),
            LinearPart::Scalar(k) => [v[0].mul_int(*k), Phase::ZERO],
        }
    }

    pub fn apply_mod(&self, v: [i64; 2], k: i64) -> [i64; 2] {
        match self {
            LinearPart::Matrix(m) => m.apply_mod(v, k),
            LinearPart::Scalar(s) => [(s * v[0]).rem_euclid(k), 0],
        }
    }

    pub fn op_norm(&self) -> f64 {
        match self {
            LinearPart::Matrix(m) => m.op_norm(),
            LinearPart::Scalar(s) => s.unsigned_abs() as f64,
        }
    }
}

impl SkewSystem {
    /// Affine toral skew product over an irrational rotation.
    pub fn affine(driving: DrivingSystem, t: IntMat2, forcing: Forcing) -> Result<SkewSystem> {
        let det = t.det();
        if det.abs() != 1 {
            return Err(invalid(format!("matrix determinant {det} is not ±1")));
        }
        frame_of(&t)?;
        driving.check_irrational().map_err(invalid)?;
        Ok(SkewSystem {
            driving,
            fiber: FiberKind::AffineToral { t, forcing },
        })
    }

    /// Sturmian cocycle F_ω = B_{ω_0} with two positive unimodular generators.
    pub fn cocycle(alpha: f64, generators: Vec<IntMat2>) -> Result<SkewSystem> {
        if generators.len() != 2 {
            return Err(invalid("a Sturmian cocycle needs exactly two generators"));
        }
        for (i, b) in generators.iter().enumerate() {
            if !b.is_positive() {
                return Err(invalid(format!("generator {} has a non-positive entry", i + 1)));
            }
            if b.det().abs() != 1 {
                return Err(invalid(format!("generator {} has determinant {}", i + 1, b.det())));
            }
        }
        let driving = DrivingSystem::Sturmian { alpha };
        driving.check_irrational().map_err(invalid)?;
        Ok(SkewSystem {
            driving,
            fiber: FiberKind::MatrixCocycle { generators },
        })
    }

    pub fn doubling() -> SkewSystem {
        SkewSystem {
            driving: DrivingSystem::Point,
            fiber: FiberKind::Doubling,
        }
    }

    /// The cat map `[[2,1],[1,1]]` over the rotation by `alpha`.
    pub fn cat_map(alpha: f64, forcing: Forcing) -> Result<SkewSystem> {
        SkewSystem::affine(DrivingSystem::Rotation { alpha }, IntMat2::new(2, 1, 1, 1), forcing)
    }

    pub fn fiber_dim(&self) -> usize {
        match self.fiber {
            FiberKind::Doubling => 1,
            _ => 2,
        }
    }

    pub fn is_invertible(&self) -> bool {
        !matches!(self.fiber, FiberKind::Doubling)
    }

    pub fn is_affine(&self) -> bool {
        matches!(self.fiber, FiberKind::AffineToral { .. })
    }

    /// Linear part of F_ω.
    pub fn linear_part(&self, omega: &BasePoint) -> LinearPart {
        match &self.fiber {
            FiberKind::AffineToral { t, .. } => LinearPart::Matrix(*t),
            FiberKind::MatrixCocycle { generators } => {
                LinearPart::Matrix(generators[(omega.symbol0() - 1) as usize])
            }
            FiberKind::Doubling => LinearPart::Scalar(2),
        }
    }

    /// Linear parts of F_{θ^i ω} for `i < n`.
    pub fn linear_parts(&self, omega: &BasePoint, n: usize) -> Vec<LinearPart> {
        (0..n)
            .map(|i| self.linear_part(&base_step(&self.driving, omega, i as i64)))
            .collect()
    }

    /// Largest operator norm among the generating linear parts.
    pub fn max_norm(&self) -> f64 {
        match &self.fiber {
            FiberKind::AffineToral { t, .. } => t.op_norm(),
            FiberKind::MatrixCocycle { generators } => {
                generators.iter().map(|g| g.op_norm()).fold(0.0, f64::max)
            }
            FiberKind::Doubling => 2.0,
        }
    }

    /// Uniform expansion rate. For cocycles this is the ℓ1 rate on the
    /// positive quadrant, a cone every positive generator maps into itself:
    /// the smallest column sum. Per-generator eigenvalues overstate it.
    pub fn min_expansion(&self) -> f64 {
        match &self.fiber {
            FiberKind::AffineToral { t, .. } => frame_of(t).map(|f| f.lambda_u).unwrap_or(1.0),
            FiberKind::MatrixCocycle { generators } => generators
                .iter()
                .map(|g| (g.a + g.c).min(g.b + g.d) as f64)
                .fold(f64::INFINITY, f64::min),
            FiberKind::Doubling => 2.0,
        }
    }

    fn forward_once(&self, omega: &BasePoint, x: [Phase; 2]) -> [Phase; 2] {
        let y = self.linear_part(omega).apply_phase(x);
        match &self.fiber {
            FiberKind::AffineToral { forcing, .. } => {
                let h = forcing.eval(omega);
                [y[0].add(h[0]), y[1].add(h[1])]
            }
            _ => y,
        }
    }

    /// Inverse of F_ω applied to `y`.
    fn backward_once(&self, omega: &BasePoint, y: [Phase; 2]) -> [Phase; 2] {
        let (m, shifted) = match &self.fiber {
            FiberKind::AffineToral { t, forcing } => {
                let h = forcing.eval(omega);
                (*t, [y[0].sub(h[0]), y[1].sub(h[1])])
            }
            FiberKind::MatrixCocycle { generators } => {
                (generators[(omega.symbol0() - 1) as usize], y)
            }
            FiberKind::Doubling => unreachable!("checked by caller"),
        };
        m.inverse().apply_phase(shifted)
    }

    /// Rejects points whose dimension differs from the fiber.
    pub fn check_point(&self, x: &FiberPoint) -> Result<()> {
        if x.dim() != self.fiber_dim() {
            return Err(invalid(format!(
                "fiber point of dimension {} on a {}-dimensional fiber",
                x.dim(),
                self.fiber_dim()
            )));
        }
        Ok(())
    }
}

/// F_ω^t x, with negative `t` iterating the inverse maps.
pub fn fiber_step(sys: &SkewSystem, omega: &BasePoint, x: &FiberPoint, t: i64) -> Result<FiberPoint> {
    sys.check_point(x)?;
    if t < 0 && !sys.is_invertible() {
        return Err(Error::BackwardNotInvertible);
    }
    let mut p = x.phases();
    if t >= 0 {
        for i in 0..t {
            p = sys.forward_once(&base_step(&sys.driving, omega, i), p);
        }
    } else {
        for i in 1..=-t {
            p = sys.backward_once(&base_step(&sys.driving, omega, -i), p);
        }
    }
    Ok(FiberPoint::from_phases(x.dim(), p))
}

/// Fiber orbit `x, F_ω x, ..., F_ω^{n-1} x`.
pub fn fiber_orbit(sys: &SkewSystem, omega: &BasePoint, x: &FiberPoint, n: usize) -> Vec<FiberPoint> {
    let mut out = Vec::with_capacity(n);
    let mut p = x.phases();
    for i in 0..n {
        out.push(FiberPoint::from_phases(x.dim(), p));
        if i + 1 < n {
            p = sys.forward_once(&base_step(&sys.driving, omega, i as i64), p);
        }
    }
    out
}

/// The fiber Bowen metric `max_{i<n} d(F_ω^i x, F_ω^i y)`.
pub fn bowen_distance(sys: &SkewSystem, omega: &BasePoint, x: &FiberPoint, y: &FiberPoint, n: usize) -> f64 {
    let parts = sys.linear_parts(omega, n.max(1));
    bowen_distance_with(&parts, x, y, f64::INFINITY)
}

/// Bowen distance along precomputed linear parts, stopping early once the
/// running maximum exceeds `cutoff`.
pub fn bowen_distance_with(parts: &[LinearPart], x: &FiberPoint, y: &FiberPoint, cutoff: f64) -> f64 {
    let dim = x.dim();
    let xp = x.phases();
    let yp = y.phases();
    let mut v = [xp[0].sub(yp[0]), xp[1].sub(yp[1])];
    let mut worst: f64 = 0.0;
    for (i, a) in parts.iter().enumerate() {
        let d = if dim == 1 {
            v[0].signed().abs()
        } else {
            v[0].signed().hypot(v[1].signed())
        };
        worst = worst.max(d);
        if worst > cutoff {
            break;
        }
        if i + 1 < parts.len() {
            v = a.apply_phase(v);
        }
    }
    worst
}

/// Eigen-splitting of a hyperbolic integer matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicFrame {
    pub e_u: [f64; 2],
    pub e_s: [f64; 2],
    pub lambda_u: f64,
    pub lambda_s: f64,
    /// Signed eigenvalues: `T e_u = mu_u e_u`, `T e_s = mu_s e_s`.
    pub mu_u: f64,
    pub mu_s: f64,
}

impl HyperbolicFrame {
    /// `|sin ∠(e_u, e_s)|`.
    pub fn sin_angle(&self) -> f64 {
        (self.e_u[0] * self.e_s[1] - self.e_u[1] * self.e_s[0]).abs()
    }

    /// Coordinates `(u, s)` with `v = u e_u + s e_s`.
    pub fn coords(&self, v: [f64; 2]) -> (f64, f64) {
        let det = self.e_u[0] * self.e_s[1] - self.e_u[1] * self.e_s[0];
        let u = (v[0] * self.e_s[1] - v[1] * self.e_s[0]) / det;
        let s = (self.e_u[0] * v[1] - self.e_u[1] * v[0]) / det;
        (u, s)
    }

    pub fn vector(&self, u: f64, s: f64) -> [f64; 2] {
        [u * self.e_u[0] + s * self.e_s[0], u * self.e_u[1] + s * self.e_s[1]]
    }

    /// Frame max-metric `max(|u|, |s|)`.
    pub fn max_norm(&self, v: [f64; 2]) -> f64 {
        let (u, s) = self.coords(v);
        u.abs().max(s.abs())
    }

    /// Constants `(c, C)` with `c·max(|u|,|s|) <= |v| <= C·max(|u|,|s|)`.
    pub fn metric_equivalence(&self) -> (f64, f64) {
        (self.sin_angle() / 2f64.sqrt(), 2.0)
    }
}

/// Frame of an integer matrix with `|det| = 1`.
pub fn frame_of(t: &IntMat2) -> Result<HyperbolicFrame> {
    let tr = t.trace() as f64;
    let det = t.det() as f64;
    let disc = tr * tr - 4.0 * det;
    if disc <= 0.0 {
        return Err(Error::NotHyperbolic(format!("complex eigenvalues (trace {tr}, det {det})")));
    }
    let root = disc.sqrt();
    let (mu_u, mu_s) = if tr >= 0.0 {
        let big = (tr + root) / 2.0;
        (big, det / big)
    } else {
        let big = (tr - root) / 2.0;
        (big, det / big)
    };
    if mu_u.abs() <= 1.0 + 1e-12 {
        return Err(Error::NotHyperbolic(format!("eigenvalues on the unit circle (trace {tr})")));
    }
    let e_u = eigenvector(t, mu_u);
    let e_s = eigenvector(t, mu_s);
    Ok(HyperbolicFrame {
        e_u,
        e_s,
        lambda_u: mu_u.abs(),
        lambda_s: mu_s.abs(),
        mu_u,
        mu_s,
    })
}

fn eigenvector(t: &IntMat2, mu: f64) -> [f64; 2] {
    let (a, b, c, d) = (t.a as f64, t.b as f64, t.c as f64, t.d as f64);
    let v = if b.abs() >= c.abs() && b != 0.0 {
        [b, mu - a]
    } else if c != 0.0 {
        [mu - d, c]
    } else if (mu - a).abs() < (mu - d).abs() {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let n = v[0].hypot(v[1]);
    let mut e = [v[0] / n, v[1] / n];
    if e[0] < 0.0 || (e[0] == 0.0 && e[1] < 0.0) {
        e = [-e[0], -e[1]];
    }
    e
}

/// Constant splitting of an affine toral system.
pub fn hyperbolic_frame(sys: &SkewSystem) -> Result<HyperbolicFrame> {
    match &sys.fiber {
        FiberKind::AffineToral { t, .. } => frame_of(t),
        _ => Err(Error::NotAffine),
    }
}

/// Expansivity constant and separation horizon at one scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansivityReport {
    pub eta: f64,
    pub epsilon: f64,
    pub horizon: u32,
}

/// `η = 1/(4(1 + max‖B‖))` and the smallest `L` with `λ_min^L ε > 1/2`
/// (`L = 0` when `ε > η`).
pub fn expansivity_constants(sys: &SkewSystem, eps: f64) -> Result<ExpansivityReport> {
    if !(eps > 0.0 && eps < 0.25) {
        return Err(invalid(format!("epsilon {eps} outside (0, 1/4)")));
    }
    let eta = 1.0 / (4.0 * (1.0 + sys.max_norm()));
    let lam = sys.min_expansion();
    if lam <= 1.0 {
        return Err(Error::NotHyperbolic("no uniform expansion".into()));
    }
    let mut horizon = 0u32;
    if eps <= eta {
        while lam.powi(horizon as i32) * eps <= 0.5 {
            horizon += 1;
        }
    }
    Ok(ExpansivityReport {
        eta,
        epsilon: eps,
        horizon,
    })
}

/// Lebesgue area of a Bowen ball in the frame max-metric: a parallelogram
/// with half-widths `ε λ_u^{-(n-1)}` and `ε`.
pub fn bowen_ball_area(sys: &SkewSystem, n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    if eps >= 0.25 {
        return Err(Error::EpsilonTooLarge { eps, limit: 0.25 });
    }
    let f = hyperbolic_frame(sys)?;
    let half_u = eps * f.lambda_u.powi(-(n as i32 - 1));
    Ok(4.0 * half_u * eps * f.sin_angle())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SILVER: f64 = std::f64::consts::SQRT_2 - 1.0;

    fn cat() -> SkewSystem {
        SkewSystem::cat_map(SILVER, Forcing::zero()).unwrap()
    }

    #[test]
    fn cat_step_example() {
        let sys = cat();
        let w = sys.driving.point(0.3);
        let y = fiber_step(&sys, &w, &FiberPoint::torus(0.5, 0.5), 1).unwrap();
        assert_eq!(y.coords(), [0.5, 0.0]);
        let z = fiber_step(&sys, &w, &FiberPoint::torus(0.2, 0.7), 0).unwrap();
        assert_eq!(z, FiberPoint::torus(0.2, 0.7));
    }

    #[test]
    fn doubling_rejects_backward() {
        let sys = SkewSystem::doubling();
        let r = fiber_step(&sys, &BasePoint::Unit, &FiberPoint::circle(0.3), -1);
        assert_eq!(r, Err(Error::BackwardNotInvertible));
    }

    #[test]
    fn bowen_n1_is_fiber_distance() {
        let sys = cat();
        let w = sys.driving.point(0.1);
        let x = FiberPoint::torus(0.1, 0.2);
        let y = FiberPoint::torus(0.15, 0.18);
        assert_eq!(bowen_distance(&sys, &w, &x, &y, 1), fiber_distance(&x, &y));
    }

    #[test]
    fn cat_frame() {
        let f = hyperbolic_frame(&cat()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((f.lambda_u - 2.618034).abs() < 1e-6);
        assert!((f.e_u[0] / f.e_u[1] - phi).abs() < 1e-12);
        assert!((f.lambda_u * f.lambda_s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rotation_matrix_is_not_hyperbolic() {
        assert!(matches!(frame_of(&IntMat2::new(0, 1, -1, 0)), Err(Error::NotHyperbolic(_))));
    }

    #[test]
    fn expansivity_examples() {
        let sys = cat();
        let r = expansivity_constants(&sys, 0.01).unwrap();
        assert!((r.eta - 0.0691).abs() < 1e-4);
        assert_eq!(r.horizon, 5);
        assert_eq!(expansivity_constants(&sys, 0.1).unwrap().horizon, 0);
    }

    #[test]
    fn ball_area_rejects_large_eps() {
        assert!(matches!(bowen_ball_area(&cat(), 2, 0.25), Err(Error::EpsilonTooLarge { .. })));
    }
}
