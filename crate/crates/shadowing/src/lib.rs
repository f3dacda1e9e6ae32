//! Constructive fiber specification for affine toral skew products.
//!
//! Orbits are computed in binary fixed point with enough fractional bits
//! that the stable and unstable eigen-directions stay exact over the whole
//! time window: a construction error `e` in a stable coordinate is expanded
//! by at most `λ_u^H` when pulled back across a window of length `H`.
//!
//! The gluing step solves `F^g(y_k) + τ e_u ≡ p_{k+1} + σ e_s (mod Z²)` with
//! `|σ| ≤ γ` and `|τ| ≤ γ λ_u^g`, choosing the lattice lift with smallest
//! `|τ|`. Lattice points in a strip of width `2γ` along `e_u` have bounded
//! gaps, so once `2γ λ_u^g` exceeds that gap every gluing step succeeds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use fibertherm::base::{base_step, BasePoint};
use fibertherm::error::{invalid, Error, Result};
use fibertherm::skew::{frame_of, hyperbolic_frame, FiberKind, FiberPoint, Forcing, HyperbolicFrame, SkewSystem};
use fibertherm::torus::{IntMat2, Phase};

/// Finite orbit segments `[a_i, b_i]` with one anchor point each.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaSpecification {
    pub omega: BasePoint,
    pub intervals: Vec<(i64, i64)>,
    /// `P_ω(a_i)`; the rest of each interval is its forward orbit.
    pub anchors: Vec<FiberPoint>,
    pub spacing: i64,
}

impl OmegaSpecification {
    pub fn new(omega: BasePoint, intervals: Vec<(i64, i64)>, anchors: Vec<FiberPoint>, spacing: i64) -> Result<Self> {
        if intervals.is_empty() {
            return Err(invalid("a specification needs at least one interval"));
        }
        if intervals.len() != anchors.len() {
            return Err(invalid("one anchor per interval is required"));
        }
        if spacing < 0 {
            return Err(invalid("spacing must be nonnegative"));
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if a > b {
                return Err(invalid(format!("interval {i} is empty ({a} > {b})")));
            }
            if i > 0 && a <= intervals[i - 1].1 + spacing {
                return Err(invalid(format!("interval {i} violates a_(i+1) > b_i + m with m = {spacing}")));
            }
        }
        if anchors.iter().any(|p| p.dim() != 2) {
            return Err(invalid("anchors must be torus points"));
        }
        Ok(OmegaSpecification {
            omega,
            intervals,
            anchors,
            spacing,
        })
    }

    /// Smallest gap `a_{i+1} - b_i - 1`, i.e. the largest `m` the
    /// specification is `m`-spaced for.
    pub fn effective_spacing(&self) -> i64 {
        self.intervals
            .windows(2)
            .map(|w| w[1].0 - w[0].1 - 1)
            .min()
            .unwrap_or(i64::MAX)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.intervals[0].0.min(0), self.intervals.last().unwrap().1.max(0))
    }
}

/// Straight segment `{p + t e : |t| ≤ half_length}` on T².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineManifold {
    pub base: FiberPoint,
    pub direction: [f64; 2],
    pub half_length: f64,
}

impl AffineManifold {
    pub fn stable(frame: &HyperbolicFrame, p: FiberPoint, gamma: f64) -> AffineManifold {
        AffineManifold {
            base: p,
            direction: frame.e_s,
            half_length: gamma,
        }
    }

    pub fn unstable(frame: &HyperbolicFrame, p: FiberPoint, gamma: f64) -> AffineManifold {
        AffineManifold {
            base: p,
            direction: frame.e_u,
            half_length: gamma,
        }
    }

    /// Distance from `z` to the segment, using the nearest lift of `z - p`.
    pub fn residual(&self, z: &FiberPoint) -> f64 {
        let zp = z.phases();
        let pp = self.base.phases();
        let v = [zp[0].sub(pp[0]).signed(), zp[1].sub(pp[1]).signed()];
        let t = (v[0] * self.direction[0] + v[1] * self.direction[1]).clamp(-self.half_length, self.half_length);
        (v[0] - t * self.direction[0]).hypot(v[1] - t * self.direction[1])
    }
}

/// The intersection `W^s(x) ∩ W^u(y)` of local affine manifolds.
///
/// Requires `d(x, y) < ε sin∠(e_u, e_s) / 2`.
pub fn local_product(x: &FiberPoint, y: &FiberPoint, eps: f64, frame: &HyperbolicFrame) -> Result<FiberPoint> {
    let limit = eps * frame.sin_angle() / 2.0;
    let distance = fibertherm::skew::fiber_distance(x, y);
    if distance >= limit {
        return Err(Error::PointsTooFar { distance, limit });
    }
    let xp = x.phases();
    let yp = y.phases();
    let v = [yp[0].sub(xp[0]).signed(), yp[1].sub(xp[1]).signed()];
    let (_, s) = frame.coords(v);
    Ok(x.translate([s * frame.e_s[0], s * frame.e_s[1]]))
}

/// The spacing required at scale ε and the quantities it is derived from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingGap {
    pub n: i64,
    /// Half-length `γ = ε/8` of the glued manifolds.
    pub gamma: f64,
    /// Largest gap between lattice points in a strip of width `2γ` along
    /// `e_u`, measured along `e_u`.
    pub strip_gap: f64,
}

const STRIP_OFFSETS: usize = 257;

/// Largest `e_u`-gap between lattice points whose `e_s`-coordinate lies in
/// `[c - half, c + half]`, maximized over a sweep of offsets `c`.
fn strip_gap(frame: &HyperbolicFrame, half: f64) -> f64 {
    let (u1, s1) = frame.coords([1.0, 0.0]);
    let (u2, s2) = frame.coords([0.0, 1.0]);
    let det = (u1 * s2 - u2 * s1).abs();
    // Expected gap is 1/(2 half); scan a window holding many of them.
    let window = 60.0 / (2.0 * half);
    let r1 = (window * s2.abs() / det).ceil() as i64 + 2;
    let period = s1.abs().max(s2.abs());
    let mut worst: f64 = 0.0;
    for j in 0..STRIP_OFFSETS {
        let c = period * j as f64 / STRIP_OFFSETS as f64;
        let mut us = Vec::new();
        for l1 in -r1..=r1 {
            let lo = ((c - half - l1 as f64 * s1) / s2).min((c + half - l1 as f64 * s1) / s2);
            let hi = ((c - half - l1 as f64 * s1) / s2).max((c + half - l1 as f64 * s1) / s2);
            for l2 in lo.ceil() as i64..=hi.floor() as i64 {
                let u = l1 as f64 * u1 + l2 as f64 * u2;
                if u.abs() <= window {
                    us.push(u);
                }
            }
        }
        us.sort_by(f64::total_cmp);
        let local = us.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        worst = worst.max(local);
    }
    worst
}

/// Smallest `N` with `2γ λ_u^N ≥ 1.05·G(2γ)` and `λ_u^{-N} ≤ 1/2`, where
/// `γ = ε/8` and `G` is the strip gap.
pub fn mixing_gap(sys: &SkewSystem, eps: f64) -> Result<MixingGap> {
    let frame = hyperbolic_frame(sys)?;
    if !(eps > 0.0 && eps < 0.5) {
        return Err(invalid(format!("epsilon {eps} outside (0, 1/2)")));
    }
    let gamma = eps / 8.0;
    let gap = strip_gap(&frame, gamma);
    let mut n = 1i64;
    while 2.0 * gamma * frame.lambda_u.powi(n as i32) < 1.05 * gap || frame.lambda_u.powi(-(n as i32)) > 0.5 {
        n += 1;
    }
    Ok(MixingGap {
        n,
        gamma,
        strip_gap: gap,
    })
}

/// A torus point stored with `bits` fractional binary digits per coordinate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecisePoint {
    pub bits: u32,
    pub coords: [BigInt; 2],
}

impl PrecisePoint {
    /// Exact lift of a 128-bit fiber point.
    pub fn lift(x: &FiberPoint, bits: u32) -> PrecisePoint {
        assert!(bits >= 128);
        let p = x.phases();
        PrecisePoint {
            bits,
            coords: [BigInt::from(p[0].0) << (bits - 128), BigInt::from(p[1].0) << (bits - 128)],
        }
    }

    /// Truncation to a 128-bit fiber point.
    pub fn to_fiber_point(&self) -> FiberPoint {
        let f = Fixed::new(self.bits);
        FiberPoint::Torus([f.to_phase(&self.coords[0]), f.to_phase(&self.coords[1])])
    }
}

/// Fixed-point helpers at a given number of fractional bits.
struct Fixed {
    bits: u32,
    one: BigInt,
}

impl Fixed {
    fn new(bits: u32) -> Fixed {
        Fixed {
            bits,
            one: BigInt::from(1) << bits,
        }
    }

    fn reduce(&self, v: &BigInt) -> BigInt {
        v.mod_floor(&self.one)
    }

    /// Representative in `[-1/2, 1/2)`.
    fn centered(&self, v: &BigInt) -> BigInt {
        let r = self.reduce(v);
        if r.clone() << 1 >= self.one {
            r - &self.one
        } else {
            r
        }
    }

    fn to_f64(&self, v: &BigInt) -> f64 {
        let shift = self.bits as i64 - 100;
        let w: BigInt = if shift >= 0 { v >> shift as u32 } else { v << (-shift) as u32 };
        w.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-100)
    }

    fn to_phase(&self, v: &BigInt) -> Phase {
        let r = self.reduce(v) >> (self.bits - 128);
        Phase(r.to_u128().expect("reduced value fits in 128 bits"))
    }

    fn from_phase(&self, p: Phase) -> BigInt {
        BigInt::from(p.0) << (self.bits - 128)
    }

    fn from_int(&self, k: i64) -> BigInt {
        BigInt::from(k) << self.bits
    }

    /// Product of two fixed-point reals.
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        (a * b) >> self.bits
    }
}

/// Exact affine dynamics at a fixed precision over a time window.
struct PreciseDynamics {
    fx: Fixed,
    t: IntMat2,
    t_inv: IntMat2,
    /// Forcing `h(θ^i ω)` for `i` in `[start, end)`.
    forcing: Vec<[BigInt; 2]>,
    start: i64,
}

impl PreciseDynamics {
    fn new(t: IntMat2, forcing: &Forcing, omega: &BasePoint, driving: &fibertherm::base::DrivingSystem, start: i64, end: i64, bits: u32) -> Self {
        let fx = Fixed::new(bits);
        let hs = (start..end)
            .map(|i| {
                let h = forcing.eval(&base_step(driving, omega, i));
                [fx.from_phase(h[0]), fx.from_phase(h[1])]
            })
            .collect();
        PreciseDynamics {
            fx,
            t,
            t_inv: t.inverse(),
            forcing: hs,
            start,
        }
    }

    fn h(&self, i: i64) -> &[BigInt; 2] {
        &self.forcing[(i - self.start) as usize]
    }

    fn apply(m: &IntMat2, v: &[BigInt; 2]) -> [BigInt; 2] {
        [&v[0] * m.a + &v[1] * m.b, &v[0] * m.c + &v[1] * m.d]
    }

    /// Maps a point at time `from` to time `to`.
    fn transport(&self, x: &[BigInt; 2], from: i64, to: i64) -> [BigInt; 2] {
        let mut v = x.clone();
        let mut t = from;
        while t < to {
            let w = Self::apply(&self.t, &v);
            let h = self.h(t);
            v = [self.fx.reduce(&(&w[0] + &h[0])), self.fx.reduce(&(&w[1] + &h[1]))];
            t += 1;
        }
        while t > to {
            let h = self.h(t - 1);
            let w = [&v[0] - &h[0], &v[1] - &h[1]];
            let u = Self::apply(&self.t_inv, &w);
            v = [self.fx.reduce(&u[0]), self.fx.reduce(&u[1])];
            t -= 1;
        }
        v
    }

    fn diff(&self, x: &[BigInt; 2], y: &[BigInt; 2]) -> [BigInt; 2] {
        [self.fx.centered(&(&x[0] - &y[0])), self.fx.centered(&(&x[1] - &y[1]))]
    }

    fn diff_f64(&self, x: &[BigInt; 2], y: &[BigInt; 2]) -> [f64; 2] {
        let d = self.diff(x, y);
        [self.fx.to_f64(&d[0]), self.fx.to_f64(&d[1])]
    }
}

/// Unnormalized eigenvectors `f_u`, `f_s` of `T` in fixed point.
fn precise_eigenvectors(t: &IntMat2, fx: &Fixed) -> ([BigInt; 2], [BigInt; 2]) {
    let tr = t.trace();
    let disc = tr * tr - 4 * t.det();
    let root = (BigInt::from(disc) << (2 * fx.bits)).sqrt();
    let trf = fx.from_int(tr);
    let (mu_u, mu_s) = if tr >= 0 {
        ((&trf + &root) >> 1, (&trf - &root) >> 1)
    } else {
        ((&trf - &root) >> 1, (&trf + &root) >> 1)
    };
    let vec = |mu: &BigInt| {
        if t.b != 0 {
            [fx.from_int(t.b), mu - fx.from_int(t.a)]
        } else {
            [mu - fx.from_int(t.d), fx.from_int(t.c)]
        }
    };
    (vec(&mu_u), vec(&mu_s))
}

/// Per-interval bookkeeping of the construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LedgerEntry {
    pub interval: usize,
    /// `|e_u`-offset| of `F^{b_j} x` from the glued unstable manifold.
    pub unstable_at_end: f64,
    /// `|e_s`-offset| of `F^{a_j} x` from the anchor.
    pub stable_at_start: f64,
}

/// Distances `d(F^t x, P_ω(t))` over every specified time.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowCertificate {
    pub rows: Vec<(i64, f64)>,
    pub max_distance: f64,
    pub worst_time: i64,
    /// Maximal distance inside each interval.
    pub interval_max: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Shadow {
    pub point: PrecisePoint,
    pub fiber_point: FiberPoint,
    pub certificate: ShadowCertificate,
    pub ledger: Vec<LedgerEntry>,
    pub gamma: f64,
    pub mixing_gap: i64,
}

fn affine_parts(sys: &SkewSystem) -> Result<(IntMat2, &Forcing)> {
    match &sys.fiber {
        FiberKind::AffineToral { t, forcing } => Ok((*t, forcing)),
        _ => Err(Error::NotAffine),
    }
}

/// Fractional bits needed to keep the construction exact over `[start, end]`.
fn precision_for(frame: &HyperbolicFrame, start: i64, end: i64) -> u32 {
    let span = (end - start).max(1) as f64;
    let need = 192.0 + span * frame.lambda_u.log2();
    (need / 64.0).ceil() as u32 * 64
}

fn certificate(dy: &PreciseDynamics, spec: &OmegaSpecification, anchors: &[[BigInt; 2]], x0: &[BigInt; 2]) -> ShadowCertificate {
    let mut rows = Vec::new();
    let mut interval_max = Vec::new();
    let mut cur = dy.transport(x0, 0, spec.intervals[0].0);
    let mut now = spec.intervals[0].0;
    for (j, &(a, b)) in spec.intervals.iter().enumerate() {
        cur = dy.transport(&cur, now, a);
        now = a;
        let mut p = anchors[j].clone();
        let mut worst: f64 = 0.0;
        for t in a..=b {
            let d = dy.diff_f64(&cur, &p);
            let dist = d[0].hypot(d[1]);
            worst = worst.max(dist);
            rows.push((t, dist));
            if t < b {
                cur = dy.transport(&cur, t, t + 1);
                p = dy.transport(&p, t, t + 1);
                now = t + 1;
            }
        }
        interval_max.push(worst);
    }
    let (worst_time, max_distance) = rows
        .iter()
        .copied()
        .fold((rows[0].0, f64::NEG_INFINITY), |acc, r| if r.1 > acc.1 { r } else { acc });
    ShadowCertificate {
        rows,
        max_distance,
        worst_time,
        interval_max,
    }
}

/// Builds the shadowing point of an `m`-spaced specification with
/// `m ≥ mixing_gap(sys, ε)`.
pub fn shadow(sys: &SkewSystem, spec: &OmegaSpecification, eps: f64) -> Result<Shadow> {
    let (t, forcing) = affine_parts(sys)?;
    let frame = frame_of(&t)?;
    let gap = mixing_gap(sys, eps)?;
    if spec.intervals.len() > 1 && spec.spacing < gap.n {
        return Err(Error::SpacingTooSmall {
            spacing: spec.spacing,
            required: gap.n,
        });
    }
    if spec.intervals.len() > 1 && spec.effective_spacing() < spec.spacing {
        return Err(invalid("intervals are closer than the declared spacing"));
    }
    let gamma = gap.gamma;
    let (start, end) = spec.window();
    let bits = precision_for(&frame, start, end);
    let dy = PreciseDynamics::new(t, forcing, &spec.omega, &sys.driving, start, end + 1, bits);
    let fx = &dy.fx;
    let (f_u, f_s) = precise_eigenvectors(&t, fx);
    let cross = |a: &[BigInt; 2], b: &[BigInt; 2]| &a[0] * &b[1] - &a[1] * &b[0];
    let det_us = cross(&f_u, &f_s);

    let anchors: Vec<[BigInt; 2]> = spec
        .anchors
        .iter()
        .map(|p| {
            let q = p.phases();
            [fx.from_phase(q[0]), fx.from_phase(q[1])]
        })
        .collect();

    // x_{a_1} = P(a_1); glue each later anchor onto the unstable manifold.
    let mut xs: Vec<[BigInt; 2]> = vec![anchors[0].clone()];
    for k in 0..spec.intervals.len() - 1 {
        let (a_k, b_k) = spec.intervals[k];
        let a_next = spec.intervals[k + 1].0;
        let g = a_next - b_k;
        let y = dy.transport(&xs[k], a_k, b_k);
        let z = dy.transport(&y, b_k, a_next);
        let d = dy.diff(&anchors[k + 1], &z);
        let df = [fx.to_f64(&d[0]), fx.to_f64(&d[1])];
        let (du, ds) = frame.coords(df);
        let (u1, s1) = frame.coords([1.0, 0.0]);
        let (u2, s2) = frame.coords([0.0, 1.0]);
        let tau_max = gamma * frame.lambda_u.powi(g as i32);
        let r1 = (tau_max + gamma + 2.0).ceil() as i64;
        let mut best: Option<(f64, i64, i64)> = None;
        for l1 in -r1..=r1 {
            let base_s = ds + l1 as f64 * s1;
            let e1 = (-gamma - base_s) / s2;
            let e2 = (gamma - base_s) / s2;
            for l2 in e1.min(e2).ceil() as i64..=e1.max(e2).floor() as i64 {
                let tau = du + l1 as f64 * u1 + l2 as f64 * u2;
                if tau.abs() <= tau_max && best.map_or(true, |b| tau.abs() < b.0) {
                    best = Some((tau.abs(), l1, l2));
                }
            }
        }
        let Some((_, l1, l2)) = best else {
            return Err(Error::IntersectionNotFound(format!(
                "no lattice lift joins interval {k} to {} within gap {g}",
                k + 1
            )));
        };
        // v = d + L = τ f_u - σ f_s, solved exactly.
        let v = [&d[0] + fx.from_int(l1), &d[1] + fx.from_int(l2)];
        let sigma = -((cross(&f_u, &v) << bits) / &det_us);
        let next = [
            fx.reduce(&(&anchors[k + 1][0] + fx.mul(&sigma, &f_s[0]))),
            fx.reduce(&(&anchors[k + 1][1] + fx.mul(&sigma, &f_s[1]))),
        ];
        xs.push(next);
    }

    let (a_last, _) = *spec.intervals.last().unwrap();
    let x0 = dy.transport(xs.last().unwrap(), a_last, 0);

    // Contraction ledger: unstable offsets at b_j are at most 2γ, stable
    // offsets at a_j at most γ.
    let mut ledger = Vec::with_capacity(spec.intervals.len());
    let tol = 1e-9 * gamma;
    for (j, &(a, b)) in spec.intervals.iter().enumerate() {
        let at_a = dy.transport(&x0, 0, a);
        let at_b = dy.transport(&at_a, a, b);
        let y = dy.transport(&xs[j], a, b);
        let (u_b, _) = frame.coords(dy.diff_f64(&at_b, &y));
        let (_, s_a) = frame.coords(dy.diff_f64(&at_a, &anchors[j]));
        let entry = LedgerEntry {
            interval: j,
            unstable_at_end: u_b.abs(),
            stable_at_start: s_a.abs(),
        };
        if entry.unstable_at_end > 2.0 * gamma + tol || entry.stable_at_start > gamma + tol {
            return Err(Error::LedgerViolation(format!(
                "interval {j}: unstable {} stable {} with gamma {gamma}",
                entry.unstable_at_end, entry.stable_at_start
            )));
        }
        ledger.push(entry);
    }

    let cert = certificate(&dy, spec, &anchors, &x0);
    let point = PrecisePoint { bits, coords: x0 };
    Ok(Shadow {
        fiber_point: point.to_fiber_point(),
        point,
        certificate: cert,
        ledger,
        gamma,
        mixing_gap: gap.n,
    })
}

/// Outcome of checking `d(F^t x, P_ω(t)) < ε` over all specified times.
#[derive(Clone, Debug, PartialEq)]
pub struct Verification {
    pub ok: bool,
    pub max_distance: f64,
    pub worst_time: i64,
    pub certificate: ShadowCertificate,
}

/// Exhaustive check of the shadowing inequality with exact orbits.
pub fn verify_shadowing(sys: &SkewSystem, spec: &OmegaSpecification, x: &PrecisePoint, eps: f64) -> Result<Verification> {
    let (t, forcing) = affine_parts(sys)?;
    let (start, end) = spec.window();
    let dy = PreciseDynamics::new(t, forcing, &spec.omega, &sys.driving, start, end + 1, x.bits);
    let anchors: Vec<[BigInt; 2]> = spec
        .anchors
        .iter()
        .map(|p| {
            let q = p.phases();
            [dy.fx.from_phase(q[0]), dy.fx.from_phase(q[1])]
        })
        .collect();
    let cert = certificate(&dy, spec, &anchors, &x.coords);
    Ok(Verification {
        ok: cert.max_distance < eps,
        max_distance: cert.max_distance,
        worst_time: cert.worst_time,
        certificate: cert,
    })
}

/// Moves a precise point from time `from` to time `to` along the base orbit
/// of `omega`.
pub fn transport(sys: &SkewSystem, omega: &BasePoint, x: &PrecisePoint, from: i64, to: i64) -> Result<PrecisePoint> {
    let (t, forcing) = affine_parts(sys)?;
    let dy = PreciseDynamics::new(t, forcing, omega, &sys.driving, from.min(to), from.max(to), x.bits);
    Ok(PrecisePoint {
        bits: x.bits,
        coords: dy.transport(&x.coords, from, to),
    })
}

/// `x + v` for a real displacement `v`, exact in the point's precision.
pub fn displace(x: &PrecisePoint, v: [f64; 2]) -> PrecisePoint {
    let fx = Fixed::new(x.bits);
    let conv = |r: f64| {
        let (m, e, s) = integer_decode(r);
        let shift = e + x.bits as i32;
        let big = BigInt::from(m) * s;
        if shift >= 0 {
            big << shift as u32
        } else {
            big >> (-shift) as u32
        }
    };
    PrecisePoint {
        bits: x.bits,
        coords: [
            fx.reduce(&(&x.coords[0] + conv(v[0]))),
            fx.reduce(&(&x.coords[1] + conv(v[1]))),
        ],
    }
}

fn integer_decode(x: f64) -> (u64, i32, i64) {
    if x == 0.0 {
        return (0, 0, 1);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1 } else { -1 };
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = if exp == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    (mant, exp - 1075, sign)
}

/// A random specification with `k` intervals of length at most `max_len`,
/// gaps of `spacing + 1 + extra` with `extra < 3`, and uniform anchors.
pub fn random_specification<R: rand::Rng>(
    sys: &SkewSystem,
    rng: &mut R,
    k: usize,
    spacing: i64,
    max_len: i64,
) -> Result<OmegaSpecification> {
    let omega = sys.driving.point(rng.random::<f64>());
    let mut intervals = Vec::with_capacity(k);
    let mut a = rng.random_range(0..5);
    for _ in 0..k {
        let b = a + rng.random_range(0..=max_len);
        intervals.push((a, b));
        a = b + spacing + 1 + rng.random_range(0..3);
    }
    let anchors = (0..k)
        .map(|_| FiberPoint::torus(rng.random(), rng.random()))
        .collect();
    OmegaSpecification::new(omega, intervals, anchors, spacing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cat() -> SkewSystem {
        SkewSystem::cat_map(std::f64::consts::SQRT_2 - 1.0, Forcing::zero()).unwrap()
    }

    #[test]
    fn product_of_equal_points() {
        let sys = cat();
        let f = hyperbolic_frame(&sys).unwrap();
        let x = FiberPoint::torus(0.3, 0.6);
        assert_eq!(local_product(&x, &x, 0.1, &f).unwrap(), x);
    }

    #[test]
    fn product_along_unstable_offset() {
        let sys = cat();
        let f = hyperbolic_frame(&sys).unwrap();
        let x = FiberPoint::torus(0.3, 0.6);
        let y = x.translate([0.01 * f.e_u[0], 0.01 * f.e_u[1]]);
        let z = local_product(&x, &y, 0.1, &f).unwrap();
        assert!(fibertherm::skew::fiber_distance(&z, &x) < 1e-12);
    }

    #[test]
    fn single_interval_shadows_itself() {
        let sys = cat();
        let omega = sys.driving.point(0.4);
        let spec = OmegaSpecification::new(omega, vec![(3, 12)], vec![FiberPoint::torus(0.2, 0.9)], 0).unwrap();
        let s = shadow(&sys, &spec, 0.1).unwrap();
        assert_eq!(s.certificate.max_distance, 0.0);
    }

    #[test]
    fn random_specifications_verify() {
        let sys = SkewSystem::cat_map(
            0.618_033_988_749_894_8,
            Forcing {
                components: [
                    vec![fibertherm::skew::FourierTerm { m: 1, a: 0.1, b: 0.05 }],
                    vec![fibertherm::skew::FourierTerm { m: 2, a: -0.07, b: 0.0 }],
                ],
            },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m = mixing_gap(&sys, 0.1).unwrap().n;
        for _ in 0..20 {
            let spec = random_specification(&sys, &mut rng, 5, m, 12).unwrap();
            let s = shadow(&sys, &spec, 0.1).unwrap();
            let v = verify_shadowing(&sys, &spec, &s.point, 0.1).unwrap();
            assert!(v.ok && v.max_distance <= 0.05, "{}", v.max_distance);
        }
    }

    #[test]
    fn spacing_below_gap_is_refused() {
        let sys = cat();
        let m = mixing_gap(&sys, 0.1).unwrap().n;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let spec = random_specification(&sys, &mut rng, 3, m - 1, 5).unwrap();
        assert!(matches!(shadow(&sys, &spec, 0.1), Err(Error::SpacingTooSmall { .. })));
    }

    #[test]
    fn cocycle_is_not_affine() {
        let sys = SkewSystem::cocycle(0.381_966_011_250_105_1, vec![IntMat2::new(2, 1, 1, 1), IntMat2::new(1, 1, 1, 2)]).unwrap();
        let spec = OmegaSpecification::new(sys.driving.point(0.1), vec![(0, 2)], vec![FiberPoint::torus(0.1, 0.1)], 0).unwrap();
        assert_eq!(shadow(&sys, &spec, 0.1), Err(Error::NotAffine));
    }
}
