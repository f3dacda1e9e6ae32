//! Real observables on Ω × M and their Birkhoff sums.

use std::f64::consts::TAU;

use crate::base::{base_step, BasePoint};
use crate::skew::{FiberPoint, FourierTerm, SkewSystem};

/// Harmonic `c cos(2π m·x) + s sin(2π m·x)` on the fiber.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrigTerm {
    pub m: [i32; 2],
    pub c: f64,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableKind {
    Zero,
    /// Trigonometric polynomial in the fiber coordinates.
    FiberTrig(Vec<TrigTerm>),
    /// `g(ω)·f(x)` with `g` a Fourier sum in the base phase.
    Product { base: Vec<FourierTerm>, fiber: Vec<TrigTerm> },
    /// Leading binary digit of the (first) fiber coordinate.
    FirstDigit,
}

/// `scale · kind(ω, x) + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub kind: ObservableKind,
    pub scale: f64,
    pub offset: f64,
}

fn trig(terms: &[TrigTerm], x: [f64; 2]) -> f64 {
    terms
        .iter()
        .map(|t| {
            let arg = TAU * (t.m[0] as f64 * x[0] + t.m[1] as f64 * x[1]);
            t.c * arg.cos() + t.s * arg.sin()
        })
        .sum()
}

fn trig_sup(terms: &[TrigTerm]) -> f64 {
    terms.iter().map(|t| t.c.hypot(t.s)).sum()
}

fn trig_lip(terms: &[TrigTerm]) -> f64 {
    terms
        .iter()
        .map(|t| TAU * (t.m[0] as f64).hypot(t.m[1] as f64) * t.c.hypot(t.s))
        .sum()
}

impl Observable {
    pub fn zero() -> Observable {
        Observable::constant(0.0)
    }

    pub fn constant(c: f64) -> Observable {
        Observable {
            kind: ObservableKind::Zero,
            scale: 1.0,
            offset: c,
        }
    }

    pub fn first_digit() -> Observable {
        Observable {
            kind: ObservableKind::FirstDigit,
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn fiber_trig(terms: Vec<TrigTerm>) -> Observable {
        Observable {
            kind: ObservableKind::FiberTrig(terms),
            scale: 1.0,
            offset: 0.0,
        }
    }

    pub fn product(base: Vec<FourierTerm>, fiber: Vec<TrigTerm>) -> Observable {
        Observable {
            kind: ObservableKind::Product { base, fiber },
            scale: 1.0,
            offset: 0.0,
        }
    }

    /// `q · self`.
    pub fn scaled(&self, q: f64) -> Observable {
        Observable {
            kind: self.kind.clone(),
            scale: self.scale * q,
            offset: self.offset * q,
        }
    }

    /// `self + c`.
    pub fn shifted(&self, c: f64) -> Observable {
        Observable {
            offset: self.offset + c,
            ..self.clone()
        }
    }

    fn raw(&self, omega: &BasePoint, x: &FiberPoint) -> f64 {
        match &self.kind {
            ObservableKind::Zero => 0.0,
            ObservableKind::FiberTrig(terms) => trig(terms, x.coords()),
            ObservableKind::Product { base, fiber } => {
                let w = omega.phase();
                let g: f64 = base
                    .iter()
                    .map(|t| {
                        let arg = TAU * t.m as f64 * w;
                        t.a * arg.cos() + t.b * arg.sin()
                    })
                    .sum();
                g * trig(fiber, x.coords())
            }
            ObservableKind::FirstDigit => x.phases()[0].first_digit() as f64,
        }
    }

    pub fn eval(&self, omega: &BasePoint, x: &FiberPoint) -> f64 {
        if self.scale == 0.0 {
            return self.offset;
        }
        self.scale * self.raw(omega, x) + self.offset
    }

    /// Bounds `[lo, hi]` on the range of the observable.
    pub fn range_bounds(&self) -> (f64, f64) {
        let (lo, hi) = match &self.kind {
            ObservableKind::Zero => (0.0, 0.0),
            ObservableKind::FiberTrig(t) => (-trig_sup(t), trig_sup(t)),
            ObservableKind::Product { base, fiber } => {
                let g: f64 = base.iter().map(|t| t.a.hypot(t.b)).sum();
                let b = g * trig_sup(fiber);
                (-b, b)
            }
            ObservableKind::FirstDigit => (0.0, 1.0),
        };
        let (a, b) = (self.scale * lo + self.offset, self.scale * hi + self.offset);
        (a.min(b), a.max(b))
    }

    /// Upper bound on the sup norm.
    pub fn sup_norm(&self) -> f64 {
        let (lo, hi) = self.range_bounds();
        lo.abs().max(hi.abs())
    }

    /// Lipschitz constant in the fiber variable; `None` for the
    /// discontinuous digit observable.
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.kind {
            ObservableKind::Zero => Some(0.0),
            ObservableKind::FiberTrig(t) => Some(self.scale.abs() * trig_lip(t)),
            ObservableKind::Product { base, fiber } => {
                let g: f64 = base.iter().map(|t| t.a.hypot(t.b)).sum();
                Some(self.scale.abs() * g * trig_lip(fiber))
            }
            ObservableKind::FirstDigit => None,
        }
    }

    /// The value when the observable is constant.
    pub fn as_constant(&self) -> Option<f64> {
        match self.kind {
            ObservableKind::Zero => Some(self.offset),
            _ if self.scale == 0.0 => Some(self.offset),
            _ => None,
        }
    }

    /// `(a, b)` with `φ = a·digit + b` when the observable depends only on
    /// the first binary digit.
    pub fn digit_affine(&self) -> Option<(f64, f64)> {
        match self.kind {
            ObservableKind::Zero => Some((0.0, self.offset)),
            ObservableKind::FirstDigit => Some((self.scale, self.offset)),
            _ if self.scale == 0.0 => Some((0.0, self.offset)),
            _ => None,
        }
    }
}

/// `S_n φ(ω, x) = Σ_{i<n} φ(Θ^i(ω, x))`.
pub fn birkhoff_sum(sys: &SkewSystem, phi: &Observable, omega: &BasePoint, x: &FiberPoint, n: usize) -> f64 {
    if let Some(c) = phi.as_constant() {
        return c * n as f64;
    }
    let orbit = crate::skew::fiber_orbit(sys, omega, x, n);
    orbit
        .iter()
        .enumerate()
        .map(|(i, p)| phi.eval(&base_step(&sys.driving, omega, i as i64), p))
        .sum()
}
