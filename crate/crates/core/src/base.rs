//! Driving systems: circle rotations, Sturmian codings of rotations, and the
//! one-point base.
//!
//! Base points store their origin together with an integer step count, so
//! the group law `θ^(s+t) = θ^t ∘ θ^s` holds exactly and Sturmian symbols are
//! regenerated on demand from the coding parameters.

use crate::torus::{frac_mul, wrap};

/// Base map θ on Ω.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DrivingSystem {
    /// x ↦ x + α on R/Z.
    Rotation { alpha: f64 },
    /// The two-letter coding of the rotation by α, with the shift.
    Sturmian { alpha: f64 },
    /// Ω = {•}.
    Point,
}

/// Orbit position `θ^steps(origin)` under the rotation by `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CirclePoint {
    pub origin: f64,
    pub alpha: f64,
    pub steps: i64,
}

impl CirclePoint {
    pub fn coordinate(&self) -> f64 {
        wrap(self.origin + frac_mul(self.steps, self.alpha))
    }
}

/// The bi-infinite Sturmian word `i ↦ sturmian_symbol(alpha, x0, shift + i)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SturmianWindow {
    pub alpha: f64,
    pub x0: f64,
    pub shift: i64,
}

impl SturmianWindow {
    pub fn symbol(&self, i: i64) -> u8 {
        sturmian_symbol(self.alpha, self.x0, self.shift + i)
    }

    /// The centered word of indices `-radius..=radius`.
    pub fn word(&self, radius: i64) -> Vec<u8> {
        (-radius..=radius).map(|i| self.symbol(i)).collect()
    }

    /// Rotation coordinate whose coding is this word.
    pub fn coordinate(&self) -> f64 {
        wrap(self.x0 + frac_mul(self.shift, self.alpha))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BasePoint {
    Circle(CirclePoint),
    Word(SturmianWindow),
    Unit,
}

impl BasePoint {
    /// Circle coordinate of the point; the coding coordinate for Sturmian
    /// words and 0 for the one-point base.
    pub fn phase(&self) -> f64 {
        match self {
            BasePoint::Circle(c) => c.coordinate(),
            BasePoint::Word(w) => w.coordinate(),
            BasePoint::Unit => 0.0,
        }
    }

    /// Symbol at index 0, or 1 when the base carries no symbols.
    pub fn symbol0(&self) -> u8 {
        match self {
            BasePoint::Word(w) => w.symbol(0),
            _ => 1,
        }
    }
}

impl DrivingSystem {
    pub fn alpha(&self) -> Option<f64> {
        match self {
            DrivingSystem::Rotation { alpha } | DrivingSystem::Sturmian { alpha } => Some(*alpha),
            DrivingSystem::Point => None,
        }
    }

    /// The base point generated by the circle coordinate `x0`.
    pub fn point(&self, x0: f64) -> BasePoint {
        match *self {
            DrivingSystem::Rotation { alpha } => BasePoint::Circle(CirclePoint {
                origin: wrap(x0),
                alpha,
                steps: 0,
            }),
            DrivingSystem::Sturmian { alpha } => BasePoint::Word(SturmianWindow {
                alpha,
                x0: wrap(x0),
                shift: 0,
            }),
            DrivingSystem::Point => BasePoint::Unit,
        }
    }

    /// Whether `ω` belongs to this driving system.
    pub fn owns(&self, omega: &BasePoint) -> bool {
        match (self, omega) {
            (DrivingSystem::Rotation { alpha }, BasePoint::Circle(c)) => c.alpha == *alpha,
            (DrivingSystem::Sturmian { alpha }, BasePoint::Word(w)) => w.alpha == *alpha,
            (DrivingSystem::Point, BasePoint::Unit) => true,
            _ => false,
        }
    }

    /// Rejects rotation numbers within `1e-9` of a rational with denominator
    /// at most 1000.
    pub fn check_irrational(&self) -> Result<(), String> {
        let Some(alpha) = self.alpha() else {
            return Ok(());
        };
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(format!("rotation number {alpha} outside (0,1)"));
        }
        for q in 1..=1000i64 {
            let p = (alpha * q as f64).round();
            if (alpha - p / q as f64).abs() < 1e-9 {
                return Err(format!("rotation number {alpha} is numerically rational ({p}/{q})"));
            }
        }
        Ok(())
    }
}

/// θ^t ω.
pub fn base_step(_sys: &DrivingSystem, omega: &BasePoint, t: i64) -> BasePoint {
    match *omega {
        BasePoint::Circle(c) => BasePoint::Circle(CirclePoint {
            steps: c.steps + t,
            ..c
        }),
        BasePoint::Word(w) => BasePoint::Word(SturmianWindow {
            shift: w.shift + t,
            ..w
        }),
        BasePoint::Unit => BasePoint::Unit,
    }
}

/// Symbol 1 when `frac(x0 + iα) ∈ [0, 1-α)`, else 2.
pub fn sturmian_symbol(alpha: f64, x0: f64, i: i64) -> u8 {
    let x = wrap(x0 + frac_mul(i, alpha));
    if x < 1.0 - alpha {
        1
    } else {
        2
    }
}

/// Maximal index inspected when comparing Sturmian words.
const WORD_DEPTH: i64 = 64;

/// Arc metric on the circle, `2^-j` at the first disagreement (by `|j|`) for
/// words, and 0 on the point base.
pub fn base_distance(_sys: &DrivingSystem, w1: &BasePoint, w2: &BasePoint) -> f64 {
    match (w1, w2) {
        (BasePoint::Circle(a), BasePoint::Circle(b)) => {
            crate::torus::circle_distance(a.coordinate(), b.coordinate())
        }
        (BasePoint::Word(a), BasePoint::Word(b)) => {
            for j in 0..=WORD_DEPTH {
                if a.symbol(j) != b.symbol(j) || a.symbol(-j) != b.symbol(-j) {
                    return 2f64.powi(-(j as i32));
                }
            }
            0.0
        }
        _ => 0.0,
    }
}
