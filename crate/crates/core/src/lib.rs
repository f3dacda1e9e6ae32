//! Thermodynamic formalism for skew product dynamical systems.
//!
//! Shared foundations: driving systems on the base, skew products over
//! rotations, Sturmian subshifts and a one-point base, fiber Bowen metrics,
//! observables and Birkhoff sums. Counting, pressure, shadowing and Katok
//! estimates live in their own crates on top of this one.

pub mod base;
pub mod error;
pub mod neighbors;
pub mod observable;
pub mod parallel;
pub mod skew;
pub mod stats;
pub mod torus;

pub use base::{base_distance, base_step, sturmian_symbol, BasePoint, DrivingSystem};
pub use error::{Error, Result};
pub use observable::Observable;
pub use skew::{
    bowen_ball_area, bowen_distance, expansivity_constants, fiber_step, hyperbolic_frame, FiberKind, FiberPoint,
    Forcing, FourierTerm, HyperbolicFrame, SkewSystem,
};
pub use torus::{IntMat2, Phase};
