//! Finite-scale fiber pressure and the multifractal spectrum it controls.

pub mod pressure;
pub mod spectrum;
