//! Exact piecewise-linear dynamics on the interval and on a planar continuum.
//!
//! Maps are piecewise-linear homeomorphisms with rational breakpoints, so
//! every structural question (fixed sets, wandering intervals, C0 distances,
//! alternating chains) is answered exactly. Randomness only enters through
//! pseudo-orbit sampling, which is seeded and reproducible in both execution
//! modes.

// Errors carry the exact rationals that caused them; they are off the hot path.
#![allow(clippy::result_large_err)]

pub mod cantor;
pub mod continuum;
pub mod error;
pub mod par;
pub mod plmap;
pub mod random;
pub mod rational;
pub mod shadowing;
pub mod svg;

pub use error::{Error, Result};
pub use plmap::{ClosedInterval, Orientation, OrientedInterval, PlHomeo};
pub use rational::Rational;
