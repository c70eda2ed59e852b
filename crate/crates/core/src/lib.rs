//! Certified thickness computations for Cantor sets and systems of balls.
//!
//! The crate covers four layers:
//!
//! * [`scalar`]: exact rationals and outward-rounded intervals.
//! * [`cantor`] and [`patterns1d`]: self-similar sets on the line, Newhouse
//!   thickness, convex-combination and progression witnesses.
//! * [`product2d`]: triangles in `C × C`.
//! * [`ballsys`] and [`patterns_nd`]: systems of balls in the plane,
//!   Yavicoli thickness and the disk constructions behind the
//!   convex-combination and triangle witnesses.
//!
//! Every predicate that could be wrong is three-valued; floating point only
//! appears in plotting helpers.

pub mod ballsys;
pub mod cantor;
pub mod error;
pub mod exec;
pub mod patterns1d;
pub mod patterns_nd;
pub mod product2d;
pub mod report;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Certainty, Comparison, Exact, Interval};
