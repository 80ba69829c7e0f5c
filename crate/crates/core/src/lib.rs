//! Exact computation of the `Z²` skew product over an irrational rotation
//! `T(x, s₁, s₂) = (x + α, s₁ + f(x), s₂ + f(x + t))`, where `f = ±1` on the
//! two halves of the circle.
//!
//! The crate is organized bottom-up:
//!
//! - [`circle_arith`]: exact quadratic-surd arithmetic and circle points.
//! - [`cf_engine`]: continued fractions of the rotation number.
//! - [`cocycle`]: the Birkhoff cocycle `a_n(x)` and its identities.
//! - [`partition`]: intervals of constancy of `(a_q(x), a_q(x + t))`.
//! - [`essential_values`]: `ε(q)`, `θ(q)`, the period-approximating detector
//!   and classification of the essential-value group.
//! - [`cli`]: the command-line front end.

pub mod cf_engine;
pub mod cli;
pub mod circle_arith;
pub mod cocycle;
pub mod error;
pub mod essential_values;
pub mod partition;

pub use circle_arith::{CirclePoint, RealValue};
pub use error::{Error, Result};
