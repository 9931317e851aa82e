//! Khinchin families of power series.
//!
//! A power series `f(z) = sum a_n z^n` with `a_0 > 0`, nonnegative
//! coefficients and radius `R > 0` defines, for each `0 <= t < R`, the
//! integer-valued law `P(X_t = n) = a_n t^n / f(t)`.  This crate evaluates
//! these laws and their moments stably, diagnoses concentration as `t`
//! approaches `R`, checks classical inequalities constructively and compares
//! saddle-point coefficient estimates against exact values.

pub mod error;
pub mod gf;
pub mod dsl;
pub mod family;
pub mod par;
pub mod diagnostics;
pub mod corpus;
pub mod verify;
pub mod asymptotics;
pub mod sampler;

pub use error::{Error, Result};
