//! Numerical laboratory for the divisor-problem and zeta mean-square error
//! terms Δ, Δ*, E, E*, R, E₁ and their short-interval moments.
//!
//! Pipeline: [`divisor::DivisorTable`] and [`zeta::ZetaGrid`] are built
//! independently, [`error_terms`] turns them into an
//! [`error_terms::ErrorTermGrid`] by cumulative quadrature, [`moments`]
//! integrates over short intervals, and [`verify`] checks the results.

// Guards of the form `!(x > 0.0)` reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod divisor;
pub mod error;
pub mod error_terms;
pub mod moments;
pub mod persist;
pub mod pipeline;
pub mod quad;
pub mod sum;
pub mod verify;
pub mod zeta;

pub use error::{Error, Result};
