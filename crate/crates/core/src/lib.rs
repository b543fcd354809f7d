//! Brown measure of `x0 + i·σ_t`, where `x0` is self-adjoint with law `μ` and
//! `σ_t` is a free semicircular Brownian motion.
//!
//! The pipeline starts from a [`MeasureSpec`], validated into a [`Measure`].
//! [`subordination`] computes `v_t`, `Λ_t ∩ ℝ` and the boundary map `a_t`;
//! [`brown`] inverts it and assembles the density `w_t` on `Ω_t`.
//! [`maps`], [`characteristics`] and [`jn`] are independent cross-checks, and
//! [`rmt`] samples the matching random-matrix model.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod error;
pub mod measure;
pub mod quadrature;
pub mod brown;
mod chebyshev;
pub mod subordination;
pub mod maps;
pub mod characteristics;
pub mod jn;
pub mod rmt;

pub use error::{Error, Result};
pub use measure::{Measure, MeasureSpec, Moments, QIntegrals, Support};
pub use num_complex::Complex64;
