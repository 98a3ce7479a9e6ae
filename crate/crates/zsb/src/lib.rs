//! Periodic Zakharov–Shabat spectral machinery for the defocusing mKdV and
//! renormalized mKdV equations on the circle.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod abelian;
pub mod acceptance;
pub mod cli;
pub mod error;
pub mod evolution;
pub mod fourier;
pub mod frequencies;
pub mod pipeline;
pub mod potential;
pub mod quad;
pub mod roots_products;
pub mod seq_analysis;
pub mod spectrum;
pub mod zs_core;

pub use error::{Result, ZsbError};
pub use num_complex::Complex64 as C64;
