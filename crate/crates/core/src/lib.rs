//! Fourier-multiplier experiments for `L^p -> L^q` resolvent bounds of the
//! Lame operator `-mu Laplace - (lambda + mu) grad div`.

// `!(x > 0.0)` is the NaN-rejecting range check used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod carleman;
pub mod cli;
pub mod eigen;
pub mod error;
pub mod field;
pub mod fit;
pub mod geometry;
pub mod profiles;
pub mod quadrature;
pub mod sharpness;
pub mod symbols;

pub use error::{Error, Result};
