//! Spectral simulation of a stochastic gauge-covariant wave equation on the
//! two-torus in Lorenz gauge.

pub mod error;
pub mod estimates;
pub mod gauge;
pub mod noise;
pub mod quadrature;
pub mod scalar;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
