pub mod covariance;
pub mod potential;
pub mod renorm;

pub use covariance::{cov_a_closed, Component};
pub use potential::{current_j0, curvature, sample_a, Curvature, VectorPotentialState};
pub use renorm::{mass_squared, quadratic_mean, renormalized_quadratic, resonant_quadratic_closed, s_n};
