pub mod counting;
pub mod fit;
pub mod nullform;
pub mod zcov;

pub use counting::{annulus, count_lattice, counting_constant_scan, sample_l, sup_count, CountQuery, CountRow, Variant, WINDOW_SLACK};
pub use fit::log_fit;
pub use nullform::{
    chi_cutoff, chi_scaled, default_quad_pts, functional_variance_closed, functionals_mc, gradient_functional_variance, im_part, leray,
    null_identity_residual, nullform_variance_closed, nullform_variance_mc, q12, variance_on_nodes, window_nodes, ComplexMc, Functional,
    NullformMc,
};
pub use zcov::cov_z_closed;
