pub mod bump;
pub mod fft;
pub mod field;
pub mod norms;
pub mod paraproduct;
pub mod product;

pub use bump::{block_weight, dyadic_blocks, is_dyadic, lp_weight, rho, Threshold};
pub use fft::{fast_size, padded_size, Transform};
pub use field::{mode_norm, mode_norm_sq, FourierField, Mode, AREA};
pub use norms::{block_norms, hoelder_norm, lp_profile, pair_norm, profile_from_entries, sobolev_norm, LPBlockProfile};
pub use paraproduct::{lp_project, paraproduct, paraproduct_with, ParaKind, Projection};
pub use product::{dealiased_product, direct_product, ProductEngine};
