use crate::error::{Error, Result};
use crate::spectral::{mode_norm, Mode};

/// `E[z(t, k) conj z(s, l)]` for `k, l != 0`.
pub fn cov_z_closed(k: Mode, l: Mode, t: f64, s: f64) -> Result<f64> {
    if k == [0, 0] || l == [0, 0] {
        return Err(Error::ZeroMode);
    }
    if k != l {
        return Ok(0.0);
    }
    Ok(cov_z_diag(mode_norm(k), t, s))
}

pub(crate) fn cov_z_diag(w: f64, t: f64, s: f64) -> f64 {
    t.min(s) * ((t - s) * w).cos() / (2.0 * w * w) + (((t - s).abs() * w).sin() - ((t + s) * w).sin()) / (4.0 * w.powi(3))
}
