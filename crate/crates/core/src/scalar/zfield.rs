use crate::error::Result;
use crate::noise::ModeDriverBank;
use crate::spectral::{lp_weight, mode_norm_sq, FourierField};

/// `z = Duh[zeta]` and `d_t z` from the `Z` bank, optionally weighted by `rho_{<=N}`.
pub fn sample_z(bank: &ModeDriverBank, n: Option<u64>, t: f64, radius: usize) -> Result<(FourierField, FourierField)> {
    bank.check_time(t)?;
    let mut z = FourierField::zeros(radius, false);
    let mut dz = FourierField::zeros(radius, false);
    for i in 0..z.coeffs().len() {
        let k = z.mode_at(i);
        let w = n.map_or(1.0, |n| lp_weight(k, n));
        if w == 0.0 {
            continue;
        }
        let st = bank.state(k);
        let n2 = mode_norm_sq(k);
        let (a, b) = if n2 == 0 {
            (-(st.i1 * t - st.it), -st.i1)
        } else {
            let om = (n2 as f64).sqrt();
            let (s, c) = (om * t).sin_cos();
            (-(st.ic * s - st.is * c) / om, -(st.ic * c + st.is * s))
        };
        z.coeffs_mut()[i] = a * w;
        dz.coeffs_mut()[i] = b * w;
    }
    Ok((z, dz))
}
