use super::bump::{block_weight_at, dyadic_blocks};
use super::fft::{padded_size, Transform};
use super::field::{mode_norm, FourierField, AREA};
use super::paraproduct::{lp_project, Projection};
use crate::stats::linear_fit;
use serde::{Deserialize, Serialize};

/// `(K, ||P_K f||_{L^2})` for every dyadic block of the field's box.
pub fn block_norms(f: &FourierField) -> Vec<(u64, f64)> {
    let blocks = dyadic_blocks(f.radius());
    let mut sums = vec![0.0; blocks.len()];
    for (k, c) in f.iter() {
        let a = c.norm_sqr();
        if a == 0.0 {
            continue;
        }
        let r = mode_norm(k);
        for (i, &b) in blocks.iter().enumerate() {
            let bf = b as f64;
            // supp rho_K lies in 7K/16 < |n| < 9K/8 (all of |n| < 9/8 for K = 1)
            if r >= 1.125 * bf || (b > 1 && r <= 0.4375 * bf) {
                continue;
            }
            let w = block_weight_at(r, b);
            if w != 0.0 {
                sums[i] += w * w * a;
            }
        }
    }
    blocks.into_iter().zip(sums).map(|(b, s)| (b, (AREA * s).sqrt())).collect()
}

/// `(sum_K K^{2 nu} ||P_K f||^2)^{1/2}`.
pub fn sobolev_norm(f: &FourierField, nu: f64) -> f64 {
    block_norms(f).iter().map(|&(k, n)| (k as f64).powf(2.0 * nu) * n * n).sum::<f64>().sqrt()
}

/// `sup_K K^nu ||P_K f||_{L^inf}`, sampled on the padded grid.
pub fn hoelder_norm(f: &FourierField, nu: f64) -> f64 {
    let t = Transform::new(padded_size(f.radius()));
    dyadic_blocks(f.radius())
        .into_iter()
        .map(|k| {
            let p = lp_project(f, k, Projection::Block);
            let sup = t.synthesize(&p).expect("padded grid").iter().map(|z| z.norm()).fold(0.0, f64::max);
            (k as f64).powf(nu) * sup
        })
        .fold(0.0, f64::max)
}

/// Norm in `H^nu x H^{nu-1}`.
pub fn pair_norm(f: &FourierField, g: &FourierField, nu: f64) -> f64 {
    sobolev_norm(f, nu) + sobolev_norm(g, nu - 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LPBlockProfile {
    pub entries: Vec<(u64, f64)>,
    /// Slope of `ln ||P_K f||` against `ln K`; `None` when fewer than 3 blocks are usable.
    pub fitted_slope: Option<f64>,
}

impl LPBlockProfile {
    pub fn is_degenerate(&self) -> bool {
        self.fitted_slope.is_none()
    }
}

pub fn lp_profile(f: &FourierField) -> LPBlockProfile {
    let entries: Vec<_> = block_norms(f).into_iter().filter(|&(_, n)| n > 0.0).collect();
    profile_from_entries(entries)
}

pub fn profile_from_entries(entries: Vec<(u64, f64)>) -> LPBlockProfile {
    let usable: Vec<_> = entries.iter().filter(|&&(_, n)| n > 1e-14).collect();
    let fitted_slope = if usable.len() < 3 {
        None
    } else {
        let xs: Vec<f64> = usable.iter().map(|&&(k, _)| (k as f64).ln()).collect();
        let ys: Vec<f64> = usable.iter().map(|&&(_, n)| n.ln()).collect();
        linear_fit(&xs, &ys).ok().map(|fit| fit.slope)
    };
    LPBlockProfile { entries, fitted_slope }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    #[test]
    fn constant_and_zero() {
        let f = FourierField::constant(3, 2.0);
        assert!((sobolev_norm(&f, 0.0) - 4.0 * PI).abs() < 1e-12);
        let z = FourierField::zeros(3, true);
        assert_eq!(sobolev_norm(&z, -0.3), 0.0);
        assert_eq!(hoelder_norm(&z, 0.5), 0.0);
        assert!(lp_profile(&z).is_degenerate());
        assert!(lp_profile(&z).entries.is_empty());
    }

    #[test]
    fn single_mode_at_four() {
        // rho_4(4) = rho_8(4) = 1/2, so ||f||^2 = (2pi)^2 (4^{-1} + 8^{-1}) / 4
        let f = FourierField::single_mode(5, [4, 0], Complex64::new(1.0, 0.0));
        let want = (4.0 * PI * PI * (0.25 + 0.125) / 4.0).sqrt();
        assert!((sobolev_norm(&f, -0.5) - want).abs() < 1e-13);
        assert!(lp_profile(&f).is_degenerate());
    }

    #[test]
    fn power_law_slope() {
        let f = FourierField::from_fn(200, false, |k| {
            let r = mode_norm(k);
            if r == 0.0 || r > 200.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(r.powi(-2), 0.0)
            }
        });
        let entries: Vec<_> = block_norms(&f).into_iter().filter(|&(k, _)| (4..=64).contains(&k)).collect();
        let slope = profile_from_entries(entries).fitted_slope.unwrap();
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn hoelder_of_plane_wave() {
        let f = FourierField::single_mode(3, [1, 1], Complex64::new(2.0, 0.0));
        // |n| = sqrt 2 sits in blocks 2 only partially: weights rho(sqrt2/2)=1 minus rho(sqrt2)=0
        assert!((hoelder_norm(&f, 0.0) - 2.0).abs() < 1e-12);
    }
}
