//! Covariances of increments of the filtered integrals over one step.
//!
//! Over `[t, t + dt]` with `u = s - t` the integrands are expanded in the
//! local basis `1, sin(w u), 1 - cos(w u)`, whose Gram matrix stays well
//! conditioned for small `w dt`.

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;

pub type Lower3 = [[f64; 3]; 3];

fn sin_half_sq(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// Gram matrix of the local basis on `[0, dt]` for frequency `w > 0`.
pub fn local_gram(w: f64, dt: f64) -> [[f64; 3]; 3] {
    let x = w * dt;
    let g = if x < 2.0 {
        let q = GaussLegendre::new(24);
        let mut g = [[0.0; 3]; 3];
        for (v, wt) in q.on(0.0, 1.0) {
            let f = [1.0, (x * v).sin(), sin_half_sq(x * v)];
            for i in 0..3 {
                for j in 0..=i {
                    g[i][j] += wt * f[i] * f[j];
                }
            }
        }
        g
    } else {
        let (s, s2) = (x.sin(), (2.0 * x).sin());
        let one_minus_cos = sin_half_sq(x);
        let mut g = [[0.0; 3]; 3];
        g[0][0] = 1.0;
        g[1][0] = one_minus_cos / x;
        g[2][0] = 1.0 - s / x;
        g[1][1] = 0.5 - s2 / (4.0 * x);
        g[2][1] = one_minus_cos / x - s * s / (2.0 * x);
        g[2][2] = 1.5 - 2.0 * s / x + s2 / (4.0 * x);
        g
    };
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            out[i][j] = dt * g[i][j];
            out[j][i] = out[i][j];
        }
    }
    out
}

/// Lower Cholesky factor of `local_gram(w, dt)`.
pub fn gram_cholesky(w: f64, dt: f64, norm_sq: i64) -> Result<Lower3> {
    if dt <= 0.0 {
        return Err(Error::NonPositiveStep(dt));
    }
    let g = local_gram(w, dt);
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let pivot = g[i][i] - s;
                if pivot < -1e-12 * g[i][i] {
                    return Err(Error::CholeskyFailure { norm_sq, pivot });
                }
                l[i][i] = pivot.max(0.0).sqrt();
            } else {
                l[i][j] = if l[j][j] > 0.0 { (g[i][j] - s) / l[j][j] } else { 0.0 };
            }
        }
    }
    Ok(l)
}

/// Lower Cholesky factor for the zero-mode basis `1, u` on `[0, dt]`.
pub fn zero_mode_cholesky(dt: f64) -> Result<[[f64; 2]; 2]> {
    if dt <= 0.0 {
        return Err(Error::NonPositiveStep(dt));
    }
    let r = dt.sqrt();
    Ok([[r, 0.0], [0.5 * dt * r, dt * r / 12f64.sqrt()]])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(w: f64, dt: f64) -> [[f64; 3]; 3] {
        let q = GaussLegendre::new(64);
        let mut g = [[0.0; 3]; 3];
        for (u, wt) in q.on(0.0, dt) {
            let f = [1.0, (w * u).sin(), 1.0 - (w * u).cos()];
            for i in 0..3 {
                for j in 0..3 {
                    g[i][j] += wt * f[i] * f[j];
                }
            }
        }
        g
    }

    #[test]
    fn both_branches_match_quadrature() {
        for (w, dt) in [(1.0, 0.5), (3.0, 0.7), (5.0, 0.5), (10.0, 1.0), (2f64.sqrt(), 1.9)] {
            let (a, b) = (local_gram(w, dt), brute(w, dt));
            for i in 0..3 {
                for j in 0..3 {
                    assert!((a[i][j] - b[i][j]).abs() < 1e-13 * dt, "{w} {dt} {i}{j}");
                }
            }
        }
    }

    #[test]
    fn factor_reproduces_gram_at_tiny_steps() {
        for (w, dt) in [(1.0, 1e-7), (181.0, 1.0 / 2048.0), (1.0, 1.0 / 512.0)] {
            let l = gram_cholesky(w, dt, 0).unwrap();
            let g = local_gram(w, dt);
            for i in 0..3 {
                for j in 0..3 {
                    let s: f64 = (0..3).map(|k| l[i][k] * l[j][k]).sum();
                    assert!((s - g[i][j]).abs() <= 1e-12 * g[i][i].max(g[j][j]), "{w} {dt}");
                }
            }
        }
    }

    #[test]
    fn zero_mode_factor() {
        let l = zero_mode_cholesky(2.0).unwrap();
        assert!((l[0][0] * l[1][0] - 2.0).abs() < 1e-14);
        assert!((l[1][0].powi(2) + l[1][1].powi(2) - 8.0 / 3.0).abs() < 1e-14);
    }
}
