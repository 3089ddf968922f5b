use crate::error::{Error, Result};
use crate::stats::{linear_fit, LinearFit};

/// Least squares of `value` against `ln N`.
pub fn log_fit(points: &[(f64, f64)]) -> Result<LinearFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientSamples { what: "log_fit", needed: 3, got: points.len() });
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    linear_fit(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_log_line() {
        let pts: Vec<_> = [8.0f64, 16.0, 32.0, 64.0].iter().map(|&n| (n, 2.0 * n.ln() + 1.0)).collect();
        let f = log_fit(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12 && (f.r2 - 1.0).abs() < 1e-12);
        let flat: Vec<_> = [8.0, 16.0, 32.0].iter().map(|&n| (n, 3.0)).collect();
        assert_eq!(log_fit(&flat).unwrap().slope, 0.0);
        assert!(log_fit(&pts[..2]).is_err());
    }
}
