use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(Error::InsufficientSamples { what: "linear fit", needed: 2, got: n.min(ys.len()) });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub n: usize,
    pub mean: f64,
    /// Unbiased (Bessel-corrected, divisor `n - 1`) sample variance.
    pub variance: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

/// One-pass Welford moments in index order.
pub fn mc_reduce(samples: &[f64]) -> Result<McSummary> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::InsufficientSamples { what: "mc_reduce", needed: 2, got: n });
    }
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, &x) in samples.iter().enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let variance = (m2 / (n - 1) as f64).max(0.0);
    let stderr = (variance / n as f64).sqrt();
    Ok(McSummary { n, mean, variance, stderr, ci95: (mean - 1.96 * stderr, mean + 1.96 * stderr) })
}

/// Sample variance and its jackknife standard error.
pub fn variance_with_jackknife(samples: &[f64]) -> Result<(f64, f64)> {
    variance_sum_with_jackknife(&[samples])
}

/// Sum of the sample variances of several equally long components (for
/// complex data, real and imaginary parts) and its jackknife standard error.
pub fn variance_sum_with_jackknife(components: &[&[f64]]) -> Result<(f64, f64)> {
    let n = components.first().map_or(0, |c| c.len());
    if n < 3 {
        return Err(Error::InsufficientSamples { what: "jackknife", needed: 3, got: n });
    }
    let m = (n - 1) as f64;
    let mut var = 0.0;
    let mut loo = vec![0.0; n];
    for samples in components {
        let mean = samples.iter().sum::<f64>() / n as f64;
        let c: Vec<f64> = samples.iter().map(|x| x - mean).collect();
        let s1: f64 = c.iter().sum();
        let s2: f64 = c.iter().map(|x| x * x).sum();
        var += (s2 - s1 * s1 / n as f64) / m;
        for (l, x) in loo.iter_mut().zip(&c) {
            *l += ((s2 - x * x) - (s1 - x).powi(2) / m) / (m - 1.0);
        }
    }
    let lm = loo.iter().sum::<f64>() / n as f64;
    let jk = loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>() * m / n as f64;
    Ok((var, jk.sqrt()))
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_stream() {
        let s = mc_reduce(&[2.5; 10]).unwrap();
        assert_eq!((s.mean, s.variance, s.stderr, s.ci95), (2.5, 0.0, 0.0, (2.5, 2.5)));
    }

    #[test]
    fn bessel_convention() {
        let xs: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let s = mc_reduce(&xs).unwrap();
        assert!((s.variance - 0.25 * 10.0 / 9.0).abs() < 1e-15);
        assert!(mc_reduce(&[1.0]).is_err());
    }

    #[test]
    fn exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jackknife_matches_direct_leave_one_out() {
        let xs = [0.3, -1.2, 2.2, 0.7, 0.1, -0.4];
        let (var, se) = variance_with_jackknife(&xs).unwrap();
        let loo: Vec<f64> = (0..xs.len())
            .map(|i| {
                let v: Vec<f64> = xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
                mc_reduce(&v).unwrap().variance
            })
            .collect();
        let n = xs.len() as f64;
        let lm = loo.iter().sum::<f64>() / n;
        let want = (loo.iter().map(|v| (v - lm).powi(2)).sum::<f64>() * (n - 1.0) / n).sqrt();
        assert!((var - mc_reduce(&xs).unwrap().variance).abs() < 1e-14);
        assert!((se - want).abs() < 1e-13);
    }
}
