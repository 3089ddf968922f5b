use crate::error::{Error, Result};
use crate::spectral::{mode_norm, FourierField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Trapezoid,
    Simpson,
}

/// Weights on nodes `0..=j` of a uniform grid with unit spacing.
pub(crate) fn weights(j: usize, rule: Rule) -> Vec<f64> {
    let mut w = vec![0.0; j + 1];
    if j == 0 {
        return w;
    }
    if rule == Rule::Trapezoid || j == 1 {
        w.iter_mut().for_each(|x| *x = 1.0);
        w[0] = 0.5;
        w[j] = 0.5;
        return w;
    }
    let simpson_end = if j.is_multiple_of(2) { j } else { j - 3 };
    for i in (0..simpson_end).step_by(2) {
        w[i] += 1.0 / 3.0;
        w[i + 1] += 4.0 / 3.0;
        w[i + 2] += 1.0 / 3.0;
    }
    if j % 2 == 1 {
        for (o, c) in [0.375, 1.125, 1.125, 0.375].into_iter().enumerate() {
            w[simpson_end + o] += c;
        }
    }
    w
}

pub(crate) fn check_uniform(times: &[f64]) -> Result<f64> {
    if times.len() < 2 {
        return Ok(0.0);
    }
    let h = times[1] - times[0];
    if !(h > 0.0) {
        return Err(Error::NonUniformGrid);
    }
    for p in times.windows(2) {
        if ((p[1] - p[0]) - h).abs() > 1e-9 * h {
            return Err(Error::NonUniformGrid);
        }
    }
    Ok(h)
}

/// `Duh[G](t_j) = -int_0^{t_j} sin((t_j - s)|k|)/|k| G(s) ds` at every grid time,
/// with `G` sampled at `times` (which must start at 0).
pub fn duhamel(g: &[FourierField], times: &[f64], rule: Rule) -> Result<Vec<FourierField>> {
    let h = check_uniform(times)?;
    let n = g.len();
    if n != times.len() {
        return Err(Error::InvalidArgument("one sample per time required".into()));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let r = g.iter().map(|f| f.radius()).max().unwrap();
    let g: Vec<FourierField> = g.iter().map(|f| f.resized(r)).collect();
    let herm = g.iter().all(|f| f.is_hermitian());
    let mut out = vec![FourierField::zeros(r, herm); n];
    let wts: Vec<Vec<f64>> = (0..n).map(|j| weights(j, rule)).collect();
    let mut kern = vec![0.0; n];
    for i in 0..out[0].coeffs().len() {
        let w = mode_norm(out[0].mode_at(i));
        for (m, kv) in kern.iter_mut().enumerate() {
            let lag = m as f64 * h;
            *kv = if w == 0.0 { lag } else { (w * lag).sin() / w };
        }
        for j in 1..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for (s, &wt) in wts[j].iter().enumerate() {
                acc += g[s].coeffs()[i] * (wt * kern[j - s]);
            }
            out[j].coeffs_mut()[i] = -acc * h;
        }
    }
    Ok(out)
}
