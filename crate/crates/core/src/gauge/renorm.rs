use super::potential::VectorPotentialState;
use crate::error::Result;
use crate::spectral::{lp_weight, mode_norm, FourierField, ProductEngine};
use num_complex::Complex64;

fn support(n: u64) -> impl Iterator<Item = ([i64; 2], f64)> {
    let r = (9 * n / 8 + 1) as i64;
    (-r..=r).flat_map(move |a| (-r..=r).map(move |b| [a, b])).filter_map(move |k| {
        let w = lp_weight(k, n);
        (w > 0.0).then_some((k, w))
    })
}

/// `S_N = sum_{n != 0} rho_{<=N}(n)^2 / |n|^2`.
pub fn s_n(n: u64) -> f64 {
    support(n).filter(|(k, _)| *k != [0, 0]).map(|(k, w)| w * w / mode_norm(k).powi(2)).sum()
}

/// The renormalized mass `(5/2) S_N |t|`.
pub fn mass_squared(n: u64, t: f64) -> f64 {
    2.5 * s_n(n) * t.abs()
}

/// `E` of the spatial mean of `(A^0)^2 + (A^1)^2 + (A^2)^2` at time `t`.
pub fn resonant_quadratic_closed(n: u64, t: f64) -> f64 {
    let osc: f64 = support(n)
        .filter(|(k, _)| *k != [0, 0])
        .map(|(k, w)| {
            let r = mode_norm(k);
            w * w / r.powi(3) * (-0.25 * (2.0 * t * r).sin() - 2.0 * (t * r).sin())
        })
        .sum();
    mass_squared(n, t) + osc + 2.0 * t.powi(3) / 3.0
}

/// Spatial mean (zero mode) of the unsubtracted quadratic, exact by Parseval.
pub fn quadratic_mean(s: &VectorPotentialState) -> f64 {
    s.a.iter().map(|f| f.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()).sum()
}

/// `(A^0)^2 + (A^1)^2 + (A^2)^2 - m^2_{<=N}(t)`.
pub fn renormalized_quadratic(s: &VectorPotentialState, engine: &ProductEngine) -> Result<FourierField> {
    let mut q = FourierField::zeros(s.radius(), true);
    for f in &s.a {
        q += &engine.product(f, f)?;
    }
    let z = q.get([0, 0]) - Complex64::new(mass_squared(s.n, s.t), 0.0);
    q.set([0, 0], z);
    Ok(q)
}
