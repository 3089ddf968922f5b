//! Regularity of `Duh[∂_α(A^α ⋄ φ)](T)` for the three paraproducts `⋄`.

use super::duhamel::{check_uniform, weights, Rule};
use crate::error::{Error, Result};
use crate::gauge::VectorPotentialState;
use crate::spectral::{
    block_weight, dyadic_blocks, fast_size, lp_profile, mode_norm, profile_from_entries, FourierField, LPBlockProfile, ParaKind, Threshold,
    Transform,
};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeResult {
    pub kind: ParaKind,
    /// all nonzero blocks
    pub blocks: Vec<(u64, f64)>,
    /// blocks inside the fit window, with their fitted slope
    pub profile: LPBlockProfile,
    /// `-slope` of the block profile, so `||P_K f|| ~ K^{-exponent}`
    pub exponent: Option<f64>,
    #[serde(skip)]
    pub field: FourierField,
}

type Grid = Vec<Complex64>;

/// Streams a trajectory on a uniform grid `0 = t_0 < ... < t_n = T` and
/// accumulates the Duhamel integral at `T` for every kind.
pub struct SmoothingProbe {
    threshold: Threshold,
    transform: Transform,
    radius_a: usize,
    radius_phi: usize,
    times: Vec<f64>,
    weights: Vec<f64>,
    h: f64,
    window: (u64, u64),
    out: [FourierField; 3],
}

fn add_scaled(acc: &mut [Complex64], x: &[Complex64], s: f64) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += b * s;
    }
}

impl SmoothingProbe {
    pub fn new(times: &[f64], radius_a: usize, radius_phi: usize, threshold: Threshold, rule: Rule) -> Result<Self> {
        let h = check_uniform(times)?;
        if times.first().copied() != Some(0.0) || times.len() < 2 {
            return Err(Error::InvalidArgument("probe times must start at 0 and have at least two points".into()));
        }
        let r = radius_a + radius_phi;
        let n = times.len() - 1;
        Ok(SmoothingProbe {
            threshold,
            transform: Transform::new(fast_size(2 * r + 1)),
            radius_a,
            radius_phi,
            times: times.to_vec(),
            weights: weights(n, rule),
            h,
            window: (1, u64::MAX),
            out: [0, 1, 2].map(|_| FourierField::zeros(r, false)),
        })
    }

    /// Restricts the exponent fit to blocks `lo <= K <= hi`.
    pub fn with_fit_window(mut self, lo: u64, hi: u64) -> Self {
        self.window = (lo, hi);
        self
    }

    /// Prefix sums over dyadic blocks: `prefix[i] = sum_{j < i} P_{K_j} f` on the grid.
    fn block_prefix(&self, f: &FourierField, blocks: &[u64]) -> Result<Vec<Grid>> {
        let m = self.transform.size();
        let mut prefix = vec![vec![Complex64::new(0.0, 0.0); m * m]];
        let mut buf = Vec::new();
        for &k in blocks {
            self.transform.synthesize_into(&f.weighted(|q| block_weight(q, k)), &mut buf)?;
            let mut next = prefix.last().unwrap().clone();
            add_scaled(&mut next, &buf, 1.0);
            prefix.push(next);
        }
        Ok(prefix)
    }

    /// Adds the contribution of time index `j`.
    pub fn accumulate(&mut self, j: usize, a: &VectorPotentialState, phi: &FourierField, dtphi: &FourierField) -> Result<()> {
        if j >= self.times.len() || (a.t - self.times[j]).abs() > 1e-9 {
            return Err(Error::TimeMismatch { bank: a.t, requested: self.times[j.min(self.times.len() - 1)] });
        }
        let w = self.weights[j];
        if w == 0.0 {
            return Ok(());
        }
        let m = self.transform.size();
        let ra = self.radius_a;
        let rp = self.radius_phi;
        let ka = dyadic_blocks(ra);
        let kp = dyadic_blocks(rp);
        let fit = |f: &FourierField, r: usize| f.resized(r);
        let a_fields = [&a.dta[0], &a.a[0], &a.a[1], &a.a[2]].map(|f| fit(f, ra));
        let a_prefix: Vec<Vec<Grid>> = a_fields.iter().map(|f| self.block_prefix(f, &ka)).collect::<Result<_>>()?;
        let (phi, dtphi) = (fit(phi, rp), fit(dtphi, rp));
        let zero = || vec![Complex64::new(0.0, 0.0); m * m];
        // per kind: temporal term, A^1 term, A^2 term
        let mut prods: Vec<[Grid; 3]> = (0..3).map(|_| [zero(), zero(), zero()]).collect();
        let mut pl = Vec::new();
        let mut dpl = Vec::new();
        for &l in &kp {
            self.transform.synthesize_into(&phi.weighted(|q| block_weight(q, l)), &mut pl)?;
            self.transform.synthesize_into(&dtphi.weighted(|q| block_weight(q, l)), &mut dpl)?;
            for (kind_ix, kind) in ParaKind::ALL.into_iter().enumerate() {
                let admitted: Vec<usize> = (0..ka.len()).filter(|&i| kind.admits(self.threshold, ka[i], l)).collect();
                let (Some(&lo), Some(&hi)) = (admitted.first(), admitted.last()) else { continue };
                debug_assert_eq!(hi - lo + 1, admitted.len());
                let low = |f: usize, x: usize| a_prefix[f][hi + 1][x] - a_prefix[f][lo][x];
                let [pt, p1, p2] = &mut prods[kind_ix];
                for x in 0..m * m {
                    pt[x] += low(0, x) * pl[x] + low(1, x) * dpl[x];
                    p1[x] += low(2, x) * pl[x];
                    p2[x] += low(3, x) * pl[x];
                }
            }
        }
        let r = ra + rp;
        let big_t = *self.times.last().unwrap();
        let lag = big_t - self.times[j];
        for (kind_ix, [pt, p1, p2]) in prods.iter_mut().enumerate() {
            let gt = self.transform.analyze(pt, r, false)?;
            let g1 = self.transform.analyze(p1, r, false)?;
            let g2 = self.transform.analyze(p2, r, false)?;
            let out = &mut self.out[kind_ix];
            let c = -self.h * w;
            for (i, o) in out.coeffs_mut().iter_mut().enumerate() {
                let k = gt.mode_at(i);
                let g =
                    gt.coeffs()[i] + Complex64::new(0.0, k[0] as f64) * g1.coeffs()[i] + Complex64::new(0.0, k[1] as f64) * g2.coeffs()[i];
                let om = mode_norm(k);
                let kern = if om == 0.0 { lag } else { (om * lag).sin() / om };
                *o += g * (c * kern);
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Vec<ProbeResult> {
        ParaKind::ALL
            .into_iter()
            .zip(self.out)
            .map(|(kind, field)| {
                let blocks = lp_profile(&field).entries;
                let (lo, hi) = self.window;
                let profile = profile_from_entries(blocks.iter().filter(|b| b.0 >= lo && b.0 <= hi).copied().collect());
                let exponent = profile.fitted_slope.map(|s| -s);
                ProbeResult { kind, blocks, profile, exponent, field }
            })
            .collect()
    }
}

/// Probe over precomputed trajectories sampled at `times`, fitting blocks `window.0 <= K <= window.1`.
pub fn smoothing_probe(
    potential: &[VectorPotentialState],
    phi: &[(FourierField, FourierField)],
    times: &[f64],
    threshold: Threshold,
    rule: Rule,
    window: (u64, u64),
) -> Result<Vec<ProbeResult>> {
    if potential.len() != times.len() || phi.len() != times.len() {
        return Err(Error::InvalidArgument("one state per time required".into()));
    }
    let ra = potential.iter().map(|a| a.radius()).max().unwrap_or(0);
    let rp = phi.iter().map(|p| p.0.radius().max(p.1.radius())).max().unwrap_or(0);
    let mut probe = SmoothingProbe::new(times, ra, rp, threshold, rule)?.with_fit_window(window.0, window.1);
    for (j, (a, (p, dp))) in potential.iter().zip(phi).enumerate() {
        probe.accumulate(j, a, p, dp)?;
    }
    Ok(probe.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::sample_a;
    use crate::noise::{Channel, ModeDriverBank};
    use crate::scalar::{duhamel, sample_z};
    use crate::spectral::dealiased_product;

    fn trajectories(n: u64, times: &[f64]) -> (Vec<VectorPotentialState>, Vec<(FourierField, FourierField)>) {
        let r = crate::scalar::support_radius(n);
        let mut w1 = ModeDriverBank::new(Channel::W1, Some(n), r, 4);
        let mut w2 = ModeDriverBank::new(Channel::W2, Some(n), r, 4);
        let mut z = ModeDriverBank::new(Channel::Z, Some(n), r, 4);
        let mut a = Vec::new();
        let mut p = Vec::new();
        for &t in times {
            w1.advance_to(t).unwrap();
            w2.advance_to(t).unwrap();
            z.advance_to(t).unwrap();
            a.push(sample_a([&w1, &w2], n, t, r).unwrap());
            p.push(sample_z(&z, Some(n), t, r).unwrap());
        }
        (a, p)
    }

    #[test]
    fn kinds_sum_to_full_duhamel_term() {
        let times: Vec<f64> = (0..=8).map(|i| i as f64 / 16.0).collect();
        let (a, p) = trajectories(4, &times);
        let res = smoothing_probe(&a, &p, &times, Threshold::DESK, Rule::Simpson, (1, u64::MAX)).unwrap();
        let total = res.iter().fold(FourierField::zeros(res[0].field.radius(), false), |acc, r| &acc + &r.field);
        let g: Vec<FourierField> = a
            .iter()
            .zip(&p)
            .map(|(s, (phi, dphi))| {
                let t = &dealiased_product(&s.dta[0], phi) + &dealiased_product(&s.a[0], dphi);
                let x = dealiased_product(&s.a[1], phi).derivative(0);
                let y = dealiased_product(&s.a[2], phi).derivative(1);
                &(&t + &x) + &y
            })
            .collect();
        let want = duhamel(&g, &times, Rule::Simpson).unwrap().pop().unwrap();
        // the oracle products are kept on the operand box only
        let total = total.resized(want.radius());
        assert!(total.max_abs_diff(&want) < 1e-10 * want.max_abs().max(1.0), "{}", total.max_abs_diff(&want));
    }

    #[test]
    fn zero_potential_gives_zero() {
        let times: Vec<f64> = (0..=4).map(|i| i as f64 / 8.0).collect();
        let (a, p) = trajectories(4, &times);
        let a: Vec<_> = a.iter().map(|s| VectorPotentialState::zero(s.radius(), s.n, s.t)).collect();
        let res = smoothing_probe(&a, &p, &times, Threshold::DESK, Rule::Simpson, (1, u64::MAX)).unwrap();
        for r in res {
            assert_eq!(r.field.max_abs(), 0.0);
            assert!(r.profile.is_degenerate() && r.exponent.is_none());
        }
    }
}
