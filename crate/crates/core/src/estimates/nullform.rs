//! The null form `Q12`, the Leray projection identity, and the variance of
//! `X_N = ∫∫ ψ Im Q12(P_{≤N} z, conj P_{≤N} z)` for `ψ = χ(t) e^{i<m,x>}`.
//!
//! In Fourier variables
//!
//! ```text
//! X_N = -i (2π)² ∫ χ(t) Σ_k c_k z(t,k) conj z(t,k+m) dt,
//! c_k = ρ_{≤N}(k) ρ_{≤N}(k+m) (k1 m2 - k2 m1),
//! ```
//!
//! and Wick's theorem leaves a single pairing, so
//! `Var X_N = (2π)⁴ Σ_k c_k² ∬ χ χ' C(|k|) C(|k+m|)` with `C` the covariance of `z`.
//! The double integral runs over the same quadrature nodes used by the
//! Monte Carlo sampler, so the two agree exactly in expectation.

use crate::error::{Error, Result};
use crate::noise::{seed_derive, stream};
use crate::quadrature::GaussLegendre;
use crate::spectral::{dealiased_product, lp_weight, mode_norm, mode_norm_sq, FourierField, Mode, AREA};
use crate::stats::variance_sum_with_jackknife;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::zcov::cov_z_diag;

/// `∂1 f ∂2 g - ∂2 f ∂1 g`.
pub fn q12(f: &FourierField, g: &FourierField) -> FourierField {
    let a = dealiased_product(&f.derivative(0), &g.derivative(1));
    let b = dealiased_product(&f.derivative(1), &g.derivative(0));
    &a - &b
}

/// Pointwise imaginary part.
pub fn im_part(f: &FourierField) -> FourierField {
    let c = f.conj();
    (f - &c).scale_complex(Complex64::new(0.0, -0.5)).with_hermitian(true)
}

pub fn leray(v: [&FourierField; 2]) -> [FourierField; 2] {
    let r = v[0].radius().max(v[1].radius());
    let (a, b) = (v[0].resized(r), v[1].resized(r));
    let herm = a.is_hermitian() && b.is_hermitian();
    let mut out = [FourierField::zeros(r, herm), FourierField::zeros(r, herm)];
    for k in a.modes().collect::<Vec<_>>() {
        let (x, y) = (a.get(k), b.get(k));
        let n2 = mode_norm_sq(k) as f64;
        if n2 == 0.0 {
            out[0].set(k, x);
            out[1].set(k, y);
            continue;
        }
        let dot = (x * k[0] as f64 + y * k[1] as f64) / n2;
        out[0].set(k, x - dot * k[0] as f64);
        out[1].set(k, y - dot * k[1] as f64);
    }
    out
}

/// Max-norm defect of
/// `P Im(φ ∂_j conj φ) = mean - Δ^{-1} ∂_k Im Q_jk(φ, conj φ)` over `j = 1, 2`.
pub fn null_identity_residual(phi: &FourierField) -> f64 {
    let bar = phi.conj();
    let currents = [0, 1].map(|j| im_part(&dealiased_product(phi, &bar.derivative(j))));
    let lhs = leray([&currents[0], &currents[1]]);
    let q = im_part(&q12(phi, &bar));
    // Q_11 = Q_22 = 0 and Q_21 = -Q_12
    let rhs = [(1, 1.0), (0, -1.0)].map(|(axis, sign)| {
        let dq = q.derivative(axis).scale(sign);

        dq.map(true, |k, c| {
            let n2 = mode_norm_sq(k);
            if n2 == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                c / n2 as f64
            }
        })
    });
    (0..2)
        .map(|j| {
            let mut r = rhs[j].resized(lhs[j].radius().max(rhs[j].radius()));
            let mean = currents[j].get([0, 0]);
            let lj = lhs[j].resized(r.radius());
            r.set([0, 0], mean);
            lj.max_abs_diff(&r)
        })
        .fold(0.0, f64::max)
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

/// Breakpoints `[2^-8, 2^-7, 2^-6, 2^-5] · scale / |m|` of the time cutoff.
pub fn chi_breakpoints(m: Mode, scale: f64) -> [f64; 4] {
    let s = scale / mode_norm(m);
    [-8, -7, -6, -5].map(|e| s * 2f64.powi(e))
}

/// Time cutoff with plateau `[2^-7, 2^-6]/|m|`, stretched by `scale`.
pub fn chi_scaled(m: Mode, t: f64, scale: f64) -> f64 {
    let [a0, a1, a2, a3] = chi_breakpoints(m, scale);
    if t <= a0 || t >= a3 {
        0.0
    } else if t < a1 {
        smoothstep((t - a0) / (a1 - a0))
    } else if t <= a2 {
        1.0
    } else {
        1.0 - smoothstep((t - a2) / (a3 - a2))
    }
}

pub fn chi_cutoff(m: Mode, t: f64) -> f64 {
    chi_scaled(m, t, 1.0)
}

/// Default node count over `supp χ`: at least `8 (2N/|m|) 2^-5 + 64`, and at
/// least 16 nodes per period of the fastest product `|k| + |k+m|`.
pub fn default_quad_pts(m: Mode, n: u64, scale: f64) -> usize {
    let b = chi_breakpoints(m, scale);
    let floor = (8.0 * (2.0 * n as f64 / mode_norm(m)) * 2f64.powi(-5)).ceil() as usize + 64;
    let top = 2.0 * (9 * n) as f64 / 8.0 + mode_norm(m);
    let periods = top * (b[3] - b[0]) / std::f64::consts::TAU;
    floor.max((16.0 * periods).ceil() as usize + 64)
}

/// Composite 8-point Gauss-Legendre nodes `(t, weight · χ(t))`, with panel
/// edges at the breakpoints of `χ`, ascending in `t`.
pub fn window_nodes(m: Mode, scale: f64, quad_pts: usize) -> Vec<(f64, f64)> {
    let b = chi_breakpoints(m, scale);
    let panels = quad_pts.div_ceil(8).max(3);
    let len = b[3] - b[0];
    let mut counts = [0usize; 3];
    for i in 0..3 {
        counts[i] = (((b[i + 1] - b[i]) / len) * panels as f64).round().max(1.0) as usize;
    }
    let q = GaussLegendre::new(8);
    let mut out = Vec::with_capacity(8 * counts.iter().sum::<usize>());
    for i in 0..3 {
        let h = (b[i + 1] - b[i]) / counts[i] as f64;
        for p in 0..counts[i] {
            let lo = b[i] + p as f64 * h;
            let mut panel: Vec<(f64, f64)> = q.on(lo, lo + h).collect();
            panel.sort_by(|x, y| x.0.total_cmp(&y.0));
            out.extend(panel.into_iter().map(|(t, w)| (t, w * chi_scaled(m, t, scale))));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    /// `∫∫ ψ Im Q12`
    NullForm,
    /// `∫∫ ∂_{3-j} ψ Im(z ∂_j conj z)` for `j ∈ {1, 2}`
    Gradient(u8),
}

impl Functional {
    /// Coefficient of `(2π)² ∫ χ z(k) conj z(k+m)` in the functional, without the cutoffs.
    fn coefficient(self, k: Mode, m: Mode) -> Complex64 {
        match self {
            Functional::NullForm => Complex64::new(0.0, -((k[0] * m[1] - k[1] * m[0]) as f64)),
            Functional::Gradient(j) => {
                let j = (j - 1) as usize;
                let mo = m[1 - j] as f64;
                Complex64::new(0.0, -mo * (2 * k[j] + m[j]) as f64 / 2.0)
            }
        }
    }
}

/// `(2π)² Σ_k coefficient(k) f(k) conj f(k+m)`: the spatial integral of the functional at one time.
pub fn spatial_pairing(functional: Functional, f: &FourierField, m: Mode) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, v) in f.iter() {
        let q = [k[0] + m[0], k[1] + m[1]];
        if f.contains(q) {
            acc += functional.coefficient(k, m) * v * f.get(q).conj();
        }
    }
    acc * AREA
}

/// Modes `k` with `c_k ≠ 0` as `(k, index of k+m, weight ρ(k)ρ(k+m))`, indexed into `support`.
struct Pairing {
    support: Vec<Mode>,
    pairs: Vec<(usize, usize, f64)>,
}

impl Pairing {
    fn new(m: Mode, n: u64) -> Self {
        let r = ((9 * n) / 8 + 1) as i64;
        let mut support = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                if (a, b) != (0, 0) && lp_weight([a, b], n) > 0.0 {
                    support.push([a, b]);
                }
            }
        }
        let side = 2 * r + 1;
        let mut lookup = vec![usize::MAX; (side * side) as usize];
        for (i, k) in support.iter().enumerate() {
            lookup[((k[0] + r) * side + k[1] + r) as usize] = i;
        }
        let index = |k: Mode| {
            if k[0].abs() > r || k[1].abs() > r {
                return None;
            }
            Some(lookup[((k[0] + r) * side + k[1] + r) as usize]).filter(|&i| i != usize::MAX)
        };
        let mut pairs = Vec::new();
        for (i, &k) in support.iter().enumerate() {
            if k[0] * m[1] == k[1] * m[0] {
                continue;
            }
            if let Some(j) = index([k[0] + m[0], k[1] + m[1]]) {
                pairs.push((i, j, lp_weight(k, n) * lp_weight(support[j], n)));
            }
        }
        Pairing { support, pairs }
    }
}

fn pair_time_integral(w: f64, v: f64, nodes: &[(f64, f64)]) -> f64 {
    // for t <= t': C(w; t, t') = a(t) cos(w t') + b(t) sin(w t')
    let mut acc = [0.0; 4];
    let (mut diag, mut off) = (0.0, 0.0);
    for &(t, u) in nodes {
        let (sw, cw) = (w * t).sin_cos();
        let (sv, cv) = (v * t).sin_cos();
        let g = [cw * cv, cw * sv, sw * cv, sw * sv];
        off += u * (0..4).map(|p| acc[p] * g[p]).sum::<f64>();
        diag += u * u * cov_z_diag(w, t, t) * cov_z_diag(v, t, t);
        let aw = t * cw / (2.0 * w * w) - sw / (2.0 * w.powi(3));
        let bw = t * sw / (2.0 * w * w);
        let av = t * cv / (2.0 * v * v) - sv / (2.0 * v.powi(3));
        let bv = t * sv / (2.0 * v * v);
        let f = [aw * av, aw * bv, bw * av, bw * bv];
        for p in 0..4 {
            acc[p] += u * f[p];
        }
    }
    diag + 2.0 * off
}

/// Exact variance at the given `(t, weight · χ)` nodes.
pub fn variance_on_nodes(functional: Functional, m: Mode, n: u64, nodes: &[(f64, f64)]) -> f64 {
    let p = Pairing::new(m, n);
    // the time integral depends on k only through (|k|², |k+m|²)
    let mut groups: std::collections::BTreeMap<(i64, i64), f64> = Default::default();
    for &(i, j, rr) in &p.pairs {
        let (k, q) = (p.support[i], p.support[j]);
        let c2 = (functional.coefficient(k, m) * rr).norm_sqr();
        if c2 > 0.0 {
            *groups.entry((mode_norm_sq(k), mode_norm_sq(q))).or_default() += c2;
        }
    }
    let groups: Vec<_> = groups.into_iter().collect();
    let total: f64 = groups.par_iter().map(|&((a, b), c2)| c2 * pair_time_integral((a as f64).sqrt(), (b as f64).sqrt(), nodes)).sum();
    AREA * AREA * total
}

/// Relative change tolerated when the node count is doubled.
pub const QUADRATURE_TOL: f64 = 1e-3;

pub fn functional_variance_closed(functional: Functional, m: Mode, n: u64, quad_pts: usize, scale: f64) -> Result<f64> {
    if m == [0, 0] {
        return Err(Error::ZeroMode);
    }
    if quad_pts < 64 {
        return Err(Error::InvalidArgument(format!("quad_pts = {quad_pts} < 64")));
    }
    let coarse = variance_on_nodes(functional, m, n, &window_nodes(m, scale, quad_pts));
    let fine = variance_on_nodes(functional, m, n, &window_nodes(m, scale, 2 * quad_pts));
    if (fine - coarse).abs() > QUADRATURE_TOL * fine.abs() {
        return Err(Error::QuadratureNotConverged { coarse, fine });
    }
    Ok(coarse)
}

pub fn nullform_variance_closed(m: Mode, n: u64, quad_pts: usize, scale: f64) -> Result<f64> {
    functional_variance_closed(Functional::NullForm, m, n, quad_pts, scale)
}

/// Exact joint sampler of `z(t_i, k)` at increasing nodes `t_i`.
struct NodeSampler {
    omega: Vec<f64>,
    /// per distinct frequency and step: Cholesky `[l00, l10, l11]`, rotation `(cos, sin)(w t_{i-1})`,
    /// output phase `(sin, cos)(w t_i)`
    steps: Vec<Vec<[f64; 7]>>,
    class: Vec<usize>,
}

impl NodeSampler {
    fn new(support: &[Mode], times: &[f64]) -> Result<Self> {
        let mut norms: Vec<i64> = support.iter().map(|&k| mode_norm_sq(k)).collect();
        norms.sort_unstable();
        norms.dedup();
        let class = support.iter().map(|&k| norms.binary_search(&mode_norm_sq(k)).unwrap()).collect();
        let mut steps = Vec::with_capacity(norms.len());
        let mut omega = Vec::with_capacity(norms.len());
        for &n2 in &norms {
            let w = (n2 as f64).sqrt();
            omega.push(w);
            let mut prev = 0.0;
            let mut row = Vec::with_capacity(times.len());
            for &t in times {
                let dt = t - prev;
                if dt <= 0.0 {
                    return Err(Error::NonPositiveStep(dt));
                }
                let g = crate::noise::gram::local_gram(w, dt);
                // (cos w u, sin w u) = (b0 - b2, b1) in the local basis
                let gcc = g[0][0] - 2.0 * g[2][0] + g[2][2];
                let gsc = g[1][0] - g[2][1];
                let gss = g[1][1];
                let l00 = gcc.sqrt();
                let l10 = gsc / l00;
                let piv = gss - l10 * l10;
                if !(piv > 0.0) {
                    return Err(Error::CholeskyFailure { norm_sq: n2, pivot: piv });
                }
                let (s0, c0) = (w * prev).sin_cos();
                let (s1, c1) = (w * t).sin_cos();
                row.push([l00, l10, piv.sqrt(), c0, s0, s1, c1]);
                prev = t;
            }
            steps.push(row);
        }
        Ok(NodeSampler { omega, steps, class })
    }

    /// Fills `out[idx * nodes + i]` with `z(t_i, support[idx])`.
    fn sample(&self, rng: &mut impl Rng, out: &mut [Complex64]) {
        let nodes = self.steps.first().map_or(0, |s| s.len());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut normal = || Complex64::new(rng.sample::<f64, _>(StandardNormal) * h, rng.sample::<f64, _>(StandardNormal) * h);
        for (idx, &c) in self.class.iter().enumerate() {
            let w = self.omega[c];
            let (mut ic, mut is) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for (i, s) in self.steps[c].iter().enumerate() {
                let (x1, x2) = (normal(), normal());
                let j1 = x1 * s[0];
                let j2 = x1 * s[1] + x2 * s[2];
                ic += j1 * s[3] - j2 * s[4];
                is += j1 * s[4] + j2 * s[3];
                out[idx * nodes + i] = (ic * s[5] - is * s[6]) / w;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexMc {
    pub samples: usize,
    pub mean_re: f64,
    pub mean_im: f64,
    pub stderr_re: f64,
    pub stderr_im: f64,
    /// `E|X - EX|²`
    pub variance: f64,
    pub variance_stderr: f64,
}

impl ComplexMc {
    fn of(values: &[Complex64]) -> Result<Self> {
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let (variance, variance_stderr) = variance_sum_with_jackknife(&[&re, &im])?;
        let (vr, _) = variance_sum_with_jackknife(&[&re])?;
        let (vi, _) = variance_sum_with_jackknife(&[&im])?;
        let n = values.len() as f64;
        Ok(ComplexMc {
            samples: values.len(),
            mean_re: re.iter().sum::<f64>() / n,
            mean_im: im.iter().sum::<f64>() / n,
            stderr_re: (vr / n).sqrt(),
            stderr_im: (vi / n).sqrt(),
            variance,
            variance_stderr,
        })
    }

    /// Largest `|mean| / stderr` over real and imaginary parts; zero-variance parts count as 0.
    pub fn mean_z_score(&self) -> f64 {
        let z = |m: f64, s: f64| {
            if s > 0.0 {
                m.abs() / s
            } else if m == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        };
        z(self.mean_re, self.stderr_re).max(z(self.mean_im, self.stderr_im))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullformMc {
    pub null_form: ComplexMc,
    pub gradient: [ComplexMc; 2],
    /// max over samples of `|(-G1 + G2) + X| / max(1, |X|)`
    pub identity_defect: f64,
}

/// Monte Carlo of the null-form and gradient functionals on shared paths.
pub fn functionals_mc(m: Mode, n: u64, samples: usize, seed: u64, nodes: &[(f64, f64)]) -> Result<NullformMc> {
    if m == [0, 0] {
        return Err(Error::ZeroMode);
    }
    if samples < 3 {
        return Err(Error::InsufficientSamples { what: "nullform_mc", needed: 3, got: samples });
    }
    let p = Pairing::new(m, n);
    let times: Vec<f64> = nodes.iter().map(|x| x.0).collect();
    let sampler = NodeSampler::new(&p.support, &times)?;
    let coef: Vec<[Complex64; 3]> = p
        .pairs
        .iter()
        .map(|&(i, _, rr)| {
            let k = p.support[i];
            [Functional::NullForm, Functional::Gradient(1), Functional::Gradient(2)].map(|f| f.coefficient(k, m) * rr * AREA)
        })
        .collect();
    let modes = p.support.len();
    let weights: Vec<f64> = nodes.iter().map(|x| x.1).collect();
    let values: Vec<[Complex64; 3]> = (0..samples)
        .into_par_iter()
        .map_init(
            || vec![Complex64::new(0.0, 0.0); modes * nodes.len()],
            |z, s| {
                let key = seed_derive(seed, &["nullform".into(), m[0].into(), m[1].into(), n.into(), s.into()]);
                sampler.sample(&mut stream(key), z);
                let mut acc = [Complex64::new(0.0, 0.0); 3];
                let len = nodes.len();
                for (&(a, b, _), c) in p.pairs.iter().zip(&coef) {
                    let (za, zb) = (&z[a * len..(a + 1) * len], &z[b * len..(b + 1) * len]);
                    let mut inner = Complex64::new(0.0, 0.0);
                    for ((x, y), u) in za.iter().zip(zb).zip(&weights) {
                        inner += x * y.conj() * u;
                    }
                    for f in 0..3 {
                        acc[f] += c[f] * inner;
                    }
                }
                acc
            },
        )
        .collect();
    let pick = |f: usize| values.iter().map(|v| v[f]).collect::<Vec<_>>();
    let identity_defect = values.iter().map(|v| (v[2] - v[1] + v[0]).norm() / v[0].norm().max(1.0)).fold(0.0, f64::max);
    Ok(NullformMc { null_form: ComplexMc::of(&pick(0))?, gradient: [ComplexMc::of(&pick(1))?, ComplexMc::of(&pick(2))?], identity_defect })
}

pub fn nullform_variance_mc(m: Mode, n: u64, samples: usize, seed: u64, quad_pts: usize, scale: f64) -> Result<ComplexMc> {
    Ok(functionals_mc(m, n, samples, seed, &window_nodes(m, scale, quad_pts))?.null_form)
}

pub fn gradient_functional_variance(m: Mode, n: u64, j: u8, samples: usize, seed: u64, quad_pts: usize, scale: f64) -> Result<ComplexMc> {
    if !(1..=2).contains(&j) {
        return Err(Error::InvalidArgument(format!("gradient index {j} not in {{1, 2}}")));
    }
    Ok(functionals_mc(m, n, samples, seed, &window_nodes(m, scale, quad_pts))?.gradient[j as usize - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_field(r: usize, seed: u64) -> FourierField {
        let mut rng = stream(seed);
        FourierField::from_fn(r, false, |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn q12_examples() {
        let f = random_field(5, 1);
        assert!(q12(&f, &f).max_abs() < 1e-12);
        let g = random_field(5, 2);
        assert!((&q12(&f, &g) + &q12(&g, &f)).max_abs() < 1e-12);
        let e1 = FourierField::single_mode(1, [1, 0], Complex64::new(1.0, 0.0));
        let e2 = FourierField::single_mode(1, [0, 1], Complex64::new(1.0, 0.0));
        let q = q12(&e1, &e2);
        for k in q.modes() {
            let want = if k == [1, 1] { -1.0 } else { 0.0 };
            assert!((q.get(k) - want).norm() < 1e-14, "{k:?}");
        }
    }

    #[test]
    fn leray_is_divergence_free_projection() {
        let v = [random_field(6, 3), random_field(6, 4)];
        let p = leray([&v[0], &v[1]]);
        let div = &p[0].derivative(0) + &p[1].derivative(1);
        assert!(div.max_abs() < 1e-13);
        let pp = leray([&p[0], &p[1]]);
        assert!(pp[0].max_abs_diff(&p[0]) < 1e-14 && pp[1].max_abs_diff(&p[1]) < 1e-14);
        assert_eq!(p[0].get([0, 0]), v[0].get([0, 0]));
    }

    #[test]
    fn identity_holds() {
        for s in 0..4 {
            let phi = random_field(6, 10 + s);
            let r = null_identity_residual(&phi);
            assert!(r < 1e-10, "residual {r}");
        }
    }

    #[test]
    fn chi_examples() {
        let m = [1, 0];
        assert_eq!(chi_cutoff(m, 2f64.powi(-7)), 1.0);
        assert_eq!(chi_cutoff(m, 0.0), 0.0);
        let v = chi_cutoff(m, 1.5 * 2f64.powi(-8));
        assert!((v - 0.5).abs() < 1e-12);
        assert_eq!(chi_cutoff([3, 4], 2f64.powi(-5) / 5.0), 0.0);
    }

    #[test]
    fn nodes_integrate_chi() {
        let m = [1, 0];
        let nodes = window_nodes(m, 32.0, 128);
        assert!(nodes.windows(2).all(|w| w[0].0 < w[1].0));
        // ∫χ = plateau + half of each transition for a symmetric smoothstep
        let b = chi_breakpoints(m, 32.0);
        let exact = (b[2] - b[1]) + 0.5 * (b[1] - b[0]) + 0.5 * (b[3] - b[2]);
        let got: f64 = nodes.iter().map(|x| x.1).sum();
        assert!((got - exact).abs() < 1e-13);
    }

    #[test]
    fn zero_window_zero_variance() {
        let nodes: Vec<(f64, f64)> = window_nodes([1, 0], 32.0, 64).into_iter().map(|(t, _)| (t, 0.0)).collect();
        assert_eq!(variance_on_nodes(Functional::NullForm, [1, 0], 8, &nodes), 0.0);
    }

    #[test]
    fn separable_sum_matches_direct_double_sum() {
        let nodes = window_nodes([1, 0], 32.0, 64);
        let (w, v) = (5f64.sqrt(), 2f64.sqrt());
        let mut direct = 0.0;
        for &(t, u) in &nodes {
            for &(s, x) in &nodes {
                direct += u * x * cov_z_diag(w, t, s) * cov_z_diag(v, t, s);
            }
        }
        let fast = pair_time_integral(w, v, &nodes);
        assert!((fast - direct).abs() < 1e-12 * direct.abs(), "{fast} {direct}");
    }
}

#[cfg(test)]
mod sampler_tests {
    use super::*;

    #[test]
    fn node_sampler_matches_z_covariance() {
        let support = vec![[1, 0], [3, 4]];
        let times = [0.1, 0.5, 0.9, 3.0];
        let s = NodeSampler::new(&support, &times).unwrap();
        let mut rng = stream(5);
        let mut z = vec![Complex64::new(0.0, 0.0); 8];
        let samples = 40000;
        let mut acc = vec![Complex64::new(0.0, 0.0); 2 * 16];
        for _ in 0..samples {
            s.sample(&mut rng, &mut z);
            for idx in 0..2 {
                for i in 0..4 {
                    for j in 0..4 {
                        acc[idx * 16 + i * 4 + j] += z[idx * 4 + i] * z[idx * 4 + j].conj();
                    }
                }
            }
        }
        for (idx, k) in support.iter().enumerate() {
            for i in 0..4 {
                for j in 0..4 {
                    let want = cov_z_diag(mode_norm(*k), times[i], times[j]);
                    let got = acc[idx * 16 + i * 4 + j] / samples as f64;
                    let scale = (cov_z_diag(mode_norm(*k), times[i], times[i]) * cov_z_diag(mode_norm(*k), times[j], times[j])).sqrt();
                    assert!((got - want).norm() < 0.03 * scale, "{k:?} {i} {j}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn pairing_matches_physical_space() {
        let f = {
            let mut rng = stream(9);
            FourierField::from_fn(5, false, |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        };
        let bar = f.conj();
        for m in [[1, 0], [1, 2], [-2, 1]] {
            let minus = [-m[0], -m[1]];
            let x = im_part(&q12(&f, &bar)).get(minus) * AREA;
            assert!((spatial_pairing(Functional::NullForm, &f, m) - x).norm() < 1e-12 * x.norm().max(1.0));
            let mut div_free = Complex64::new(0.0, 0.0);
            for j in 1..=2u8 {
                let cur = im_part(&dealiased_product(&f, &bar.derivative(j as usize - 1)));
                let dpsi = Complex64::new(0.0, m[2 - j as usize] as f64);
                let g = cur.get(minus) * AREA * dpsi;
                assert!((spatial_pairing(Functional::Gradient(j), &f, m) - g).norm() < 1e-12 * g.norm().max(1.0));
                div_free += if j == 1 { -g } else { g };
            }
            // the divergence-free pairing is minus the null-form functional
            assert!((div_free + x).norm() < 1e-12 * x.norm().max(1.0));
        }
    }

    #[test]
    fn mc_identity_for_oblique_m() {
        let m = [1, 2];
        let nodes = window_nodes(m, 32.0, 64);
        let r = functionals_mc(m, 8, 20, 3, &nodes).unwrap();
        assert!(r.identity_defect < 1e-8, "{}", r.identity_defect);
        assert!(r.gradient[0].variance > 0.0 && r.gradient[1].variance > 0.0);
    }
}
