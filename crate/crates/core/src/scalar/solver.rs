//! Exponential midpoint integrator for the scalar field.
//!
//! With `phi = z + w`, `z` sampled exactly from the `Z` bank, and
//! `v = d_t w - 2i A^0 phi`, the equation becomes the first-order system
//!
//! ```text
//! w' = v + 2i A^0 phi
//! v' = Lap w + 2i d_a (A^a phi) - (|A|^2 - m^2) phi
//! ```
//!
//! whose linear part is rotated exactly per mode. The forcing is evaluated
//! once per step at the midpoint, from a predictor that reuses the previous
//! midpoint forcing. Several truncations advance in lockstep on one noise path.

use super::propagator::Rotation;
use super::zfield::sample_z;
use crate::error::{Error, Result};
use crate::gauge::{mass_squared, sample_a, VectorPotentialState};
use crate::noise::{Channel, ModeDriverBank};
use crate::spectral::{fast_size, lp_weight, mode_norm, pair_norm, FourierField, Transform};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Largest `|k|_inf` with `rho_{<=n}(k) > 0`.
pub fn support_radius(n: u64) -> usize {
    ((9 * n - 1) / 8) as usize
}

pub trait PotentialSupplier {
    /// Truncation of the supplied potential; `None` means `A = 0`.
    fn truncation(&self) -> Option<u64>;
    /// Requested times are nondecreasing.
    fn potential(&mut self, t: f64) -> Result<Option<VectorPotentialState>>;
}

/// `A = 0` and no mass counterterm.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreeField;

impl PotentialSupplier for FreeField {
    fn truncation(&self) -> Option<u64> {
        None
    }
    fn potential(&mut self, _t: f64) -> Result<Option<VectorPotentialState>> {
        Ok(None)
    }
}

/// Potential sampled from a pair of driver banks truncated at `n`.
#[derive(Clone, Debug)]
pub struct SampledPotential {
    banks: [ModeDriverBank; 2],
    n: u64,
}

impl SampledPotential {
    pub fn new(n: u64, seed: u64, resolution: Option<f64>) -> Self {
        let r = support_radius(n);
        let mk = |c| {
            let b = ModeDriverBank::new(c, Some(n), r, seed);
            match resolution {
                Some(h) => b.with_resolution(h),
                None => b,
            }
        };
        SampledPotential { banks: [mk(Channel::W1), mk(Channel::W2)], n }
    }

    pub fn banks(&self) -> &[ModeDriverBank; 2] {
        &self.banks
    }
}

impl PotentialSupplier for SampledPotential {
    fn truncation(&self) -> Option<u64> {
        Some(self.n)
    }
    fn potential(&mut self, t: f64) -> Result<Option<VectorPotentialState>> {
        for b in &mut self.banks {
            b.advance_to(t)?;
        }
        let t = self.banks[0].time();
        sample_a([&self.banks[0], &self.banks[1]], self.n, t, support_radius(self.n)).map(Some)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalarState {
    pub phi: FourierField,
    pub dtphi: FourierField,
    pub t: f64,
    pub n: u64,
}

impl ScalarState {
    /// `sum |d_t phi|^2 + |k|^2 |phi|^2`.
    pub fn free_energy(&self) -> f64 {
        self.phi.iter().zip(self.dtphi.coeffs()).map(|((k, p), d)| d.norm_sqr() + mode_norm(k).powi(2) * p.norm_sqr()).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSpec {
    /// Truncations advanced together; the potential must be truncated at the largest.
    pub levels: Vec<u64>,
    pub radius: usize,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    /// Forcing evaluations per step (1 = predictor from the previous step only).
    pub corrector_evals: usize,
}

impl SolveSpec {
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > 0.0) {
            return Err(Error::NonPositiveStep(self.dt));
        }
        let n = (self.t_end / self.dt).round();
        if (n * self.dt - self.t_end).abs() > 1e-9 * self.t_end.max(1.0) {
            return Err(Error::InvalidArgument(format!("t_end {} is not a multiple of dt {}", self.t_end, self.dt)));
        }
        Ok(n as usize)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub max_lorenz_residual: f64,
    /// Steps with `||A||_inf dt > 0.5`.
    pub cfl_warnings: usize,
    pub max_potential: f64,
}

struct Level {
    n: u64,
    // rho_{<=n} on the box of support_radius(n)
    weights: Vec<f64>,
    transform: Transform,
    w: FourierField,
    v: FourierField,
    prev: (FourierField, FourierField),
}

#[derive(Default)]
struct Workspace {
    phi: Vec<Complex64>,
    a0: Vec<Complex64>,
    a12: Vec<Complex64>,
    p1: Vec<Complex64>,
    p2: Vec<Complex64>,
    q: Vec<Complex64>,
}

pub struct CoupledSolver {
    spec: SolveSpec,
    supplier: Box<dyn PotentialSupplier>,
    z: Option<ModeDriverBank>,
    levels: Vec<Level>,
    half: Vec<Rotation>,
    full: Vec<Rotation>,
    step: usize,
    steps: usize,
    work: Workspace,
    pub diagnostics: Diagnostics,
}

fn apply(rot: &[Rotation], w: &mut FourierField, v: &mut FourierField, nw: &FourierField, nv: &FourierField) {
    let (wc, vc) = (w.coeffs_mut(), v.coeffs_mut());
    for i in 0..rot.len() {
        let (r, p) = (rot[i].r, rot[i].phi);
        let (a, b) = (wc[i], vc[i]);
        let (x, y) = (nw.coeffs()[i], nv.coeffs()[i]);
        wc[i] = a * r[0] + b * r[1] + x * p[0] + y * p[1];
        vc[i] = a * r[2] + b * r[3] + x * p[2] + y * p[3];
    }
}

fn rotations(radius: usize, tau: f64) -> Vec<Rotation> {
    let f = FourierField::zeros(radius, false);
    f.modes().map(|k| Rotation::new(mode_norm(k), tau)).collect()
}

impl CoupledSolver {
    /// `z = None` switches the noise off.
    pub fn new(
        spec: SolveSpec,
        supplier: Box<dyn PotentialSupplier>,
        z: Option<ModeDriverBank>,
        data: (&FourierField, &FourierField),
    ) -> Result<Self> {
        let steps = spec.steps()?;
        if spec.levels.is_empty() || spec.corrector_evals == 0 || spec.snapshot_every == 0 {
            return Err(Error::InvalidArgument("levels, corrector_evals and snapshot_every must be nonempty".into()));
        }
        let top = *spec.levels.iter().max().unwrap();
        if let Some(n) = supplier.truncation() {
            if n < top {
                return Err(Error::InvalidArgument(format!("potential truncated at {n} < level {top}")));
            }
        }
        let r = spec.radius;
        if support_radius(top) > r {
            return Err(Error::GridOverflow { radius: support_radius(top), capacity: r });
        }
        let zero = FourierField::zeros(r, false);
        let levels = spec
            .levels
            .iter()
            .map(|&n| {
                let ra = if supplier.truncation().is_some() { support_radius(n) } else { 0 };
                let support = FourierField::zeros(support_radius(n), true);
                Level {
                    n,
                    weights: support.modes().map(|k| lp_weight(k, n)).collect(),
                    transform: Transform::new(fast_size(2 * r + 2 * ra + 1)),
                    w: data.0.resized(r).with_hermitian(false),
                    v: data.1.resized(r).with_hermitian(false),
                    prev: (zero.clone(), zero.clone()),
                }
            })
            .collect();
        Ok(CoupledSolver {
            half: rotations(r, 0.5 * spec.dt),
            full: rotations(r, spec.dt),
            spec,
            supplier,
            z,
            levels,
            step: 0,
            steps,
            work: Workspace::default(),
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.spec.dt
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.steps
    }

    fn noise(&mut self, t: f64) -> Result<Option<(FourierField, FourierField)>> {
        match &mut self.z {
            None => Ok(None),
            Some(b) => {
                b.advance_to(t)?;
                sample_z(b, None, b.time(), self.spec.radius).map(Some)
            }
        }
    }

    fn level_potential(full: &Option<VectorPotentialState>, n: u64, weights: &[f64]) -> Option<VectorPotentialState> {
        full.as_ref().map(|s| {
            if s.n == n {
                return s.clone();
            }
            let r = support_radius(n);
            let cut = |f: &FourierField| {
                let mut out = FourierField::zeros(r, f.is_hermitian());
                for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
                    let k = [(i / (2 * r + 1)) as i64 - r as i64, (i % (2 * r + 1)) as i64 - r as i64];
                    *c = f.get(k) * weights[i];
                }
                out
            };
            VectorPotentialState { a: [0, 1, 2].map(|i| cut(&s.a[i])), dta: [0, 1, 2].map(|i| cut(&s.dta[i])), t: s.t, n }
        })
    }

    /// One step of every level.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.spec.dt;
        let th = self.time() + 0.5 * dt;
        let full = self.supplier.potential(th)?;
        if let Some(s) = &full {
            self.diagnostics.max_lorenz_residual = self.diagnostics.max_lorenz_residual.max(s.lorenz_residual());
        }
        let z = self.noise(th)?;
        let r = self.spec.radius;
        for li in 0..self.levels.len() {
            let n = self.levels[li].n;
            let a = Self::level_potential(&full, n, &self.levels[li].weights);
            let mass = if a.is_some() { mass_squared(n, th) } else { 0.0 };
            let mut forcing = self.levels[li].prev.clone();
            for _ in 0..self.spec.corrector_evals {
                let lv = &self.levels[li];
                let (mut w, mut v) = (lv.w.clone(), lv.v.clone());
                apply(&self.half, &mut w, &mut v, &forcing.0, &forcing.1);
                let phi = match &z {
                    Some((zf, _)) => &w + zf,
                    None => w,
                };
                let (f, amax) = forcing_at(&mut self.work, &lv.transform, r, &phi, a.as_ref(), mass)?;
                forcing = f;
                self.diagnostics.max_potential = self.diagnostics.max_potential.max(amax);
                if amax * dt > 0.5 {
                    self.diagnostics.cfl_warnings += 1;
                }
            }
            let lv = &mut self.levels[li];
            apply(&self.full, &mut lv.w, &mut lv.v, &forcing.0, &forcing.1);
            lv.prev = forcing;
        }
        self.step += 1;
        Ok(())
    }

    /// `(phi, d_t phi)` of every level at the current time.
    pub fn states(&mut self) -> Result<Vec<ScalarState>> {
        let t = self.time();
        let full = self.supplier.potential(t)?;
        let z = self.noise(t)?;
        let r = self.spec.radius;
        let mut out = Vec::with_capacity(self.levels.len());
        for lv in &self.levels {
            let mut phi = lv.w.clone();
            let mut dtphi = lv.v.clone();
            if let Some((zf, dz)) = &z {
                phi = &phi + zf;
                dtphi = &dtphi + dz;
            }
            if let Some(a) = Self::level_potential(&full, lv.n, &lv.weights) {
                let tr = &lv.transform;
                tr.synthesize_into(&phi, &mut self.work.phi)?;
                tr.synthesize_into(&a.a[0], &mut self.work.a0)?;
                for (x, y) in self.work.phi.iter_mut().zip(&self.work.a0) {
                    *x *= y.re;
                }
                let p = tr.analyze(&mut self.work.phi, r, false)?;
                dtphi = &dtphi + &p.scale_complex(2.0 * I);
            }
            out.push(ScalarState { phi, dtphi, t, n: lv.n });
        }
        Ok(out)
    }

    /// Runs to `t_end`, handing the states to `observer` at `t = 0` and every `snapshot_every` steps.
    pub fn run(mut self, mut observer: impl FnMut(&[ScalarState]) -> Result<()>) -> Result<Diagnostics> {
        observer(&self.states()?)?;
        while !self.is_done() {
            self.step()?;
            if self.step.is_multiple_of(self.spec.snapshot_every) || self.is_done() {
                observer(&self.states()?)?;
            }
        }
        Ok(self.diagnostics)
    }
}

/// Midpoint forcing `(2i A^0 phi, 2i d_a(A^a phi) - (|A|^2 - m^2) phi)` and `max |A|`.
fn forcing_at(
    work: &mut Workspace,
    tr: &Transform,
    radius: usize,
    phi: &FourierField,
    a: Option<&VectorPotentialState>,
    mass: f64,
) -> Result<((FourierField, FourierField), f64)> {
    let Some(a) = a else {
        let z = FourierField::zeros(radius, false);
        return Ok(((z.clone(), z), 0.0));
    };
    let packed = &a.a[1] + &a.a[2].scale_complex(I);
    tr.synthesize_into(phi, &mut work.phi)?;
    tr.synthesize_into(&a.a[0], &mut work.a0)?;
    tr.synthesize_into(&packed, &mut work.a12)?;
    let len = work.phi.len();
    for b in [&mut work.p1, &mut work.p2, &mut work.q] {
        b.resize(len, Complex64::new(0.0, 0.0));
    }
    let mut amax: f64 = 0.0;
    for j in 0..len {
        let (a0, a1, a2) = (work.a0[j].re, work.a12[j].re, work.a12[j].im);
        let q = a0 * a0 + a1 * a1 + a2 * a2;
        amax = amax.max(q);
        let p = work.phi[j];
        work.p1[j] = p * a1;
        work.p2[j] = p * a2;
        work.q[j] = p * (q - mass);
        work.a0[j] = p * a0;
    }
    let p0 = tr.analyze(&mut work.a0, radius, false)?;
    let p1 = tr.analyze(&mut work.p1, radius, false)?;
    let p2 = tr.analyze(&mut work.p2, radius, false)?;
    let q = tr.analyze(&mut work.q, radius, false)?;
    let nw = p0.scale_complex(2.0 * I);
    let mut nv = q.scale(-1.0);
    for i in 0..nv.coeffs().len() {
        let k = nv.mode_at(i);
        nv.coeffs_mut()[i] -= 2.0 * (k[0] as f64 * p1.coeffs()[i] + k[1] as f64 * p2.coeffs()[i]);
    }
    Ok(((nw, nv), amax.sqrt()))
}

/// Per-snapshot summary written next to the snapshot dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSummary {
    pub t: f64,
    pub n: u64,
    pub l2_phi: f64,
    pub pair_norm_quarter: f64,
    pub pair_norm_minus_delta: f64,
    pub free_energy: f64,
}

impl SnapshotSummary {
    pub fn of(s: &ScalarState, delta: f64) -> Self {
        SnapshotSummary {
            t: s.t,
            n: s.n,
            l2_phi: s.phi.l2_norm_sq().sqrt(),
            pair_norm_quarter: pair_norm(&s.phi, &s.dtphi, 0.25),
            pair_norm_minus_delta: pair_norm(&s.phi, &s.dtphi, -delta),
            free_energy: s.free_energy(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<ScalarState>,
    pub diagnostics: Diagnostics,
}

/// Single-truncation solve keeping every snapshot.
pub fn solve(
    spec: SolveSpec,
    supplier: Box<dyn PotentialSupplier>,
    z: Option<ModeDriverBank>,
    data: (&FourierField, &FourierField),
) -> Result<Trajectory> {
    if spec.levels.len() != 1 {
        return Err(Error::InvalidArgument("solve takes exactly one level".into()));
    }
    let mut snapshots = Vec::new();
    let diagnostics = CoupledSolver::new(spec, supplier, z, data)?.run(|s| {
        snapshots.push(s[0].clone());
        Ok(())
    })?;
    Ok(Trajectory { snapshots, diagnostics })
}

/// CSV columns `t,kx,ky,re_phi,im_phi,re_dtphi,im_dtphi`, nonzero modes only.
pub fn write_snapshots_csv(mut w: impl Write, snaps: &[ScalarState]) -> std::io::Result<()> {
    writeln!(w, "t[time],kx[mode],ky[mode],re_phi[amplitude],im_phi[amplitude],re_dtphi[amplitude/time],im_dtphi[amplitude/time]")?;
    for s in snaps {
        for ((k, p), d) in s.phi.iter().zip(s.dtphi.coeffs()) {
            if p.norm_sqr() == 0.0 && d.norm_sqr() == 0.0 {
                continue;
            }
            writeln!(w, "{},{},{},{:e},{:e},{:e},{:e}", s.t, k[0], k[1], p.re, p.im, d.re, d.im)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(levels: Vec<u64>, radius: usize, dt: f64, t_end: f64) -> SolveSpec {
        SolveSpec { levels, radius, dt, t_end, snapshot_every: 4, corrector_evals: 1 }
    }

    #[test]
    fn free_wave_is_exact() {
        let f0 = FourierField::single_mode(6, [3, 1], Complex64::new(1.0, -0.5));
        let f1 = FourierField::single_mode(6, [0, 2], Complex64::new(0.3, 0.0));
        let tr = solve(spec(vec![4], 6, 0.05, 1.0), Box::new(FreeField), None, (&f0, &f1)).unwrap();
        let last = tr.snapshots.last().unwrap();
        let (u, du) = super::super::propagator::wave_propagator(&f0, &f1, 1.0);
        assert!((last.t - 1.0).abs() < 1e-12);
        assert!(last.phi.max_abs_diff(&u) < 1e-13 && last.dtphi.max_abs_diff(&du) < 1e-13);
    }

    #[test]
    fn pure_noise_equals_z() {
        let zero = FourierField::zeros(5, false);
        let bank = ModeDriverBank::new(Channel::Z, None, 5, 17).with_resolution(1.0 / 64.0);
        let tr = solve(spec(vec![4], 5, 1.0 / 32.0, 0.5), Box::new(FreeField), Some(bank.clone()), (&zero, &zero)).unwrap();
        let mut b = bank;
        b.advance_to(0.5).unwrap();
        let (z, dz) = sample_z(&b, None, 0.5, 5).unwrap();
        let last = tr.snapshots.last().unwrap();
        assert!(last.phi.max_abs_diff(&z) < 1e-14 && last.dtphi.max_abs_diff(&dz) < 1e-14);
    }

    #[test]
    fn deterministic_and_lorenz_clean() {
        let run = || {
            let (f0, f1) = super::super::data::random_data(&Default::default(), 12);
            let pot = SampledPotential::new(8, 5, Some(1.0 / 64.0));
            let z = ModeDriverBank::new(Channel::Z, None, 12, 5).with_resolution(1.0 / 64.0);
            solve(spec(vec![8], 12, 1.0 / 32.0, 0.25), Box::new(pot), Some(z), (&f0, &f1)).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.snapshots, b.snapshots);
        assert!(a.diagnostics.max_lorenz_residual < 1e-12);
        assert!(a.snapshots.iter().all(|s| s.phi.max_abs().is_finite()));
    }
}
