//! Per-mode Brownian drivers and their filtered integrals
//! `I_1 = int dB`, `I_c = int cos(s|k|) dB`, `I_s = int sin(s|k|) dB`, and
//! `I_t = int s dB` on the zero mode, advanced exactly in law.
//!
//! Normalization: `E|B_t|^2 = t` (real and imaginary parts each carry `t/2`).
//!
//! Binary dump format: one little-endian record per stored mode,
//! `k1: i32, k2: i32, t: f64`, then `I_1, I_c, I_s, I_t` as `(re, im)` `f64`
//! pairs (80 bytes per record).

use super::gram::{gram_cholesky, zero_mode_cholesky, Lower3};
use super::seed::{seed_derive, stream, Label};
use crate::error::{Error, Result};
use crate::spectral::{mode_norm_sq, Mode};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Channel {
    W1,
    W2,
    Z,
}

impl Channel {
    pub fn label(self) -> &'static str {
        match self {
            Channel::W1 => "w1",
            Channel::W2 => "w2",
            Channel::Z => "z",
        }
    }

    /// W channels drive real fields: `B(-k) = conj B(k)` and a real zero mode.
    pub fn conjugate_paired(self) -> bool {
        !matches!(self, Channel::Z)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ModeState {
    pub i1: Complex64,
    pub ic: Complex64,
    pub is: Complex64,
    pub it: Complex64,
}

impl ModeState {
    fn conj(self) -> Self {
        ModeState { i1: self.i1.conj(), ic: self.ic.conj(), is: self.is.conj(), it: self.it.conj() }
    }
}

#[derive(Clone, Debug)]
pub struct ModeDriverBank {
    channel: Channel,
    seed: u64,
    radius: usize,
    truncation: Option<u64>,
    modes: Vec<Mode>,
    states: Vec<ModeState>,
    rngs: Vec<Xoshiro256PlusPlus>,
    // dense over the box: 0 = absent, +i = modes[i-1], -i = conj of modes[i-1]
    lookup: Vec<i32>,
    time: f64,
    resolution: Option<f64>,
    steps: u64,
    // Cholesky factors per stored mode for the step `factor_dt`
    factors: Vec<Lower3>,
    factor_dt: f64,
}

fn cnormal(rng: &mut Xoshiro256PlusPlus) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn in_support(k: Mode, truncation: Option<u64>) -> bool {
    match truncation {
        // rho(|k|/N) > 0 iff |k| < 9N/8, i.e. 64|k|^2 < 81 N^2
        Some(n) => 64 * mode_norm_sq(k) < 81 * (n as i64) * (n as i64),
        None => true,
    }
}

impl ModeDriverBank {
    /// Bank over the box `|k|_inf <= radius`, restricted to `supp rho_{<=N}` when
    /// `truncation = Some(N)`. Each mode (or `+-k` pair) owns its own stream.
    pub fn new(channel: Channel, truncation: Option<u64>, radius: usize, seed: u64) -> Self {
        let r = radius as i64;
        let side = 2 * radius + 1;
        let mut lookup = vec![0i32; side * side];
        let mut modes = Vec::new();
        let at = |k: Mode| ((k[0] + r) as usize) * side + (k[1] + r) as usize;
        for k1 in -r..=r {
            for k2 in -r..=r {
                let k = [k1, k2];
                if !in_support(k, truncation) {
                    continue;
                }
                let upper = k1 > 0 || (k1 == 0 && k2 >= 0);
                if channel.conjugate_paired() && !upper {
                    continue;
                }
                modes.push(k);
                let id = modes.len() as i32;
                lookup[at(k)] = id;
                if channel.conjugate_paired() && k != [0, 0] {
                    lookup[at([-k1, -k2])] = -id;
                }
            }
        }
        let rngs =
            modes.iter().map(|k| stream(seed_derive(seed, &[Label::Str(channel.label()), Label::Int(k[0]), Label::Int(k[1])]))).collect();
        ModeDriverBank {
            channel,
            seed,
            radius,
            truncation,
            states: vec![ModeState::default(); modes.len()],
            modes,
            rngs,
            lookup,
            time: 0.0,
            resolution: None,
            steps: 0,
            factors: Vec::new(),
            factor_dt: 0.0,
        }
    }

    /// Forces `advance_to` through the uniform grid `j * h`, so any two
    /// schedules reading on that grid see the same path.
    pub fn with_resolution(mut self, h: f64) -> Self {
        assert!(h > 0.0);
        self.resolution = Some(h);
        self
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn truncation(&self) -> Option<u64> {
        self.truncation
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Stored representatives (one per `+-k` pair on W channels).
    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn contains(&self, k: Mode) -> bool {
        self.slot(k) != 0
    }

    fn slot(&self, k: Mode) -> i32 {
        let r = self.radius as i64;
        if k[0].abs() > r || k[1].abs() > r {
            return 0;
        }
        let side = 2 * self.radius + 1;
        self.lookup[((k[0] + r) as usize) * side + (k[1] + r) as usize]
    }

    /// State at mode `k`; zero outside the bank.
    pub fn state(&self, k: Mode) -> ModeState {
        match self.slot(k) {
            0 => ModeState::default(),
            i if i > 0 => self.states[i as usize - 1],
            i => self.states[(-i) as usize - 1].conj(),
        }
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if (self.time - t).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::TimeMismatch { bank: self.time, requested: t });
        }
        Ok(())
    }

    pub fn advance(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::NonPositiveStep(dt));
        }
        let t0 = self.time;
        let z0 = zero_mode_cholesky(dt)?;
        if self.factor_dt != dt || self.factors.len() != self.modes.len() {
            self.refactor(dt)?;
        }
        for i in 0..self.modes.len() {
            let k = self.modes[i];
            let n2 = mode_norm_sq(k);
            let rng = &mut self.rngs[i];
            let st = &mut self.states[i];
            if n2 == 0 {
                let (a, b) = if self.channel.conjugate_paired() {
                    let a: f64 = rng.sample(StandardNormal);
                    let b: f64 = rng.sample(StandardNormal);
                    (Complex64::new(a, 0.0), Complex64::new(b, 0.0))
                } else {
                    (cnormal(rng), cnormal(rng))
                };
                let j1 = a * z0[0][0];
                let ju = a * z0[1][0] + b * z0[1][1];
                st.i1 += j1;
                st.ic += j1;
                st.it += j1 * t0 + ju;
                continue;
            }
            let l = self.factors[i];
            let xi = [cnormal(rng), cnormal(rng), cnormal(rng)];
            let j1 = xi[0] * l[0][0];
            let js = xi[0] * l[1][0] + xi[1] * l[1][1];
            let jv = xi[0] * l[2][0] + xi[1] * l[2][1] + xi[2] * l[2][2];
            let (s, c) = ((n2 as f64).sqrt() * t0).sin_cos();
            let even = j1 - jv;
            st.i1 += j1;
            st.ic += even * c - js * s;
            st.is += even * s + js * c;
        }
        self.time = t0 + dt;
        Ok(())
    }

    fn refactor(&mut self, dt: f64) -> Result<()> {
        let mut cache: HashMap<i64, Lower3> = HashMap::new();
        let mut out = Vec::with_capacity(self.modes.len());
        for &k in &self.modes {
            let n2 = mode_norm_sq(k);
            let l = match cache.get(&n2) {
                Some(l) => *l,
                None if n2 == 0 => [[0.0; 3]; 3],
                None => {
                    let l = gram_cholesky((n2 as f64).sqrt(), dt, n2)?;
                    cache.insert(n2, l);
                    l
                }
            };
            out.push(l);
        }
        self.factors = out;
        self.factor_dt = dt;
        Ok(())
    }

    /// Advances to time `t`; with a resolution set, `t` must lie on its grid.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        if t < self.time - 1e-12 * t.abs().max(1.0) {
            return Err(Error::BackwardsInTime { bank: self.time, requested: t });
        }
        match self.resolution {
            None => {
                if t > self.time {
                    self.advance(t - self.time)?;
                    self.time = t;
                }
            }
            Some(h) => {
                let target = (t / h).round();
                if (target * h - t).abs() > 1e-9 * t.abs().max(1.0) {
                    return Err(Error::OffNoiseGrid { requested: t, resolution: h });
                }
                let target = target as u64;
                while self.steps < target {
                    self.advance(h)?;
                    self.steps += 1;
                    self.time = self.steps as f64 * h;
                }
            }
        }
        Ok(())
    }

    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        for (k, s) in self.modes.iter().zip(&self.states) {
            w.write_all(&(k[0] as i32).to_le_bytes())?;
            w.write_all(&(k[1] as i32).to_le_bytes())?;
            w.write_all(&self.time.to_le_bytes())?;
            for z in [s.i1, s.ic, s.is, s.it] {
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }
}

pub const DUMP_RECORD_BYTES: usize = 80;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairing_and_zero_mode() {
        let mut b = ModeDriverBank::new(Channel::W1, Some(4), 5, 11);
        b.advance(0.3).unwrap();
        b.advance(0.9).unwrap();
        let s = b.state([2, -1]);
        assert_eq!(b.state([-2, 1]), s.conj());
        assert_eq!(b.state([0, 0]).i1.im, 0.0);
        assert!(!b.contains([5, 0]));
        assert!((b.time() - 1.2).abs() < 1e-15);
    }

    #[test]
    fn starts_at_zero_and_is_deterministic() {
        let a = ModeDriverBank::new(Channel::Z, None, 3, 1);
        assert!(a.modes().iter().all(|&k| a.state(k) == ModeState::default()));
        let mut a = a;
        let mut b = ModeDriverBank::new(Channel::Z, None, 3, 1);
        a.advance(0.5).unwrap();
        b.advance(0.5).unwrap();
        for &k in a.modes() {
            assert_eq!(a.state(k), b.state(k));
        }
    }

    #[test]
    fn resolution_makes_paths_schedule_independent() {
        let mut a = ModeDriverBank::new(Channel::Z, None, 2, 5).with_resolution(0.125);
        let mut b = a.clone();
        a.advance_to(1.0).unwrap();
        for t in [0.25, 0.5, 0.625, 1.0] {
            b.advance_to(t).unwrap();
        }
        assert_eq!(a.state([1, 2]), b.state([1, 2]));
        assert!(matches!(b.advance_to(1.1), Err(Error::OffNoiseGrid { .. })));
        assert!(matches!(b.advance_to(0.5), Err(Error::BackwardsInTime { .. })));
    }

    #[test]
    fn nested_banks_share_modes() {
        let mut small = ModeDriverBank::new(Channel::W2, Some(8), 20, 9);
        let mut big = ModeDriverBank::new(Channel::W2, Some(16), 20, 9);
        small.advance(0.7).unwrap();
        big.advance(0.7).unwrap();
        assert_eq!(small.state([3, -5]), big.state([3, -5]));
    }

    #[test]
    fn dump_size() {
        let b = ModeDriverBank::new(Channel::W1, Some(2), 3, 0);
        let mut buf = Vec::new();
        b.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), b.modes().len() * DUMP_RECORD_BYTES);
        assert_eq!(i32::from_le_bytes(buf[0..4].try_into().unwrap()), b.modes()[0][0] as i32);
    }
}
