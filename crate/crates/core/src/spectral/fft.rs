//! Two-dimensional transforms between a coefficient box and a physical grid.
//!
//! Physical arrays are stored transposed (`phys[j2 * m + j1]`); only pointwise
//! operations touch them, so the layout never leaks.

use super::field::FourierField;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn plans(m: usize) -> Plans {
    static CACHE: OnceLock<Mutex<HashMap<usize, Plans>>> = OnceLock::new();
    let mut cache = CACHE.get_or_init(Default::default).lock().unwrap();
    cache
        .entry(m)
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(m), p.plan_fft_inverse(m))
        })
        .clone()
}

/// Smallest `2^a 3^b 5^c >= n` with `c <= 1`; radix-5 passes are the slow ones.
pub fn fast_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 || r == 5 {
            return m;
        }
        m += 1;
    }
}

/// Grid size for exact products of two fields of the given radius (padding factor 2).
pub fn padded_size(radius: usize) -> usize {
    fast_size(2 * (2 * radius + 1))
}

fn transpose(a: &mut [Complex64], m: usize) {
    const B: usize = 16;
    for ib in (0..m).step_by(B) {
        for jb in (ib..m).step_by(B) {
            for i in ib..(ib + B).min(m) {
                let j0 = if ib == jb { i + 1 } else { jb };
                for j in j0..(jb + B).min(m) {
                    a.swap(i * m + j, j * m + i);
                }
            }
        }
    }
}

#[derive(Clone)]
pub struct Transform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Transform({})", self.m)
    }
}

impl Transform {
    pub fn new(m: usize) -> Self {
        let (forward, inverse) = plans(m);
        Transform { m, forward, inverse }
    }

    pub fn size(&self) -> usize {
        self.m
    }

    fn check(&self, radius: usize) -> Result<()> {
        if 2 * radius + 1 > self.m {
            return Err(Error::GridOverflow { radius, capacity: (self.m - 1) / 2 });
        }
        Ok(())
    }

    fn wrap(&self, n: i64) -> usize {
        n.rem_euclid(self.m as i64) as usize
    }

    /// Physical values `f(x_j)`, `x_j = 2 pi j / m`, written into `out`.
    pub fn synthesize_into(&self, f: &FourierField, out: &mut Vec<Complex64>) -> Result<()> {
        self.check(f.radius())?;
        let m = self.m;
        let r = f.radius() as i64;
        out.clear();
        out.resize(m * m, Complex64::new(0.0, 0.0));
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        for k1 in -r..=r {
            let row = &mut out[self.wrap(k1) * m..][..m];
            for k2 in -r..=r {
                row[self.wrap(k2)] = f.get([k1, k2]);
            }
            self.inverse.process_with_scratch(row, &mut scratch);
        }
        transpose(out, m);
        self.inverse.process_with_scratch(out, &mut scratch);
        Ok(())
    }

    pub fn synthesize(&self, f: &FourierField) -> Result<Vec<Complex64>> {
        let mut out = Vec::new();
        self.synthesize_into(f, &mut out)?;
        Ok(out)
    }

    /// Coefficients on the box of `radius`; `phys` is used as scratch.
    pub fn analyze(&self, phys: &mut [Complex64], radius: usize, hermitian: bool) -> Result<FourierField> {
        self.check(radius)?;
        let m = self.m;
        assert_eq!(phys.len(), m * m);
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        self.forward.process_with_scratch(phys, &mut scratch);
        transpose(phys, m);
        let r = radius as i64;
        let norm = 1.0 / (m * m) as f64;
        let mut out = FourierField::zeros(radius, hermitian);
        for k1 in -r..=r {
            let row = &mut phys[self.wrap(k1) * m..][..m];
            self.forward.process_with_scratch(row, &mut scratch);
            for k2 in -r..=r {
                out.set([k1, k2], row[self.wrap(k2)] * norm);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn fast_sizes() {
        assert_eq!(fast_size(7), 8);
        assert_eq!(fast_size(297), 320);
        assert_eq!(fast_size(369), 384);
        assert_eq!(padded_size(148), 640);
    }

    #[test]
    fn synthesize_single_mode() {
        let t = Transform::new(12);
        let f = FourierField::single_mode(3, [2, -1], Complex64::new(1.0, 0.5));
        let phys = t.synthesize(&f).unwrap();
        for j1 in 0..12 {
            for j2 in 0..12 {
                let x = [2.0 * PI * j1 as f64 / 12.0, 2.0 * PI * j2 as f64 / 12.0];
                let want = Complex64::new(1.0, 0.5) * Complex64::from_polar(1.0, 2.0 * x[0] - x[1]);
                assert!((phys[j2 * 12 + j1] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_and_overflow() {
        let f = FourierField::from_fn(4, false, |k| Complex64::new(k[0] as f64, (k[1] * k[0]) as f64 + 0.5));
        let t = Transform::new(15);
        let mut phys = t.synthesize(&f).unwrap();
        let g = t.analyze(&mut phys, 4, false).unwrap();
        assert!(f.max_abs_diff(&g) < 1e-12);
        assert!(matches!(Transform::new(8).synthesize(&f), Err(Error::GridOverflow { .. })));
    }
}
