use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub type Mode = [i64; 2];

pub fn mode_norm_sq(k: Mode) -> i64 {
    k[0] * k[0] + k[1] * k[1]
}

pub fn mode_norm(k: Mode) -> f64 {
    (mode_norm_sq(k) as f64).sqrt()
}

/// Area of the torus `[0, 2pi)^2`.
pub const AREA: f64 = 4.0 * PI * PI;

/// Fourier coefficients on the box `|n|_inf <= radius`, with
/// `f(x) = sum_n f(n) e^{i<n,x>}`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierField {
    radius: usize,
    hermitian: bool,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(radius: usize, hermitian: bool) -> Self {
        let side = 2 * radius + 1;
        FourierField { radius, hermitian, coeffs: vec![Complex64::new(0.0, 0.0); side * side] }
    }

    pub fn from_fn(radius: usize, hermitian: bool, mut f: impl FnMut(Mode) -> Complex64) -> Self {
        let mut out = Self::zeros(radius, hermitian);
        let r = radius as i64;
        let mut i = 0;
        for k1 in -r..=r {
            for k2 in -r..=r {
                out.coeffs[i] = f([k1, k2]);
                i += 1;
            }
        }
        out
    }

    pub fn constant(radius: usize, c: f64) -> Self {
        let mut out = Self::zeros(radius, true);
        out.set([0, 0], Complex64::new(c, 0.0));
        out
    }

    pub fn single_mode(radius: usize, k: Mode, amplitude: Complex64) -> Self {
        let mut out = Self::zeros(radius, false);
        out.set(k, amplitude);
        out
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn with_hermitian(mut self, flag: bool) -> Self {
        self.hermitian = flag;
        self
    }

    pub fn contains(&self, k: Mode) -> bool {
        let r = self.radius as i64;
        k[0].abs() <= r && k[1].abs() <= r
    }

    pub fn index(&self, k: Mode) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let r = self.radius as i64;
        Some(((k[0] + r) as usize) * self.side() + (k[1] + r) as usize)
    }

    pub fn mode_at(&self, index: usize) -> Mode {
        let r = self.radius as i64;
        let s = self.side();
        [(index / s) as i64 - r, (index % s) as i64 - r]
    }

    pub fn get(&self, k: Mode) -> Complex64 {
        self.index(k).map_or(Complex64::new(0.0, 0.0), |i| self.coeffs[i])
    }

    /// Panics if `k` lies outside the box.
    pub fn set(&mut self, k: Mode, v: Complex64) {
        let i = self.index(k).expect("mode outside grid");
        self.coeffs[i] = v;
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.coeffs.len()).map(move |i| self.mode_at(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        self.coeffs.iter().enumerate().map(move |(i, &c)| (self.mode_at(i), c))
    }

    /// Multiplies every coefficient by a real weight of its mode.
    pub fn weighted(&self, mut w: impl FnMut(Mode) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.coeffs.len() {
            let k = out.mode_at(i);
            out.coeffs[i] *= w(k);
        }
        out
    }

    pub fn map(&self, hermitian: bool, mut f: impl FnMut(Mode, Complex64) -> Complex64) -> Self {
        let mut out = self.clone().with_hermitian(hermitian);
        for i in 0..out.coeffs.len() {
            let k = out.mode_at(i);
            out.coeffs[i] = f(k, out.coeffs[i]);
        }
        out
    }

    /// `d/dx_a`, i.e. multiplication by `i k_a`.
    pub fn derivative(&self, axis: usize) -> Self {
        self.map(self.hermitian, |k, c| c * Complex64::new(0.0, k[axis] as f64))
    }

    /// Zero-extends or truncates to a new box radius.
    pub fn resized(&self, radius: usize) -> Self {
        let mut out = Self::zeros(radius, self.hermitian);
        for i in 0..out.coeffs.len() {
            out.coeffs[i] = self.get(out.mode_at(i));
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn scale_complex(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        let real = s.im == 0.0;
        out.hermitian &= real;
        out
    }

    pub fn conj(&self) -> Self {
        // conj(f) has coefficients conj(f(-n))
        let mut out = Self::zeros(self.radius, self.hermitian);
        for i in 0..out.coeffs.len() {
            let k = out.mode_at(i);
            out.coeffs[i] = self.get([-k[0], -k[1]]).conj();
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let r = self.radius.max(other.radius);
        let a = self.resized(r);
        let b = other.resized(r);
        a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    /// `max_n |f(-n) - conj f(n)|` relative to `max |f|`.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for (k, c) in self.iter() {
            worst = worst.max((self.get([-k[0], -k[1]]) - c.conj()).norm());
        }
        worst / scale
    }

    /// `||f||_{L^2}^2 = (2pi)^2 sum |f(n)|^2`.
    pub fn l2_norm_sq(&self) -> f64 {
        AREA * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let r = self.radius.max(other.radius);
        let (a, b) = (self.resized(r), other.resized(r));
        let mut out = Self::zeros(r, self.hermitian && other.hermitian);
        for i in 0..out.coeffs.len() {
            out.coeffs[i] = f(a.coeffs[i], b.coeffs[i]);
        }
        out
    }
}

impl Add for &FourierField {
    type Output = FourierField;
    fn add(self, rhs: &FourierField) -> FourierField {
        if self.radius == rhs.radius {
            let mut out = self.clone();
            out.hermitian &= rhs.hermitian;
            out.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a += b);
            return out;
        }
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &FourierField {
    type Output = FourierField;
    fn sub(self, rhs: &FourierField) -> FourierField {
        if self.radius == rhs.radius {
            let mut out = self.clone();
            out.hermitian &= rhs.hermitian;
            out.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a -= b);
            return out;
        }
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl AddAssign<&FourierField> for FourierField {
    fn add_assign(&mut self, rhs: &FourierField) {
        *self = &*self + rhs;
    }
}

impl Neg for &FourierField {
    type Output = FourierField;
    fn neg(self) -> FourierField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &FourierField {
    type Output = FourierField;
    fn mul(self, s: f64) -> FourierField {
        self.scale(s)
    }
}
