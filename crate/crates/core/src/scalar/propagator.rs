use crate::spectral::{mode_norm, FourierField};

/// `R(tau)` and `int_0^tau R` for `(u, u')` under `u'' = -|k|^2 u`, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub r: [f64; 4],
    pub phi: [f64; 4],
}

impl Rotation {
    pub fn new(omega: f64, tau: f64) -> Self {
        if omega == 0.0 {
            return Rotation { r: [1.0, tau, 0.0, 1.0], phi: [tau, 0.5 * tau * tau, 0.0, tau] };
        }
        let (s, c) = (omega * tau).sin_cos();
        let h = (0.5 * omega * tau).sin();
        let one_minus_cos = 2.0 * h * h;
        Rotation { r: [c, s / omega, -omega * s, c], phi: [s / omega, one_minus_cos / (omega * omega), -one_minus_cos, s / omega] }
    }
}

/// `(cos(t|D|) f0 + sin(t|D|)/|D| f1, d_t of it)`, with `sin(0)/0 := t`.
pub fn wave_propagator(phi0: &FourierField, phi1: &FourierField, t: f64) -> (FourierField, FourierField) {
    let r = phi0.radius().max(phi1.radius());
    let (a, b) = (phi0.resized(r), phi1.resized(r));
    let herm = a.is_hermitian() && b.is_hermitian();
    let mut u = FourierField::zeros(r, herm);
    let mut du = FourierField::zeros(r, herm);
    for i in 0..u.coeffs().len() {
        let k = u.mode_at(i);
        let m = Rotation::new(mode_norm(k), t).r;
        let (x, y) = (a.coeffs()[i], b.coeffs()[i]);
        u.coeffs_mut()[i] = x * m[0] + y * m[1];
        du.coeffs_mut()[i] = x * m[2] + y * m[3];
    }
    (u, du)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn identity_and_single_mode() {
        let f0 = FourierField::single_mode(4, [3, 0], Complex64::new(1.0, 2.0));
        let f1 = FourierField::zeros(4, false);
        let (u, du) = wave_propagator(&f0, &f1, 0.0);
        assert_eq!((u.clone(), du), (f0.clone(), f1.clone()));
        let (u, _) = wave_propagator(&f0, &f1, 0.8);
        assert!((u.get([3, 0]) - Complex64::new(1.0, 2.0) * (2.4f64).cos()).norm() < 1e-15);
        let g1 = FourierField::constant(4, 1.5);
        let (u, du) = wave_propagator(&FourierField::zeros(4, true), &g1, 2.0);
        assert!((u.get([0, 0]).re - 3.0).abs() < 1e-15 && (du.get([0, 0]).re - 1.5).abs() < 1e-15);
    }

    #[test]
    fn integrated_kernel() {
        let q = crate::quadrature::GaussLegendre::new(30);
        for w in [0.0, 1.0, 7.3] {
            let rot = Rotation::new(w, 0.9);
            for e in 0..4 {
                let v = q.integrate(0.0, 0.9, |s| Rotation::new(w, s).r[e]);
                assert!((v - rot.phi[e]).abs() < 1e-13);
            }
        }
    }
}
