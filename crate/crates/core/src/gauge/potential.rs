use crate::error::{Error, Result};
use crate::noise::ModeDriverBank;
use crate::spectral::{lp_weight, mode_norm_sq, FourierField};
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `A^alpha` and `d_t A^alpha` for `alpha = 0, 1, 2` at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPotentialState {
    pub a: [FourierField; 3],
    pub dta: [FourierField; 3],
    pub t: f64,
    pub n: u64,
}

impl VectorPotentialState {
    pub fn zero(radius: usize, n: u64, t: f64) -> Self {
        let z = FourierField::zeros(radius, true);
        VectorPotentialState { a: [z.clone(), z.clone(), z.clone()], dta: [z.clone(), z.clone(), z], t, n }
    }

    pub fn radius(&self) -> usize {
        self.a[0].radius()
    }

    /// `max_k |d_t A^0 + i k_a A^a| / max(1, max_k |d_t A^0|)`.
    pub fn lorenz_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for (k, d0) in self.dta[0].iter() {
            let div = I * (k[0] as f64 * self.a[1].get(k) + k[1] as f64 * self.a[2].get(k));
            worst = worst.max((d0 + div).norm());
            scale = scale.max(d0.norm());
        }
        worst / scale
    }

    /// `P_{<=m}` applied to every component.
    pub fn restricted(&self, m: u64) -> Self {
        let w = |k| lp_weight(k, m);
        VectorPotentialState { a: self.a.clone().map(|f| f.weighted(w)), dta: self.dta.clone().map(|f| f.weighted(w)), t: self.t, n: m }
    }
}

fn check_bank(bank: &ModeDriverBank, n: u64, t: f64) -> Result<()> {
    bank.check_time(t)?;
    if let Some(b) = bank.truncation() {
        if b < n {
            return Err(Error::InvalidArgument(format!("bank truncated at {b}, need {n}")));
        }
    }
    Ok(())
}

/// Closed-form reconstruction of the truncated potential from the two
/// spatial driver banks, on the box of `radius`.
pub fn sample_a(w: [&ModeDriverBank; 2], n: u64, t: f64, radius: usize) -> Result<VectorPotentialState> {
    check_bank(w[0], n, t)?;
    check_bank(w[1], n, t)?;
    let mut out = VectorPotentialState::zero(radius, n, t);
    let r = radius as i64;
    for k1 in -r..=r {
        for k2 in -r..=r {
            let k = [k1, k2];
            let wt = lp_weight(k, n);
            if wt == 0.0 {
                continue;
            }
            let st = [w[0].state(k), w[1].state(k)];
            let n2 = mode_norm_sq(k);
            if n2 == 0 {
                for a in 0..2 {
                    out.a[a + 1].set(k, -wt * (t * st[a].i1 - st[a].it));
                    out.dta[a + 1].set(k, -wt * st[a].i1);
                }
                continue;
            }
            let om = (n2 as f64).sqrt();
            let (s, c) = (om * t).sin_cos();
            let mut a0 = Complex64::new(0.0, 0.0);
            let mut d0 = Complex64::new(0.0, 0.0);
            for a in 0..2 {
                let ka = k[a] as f64;
                let odd = st[a].ic * s - st[a].is * c;
                let even = st[a].ic * c + st[a].is * s;
                out.a[a + 1].set(k, -wt / om * odd);
                out.dta[a + 1].set(k, -wt * even);
                a0 += ka * (even - st[a].i1);
                d0 += ka * odd;
            }
            out.a[0].set(k, -I * wt / (om * om) * a0);
            out.dta[0].set(k, I * wt / om * d0);
        }
    }
    Ok(out)
}

/// `J^0(t, k) = -i k_a W^a_t(k)`, the time integral of `-d_a J^a`.
pub fn current_j0(w: [&ModeDriverBank; 2], t: f64, radius: usize) -> Result<FourierField> {
    w[0].check_time(t)?;
    w[1].check_time(t)?;
    Ok(FourierField::from_fn(radius, true, |k| -I * (k[0] as f64 * w[0].state(k).i1 + k[1] as f64 * w[1].state(k).i1)))
}

/// `F_{ab} = d_a A_b - d_b A_a` with `A_0 = -A^0`, `A_j = A^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curvature {
    pub f01: FourierField,
    pub f02: FourierField,
    pub f12: FourierField,
}

impl Curvature {
    /// Any of the nine components, antisymmetric in its indices.
    pub fn component(&self, alpha: usize, beta: usize) -> FourierField {
        let r = self.f01.radius();
        match (alpha, beta) {
            (0, 1) => self.f01.clone(),
            (0, 2) => self.f02.clone(),
            (1, 2) => self.f12.clone(),
            (a, b) if a == b => FourierField::zeros(r, true),
            (a, b) => self.component(b, a).scale(-1.0),
        }
    }
}

pub fn curvature(s: &VectorPotentialState) -> Curvature {
    // d_0 A_j - d_j A_0 = d_t A^j + d_j A^0
    let f0 = |j: usize| &s.dta[j] + &s.a[0].derivative(j - 1);
    Curvature { f01: f0(1), f02: f0(2), f12: &s.a[2].derivative(0) - &s.a[1].derivative(1) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::Channel;

    fn banks(n: u64, seed: u64) -> [ModeDriverBank; 2] {
        [ModeDriverBank::new(Channel::W1, Some(n), 12, seed), ModeDriverBank::new(Channel::W2, Some(n), 12, seed)]
    }

    #[test]
    fn zero_at_time_zero() {
        let b = banks(8, 1);
        let s = sample_a([&b[0], &b[1]], 8, 0.0, 12).unwrap();
        assert!(s.a.iter().chain(&s.dta).all(|f| f.max_abs() == 0.0));
        assert_eq!(current_j0([&b[0], &b[1]], 0.0, 12).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lorenz_real_and_nested() {
        let mut b = banks(8, 2);
        b.iter_mut().for_each(|x| x.advance(1.3).unwrap());
        let s = sample_a([&b[0], &b[1]], 8, 1.3, 12).unwrap();
        assert!(s.lorenz_residual() < 1e-13);
        assert!(s.a.iter().chain(&s.dta).all(|f| f.hermitian_defect() < 1e-14));
        let small = sample_a([&b[0], &b[1]], 4, 1.3, 12).unwrap();
        for a in 0..3 {
            assert!(small.a[a].max_abs_diff(&s.restricted(4).a[a]) < 1e-15);
        }
        assert!(matches!(sample_a([&b[0], &b[1]], 8, 1.0, 12), Err(Error::TimeMismatch { .. })));
        assert!(sample_a([&b[0], &b[1]], 16, 1.3, 12).is_err());
    }

    #[test]
    fn curvature_components() {
        let mut b = banks(4, 3);
        b.iter_mut().for_each(|x| x.advance(0.4).unwrap());
        let s = sample_a([&b[0], &b[1]], 4, 0.4, 6).unwrap();
        let f = curvature(&s);
        let k = [2, -1];
        let want = I * (k[0] as f64) * s.a[2].get(k) - I * (k[1] as f64) * s.a[1].get(k);
        assert!((f.f12.get(k) - want).norm() < 1e-15);
        assert_eq!(f.component(2, 1), f.f12.scale(-1.0));
        assert_eq!(f.component(1, 1).max_abs(), 0.0);
        let j0 = current_j0([&b[0], &b[1]], 0.4, 6).unwrap();
        assert_eq!(j0.get([0, 0]), Complex64::new(0.0, 0.0));
    }
}
