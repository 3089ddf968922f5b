use super::fft::{padded_size, Transform};
use super::field::FourierField;
use crate::error::{Error, Result};
/// Products of fields up to a fixed radius on one padded grid.
#[derive(Clone, Debug)]
pub struct ProductEngine {
    capacity: usize,
    transform: Transform,
}

impl ProductEngine {
    pub fn new(capacity: usize) -> Self {
        ProductEngine { capacity, transform: Transform::new(padded_size(capacity)) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn transform(&self) -> &Transform {
        &self.transform
    }

    /// Exact `(fg)(m) = sum_{k+l=m} f(k) g(l)` on the box of the larger operand radius.
    pub fn product(&self, f: &FourierField, g: &FourierField) -> Result<FourierField> {
        let r = f.radius().max(g.radius());
        if r > self.capacity {
            return Err(Error::GridOverflow { radius: r, capacity: self.capacity });
        }
        let mut a = self.transform.synthesize(f)?;
        let b = self.transform.synthesize(g)?;
        a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y);
        self.transform.analyze(&mut a, r, f.is_hermitian() && g.is_hermitian())
    }
}

/// Brute-force convolution; the oracle for the FFT path on small grids.
pub fn direct_product(f: &FourierField, g: &FourierField) -> FourierField {
    let r = f.radius().max(g.radius());
    let mut out = FourierField::zeros(r, f.is_hermitian() && g.is_hermitian());
    let nz_g: Vec<_> = g.iter().filter(|(_, c)| c.norm_sqr() > 0.0).collect();
    for (k, a) in f.iter().filter(|(_, c)| c.norm_sqr() > 0.0) {
        for &(l, b) in &nz_g {
            let m = [k[0] + l[0], k[1] + l[1]];
            if out.contains(m) {
                let v = out.get(m) + a * b;
                out.set(m, v);
            }
        }
    }
    out
}

const DIRECT_LIMIT: usize = 4;

/// Exact product, by direct convolution on tiny grids and a padded FFT otherwise.
pub fn dealiased_product(f: &FourierField, g: &FourierField) -> FourierField {
    let r = f.radius().max(g.radius());
    if r <= DIRECT_LIMIT {
        return direct_product(f, g);
    }
    ProductEngine::new(r).product(f, g).expect("engine sized to operands")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn random(r: usize, rng: &mut Xoshiro256PlusPlus) -> FourierField {
        FourierField::from_fn(r, false, |_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn plane_waves() {
        let f = FourierField::single_mode(6, [1, 0], Complex64::new(1.0, 0.0));
        let g = FourierField::single_mode(6, [0, 1], Complex64::new(1.0, 0.0));
        let p = dealiased_product(&f, &g);
        assert!((p.get([1, 1]) - 1.0).norm() < 1e-13);
        assert!((p.max_abs() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn fft_matches_direct() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(3);
        let f = random(4, &mut rng);
        let g = random(4, &mut rng);
        let fast = ProductEngine::new(4).product(&f, &g).unwrap();
        let slow = direct_product(&f, &g);
        assert!(fast.max_abs_diff(&slow) <= 1e-12 * slow.max_abs());
        assert!(ProductEngine::new(3).product(&f, &g).is_err());
    }
}
