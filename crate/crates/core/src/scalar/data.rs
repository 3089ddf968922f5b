use crate::noise::{seed_derive, stream, Label};
use crate::spectral::{mode_norm, pair_norm, FourierField};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Random initial data on `|n| <= band`, scaled to `||(phi0, phi1)||_{H^{1/4} x H^{-3/4}} = norm`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSpec {
    pub band: usize,
    pub norm: f64,
    pub seed: u64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec { band: 8, norm: 1.0, seed: 0 }
    }
}

pub fn random_data(spec: &DataSpec, radius: usize) -> (FourierField, FourierField) {
    let mut rng = stream(seed_derive(spec.seed, &[Label::Str("data")]));
    let band = spec.band as f64;
    let mut draw = |k| {
        if mode_norm(k) > band {
            return Complex64::new(0.0, 0.0);
        }
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        Complex64::new(a, b)
    };
    let f0 = FourierField::from_fn(radius, false, &mut draw);
    let f1 = FourierField::from_fn(radius, false, &mut draw);
    let size = pair_norm(&f0, &f1, 0.25);
    if size == 0.0 {
        return (f0, f1);
    }
    let s = spec.norm / size;
    (f0.scale(s), f1.scale(s))
}
