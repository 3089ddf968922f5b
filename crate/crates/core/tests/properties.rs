use num_complex::Complex64;
use proptest::prelude::*;
use swe_core::estimates::q12;
use swe_core::noise::seed_derive;
use swe_core::spectral::{
    block_weight, dealiased_product, direct_product, dyadic_blocks, lp_project, paraproduct, FourierField, ParaKind, Projection, Threshold,
    Transform, AREA,
};

fn field(radius: usize, hermitian: bool) -> impl Strategy<Value = FourierField> {
    let side = 2 * radius + 1;
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), side * side).prop_map(move |v| {
        let f = FourierField::from_fn(radius, false, |k| {
            let i = ((k[0] + radius as i64) as usize) * side + (k[1] + radius as i64) as usize;
            Complex64::new(v[i].0, v[i].1)
        });
        if hermitian {
            (&f + &f.conj()).scale(0.5).with_hermitian(true)
        } else {
            f
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn blocks_partition_unity(f in (1usize..20).prop_flat_map(|r| field(r, false))) {
        let mut sum = FourierField::zeros(f.radius(), false);
        for k in dyadic_blocks(f.radius()) {
            sum += &f.weighted(|q| block_weight(q, k));
        }
        prop_assert!(sum.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn plancherel(f in (1usize..12).prop_flat_map(|r| field(r, false))) {
        let t = Transform::new(2 * f.radius() + 3);
        let phys = t.synthesize(&f).unwrap();
        let mean = phys.iter().map(|z| z.norm_sqr()).sum::<f64>() / phys.len() as f64;
        let spectral = f.l2_norm_sq();
        prop_assert!((spectral - AREA * mean).abs() <= 1e-10 * spectral.max(1e-300));
    }

    #[test]
    fn trichotomy(f in field(6, true), g in field(6, false), e in 1u32..4) {
        let t = Threshold { exponent: e };
        let full = dealiased_product(&f, &g);
        let mut sum = FourierField::zeros(6, false);
        for kind in ParaKind::ALL {
            sum += &paraproduct(&f, &g, kind, t).unwrap();
        }
        prop_assert!(sum.max_abs_diff(&full) < 1e-12);
    }

    #[test]
    fn projection_commutes_with_derivatives(f in field(9, false), n in 0u32..5, axis in 0usize..2) {
        let n = 1u64 << n;
        for kind in [Projection::Block, Projection::Leq] {
            let a = lp_project(&f.derivative(axis), n, kind);
            let b = lp_project(&f, n, kind).derivative(axis);
            prop_assert!(a.max_abs_diff(&b) <= 1e-14 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn fft_product_matches_direct(f in field(7, false), g in field(7, true)) {
        prop_assert!(dealiased_product(&f, &g).max_abs_diff(&direct_product(&f, &g)) < 1e-12);
    }

    #[test]
    fn q12_antisymmetric(f in field(5, false), g in field(5, false)) {
        prop_assert!((&q12(&f, &g) + &q12(&g, &f)).max_abs() < 1e-12);
        prop_assert!(q12(&f, &f).max_abs() < 1e-12);
    }

    #[test]
    fn real_fields_synthesize_real(f in field(6, true)) {
        let phys = Transform::new(16).synthesize(&f).unwrap();
        let scale = phys.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        prop_assert!(phys.iter().all(|z| z.im.abs() < 1e-12 * scale));
    }
}

#[test]
fn seed_derivation_has_no_collisions() {
    let mut keys: Vec<u64> = Vec::with_capacity(1_000_000);
    for c in ["w1", "w2", "z", "data"] {
        for k1 in -125i64..125 {
            for k2 in 0i64..1000 {
                keys.push(seed_derive(7, &[c.into(), k1.into(), k2.into()]));
            }
        }
    }
    keys.truncate(1_000_000);
    keys.sort_unstable();
    let before = keys.len();
    keys.dedup();
    assert_eq!(keys.len(), before);
}
