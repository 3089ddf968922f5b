use super::bump::{block_weight, dyadic_blocks, lp_weight, Threshold};
use super::field::FourierField;
use super::product::{direct_product, ProductEngine};
use crate::error::Result;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projection {
    Block,
    Leq,
}

pub fn lp_project(f: &FourierField, n: u64, kind: Projection) -> FourierField {
    match kind {
        Projection::Block => f.weighted(|k| block_weight(k, n)),
        Projection::Leq => f.weighted(|k| lp_weight(k, n)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParaKind {
    LoHi,
    HiHi,
    HiLo,
}

impl ParaKind {
    pub const ALL: [ParaKind; 3] = [ParaKind::LoHi, ParaKind::HiHi, ParaKind::HiLo];

    pub fn name(self) -> &'static str {
        match self {
            ParaKind::LoHi => "lo_hi",
            ParaKind::HiHi => "hi_hi",
            ParaKind::HiLo => "hi_lo",
        }
    }

    pub fn admits(self, t: Threshold, k: u64, l: u64) -> bool {
        let (k, l) = (k as f64, l as f64);
        match self {
            ParaKind::LoHi => t.much_less(k, l),
            ParaKind::HiLo => t.much_less(l, k),
            ParaKind::HiHi => t.comparable(k, l),
        }
    }
}

/// `sum_{(K,L) admitted by kind} P_K f * P_L g`.
pub fn paraproduct(f: &FourierField, g: &FourierField, kind: ParaKind, threshold: Threshold) -> Result<FourierField> {
    let r = f.radius().max(g.radius());
    let engine = ProductEngine::new(r);
    paraproduct_with(&engine, f, g, kind, threshold)
}

pub fn paraproduct_with(
    engine: &ProductEngine,
    f: &FourierField,
    g: &FourierField,
    kind: ParaKind,
    threshold: Threshold,
) -> Result<FourierField> {
    let r = f.radius().max(g.radius());
    let blocks = dyadic_blocks(r);
    let fk: Vec<_> = blocks.iter().map(|&k| lp_project(f, k, Projection::Block)).collect();
    let mut out = FourierField::zeros(r, f.is_hermitian() && g.is_hermitian());
    for &l in &blocks {
        let gl = lp_project(g, l, Projection::Block);
        if gl.max_abs() == 0.0 {
            continue;
        }
        let mut low = FourierField::zeros(f.radius(), f.is_hermitian());
        let mut any = false;
        for (i, &k) in blocks.iter().enumerate() {
            if kind.admits(threshold, k, l) {
                low += &fk[i];
                any = true;
            }
        }
        if !any || low.max_abs() == 0.0 {
            continue;
        }
        let p = if r <= 4 { direct_product(&low, &gl) } else { engine.product(&low, &gl)? };
        out += &p;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::product::dealiased_product;
    use num_complex::Complex64;

    #[test]
    fn wide_threshold_separates_far_scales() {
        // K=1 against L=4096 under the 2^10 threshold: only lo_hi survives
        let t = Threshold::WIDE;
        assert!(ParaKind::LoHi.admits(t, 1, 4096));
        assert!(!ParaKind::HiHi.admits(t, 1, 4096));
        assert!(!ParaKind::HiLo.admits(t, 1, 4096));
    }

    #[test]
    fn lo_hi_of_separated_modes() {
        let f = FourierField::single_mode(40, [1, 0], Complex64::new(1.0, 0.0));
        let g = FourierField::single_mode(40, [32, 0], Complex64::new(1.0, 0.0));
        let full = dealiased_product(&f, &g);
        let lh = paraproduct(&f, &g, ParaKind::LoHi, Threshold::DESK).unwrap();
        assert!(lh.max_abs_diff(&full) < 1e-12);
        let hh = paraproduct(&f, &g, ParaKind::HiHi, Threshold::DESK).unwrap();
        assert!(hh.max_abs() < 1e-12);
    }
}
