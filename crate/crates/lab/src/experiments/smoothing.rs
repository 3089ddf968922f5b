//! Block profiles of `Duh[d_alpha(A^alpha <> z)](T)` split by paraproduct kind.

use super::{sample_seed, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use rayon::prelude::*;
use serde_json::json;
use swe_core::gauge::sample_a;
use swe_core::noise::{Channel, ModeDriverBank};
use swe_core::scalar::{sample_z, support_radius, ProbeResult, Rule, SmoothingProbe};
use swe_core::spectral::ParaKind;
use swe_core::stats::median;

const MIN_GAP: f64 = 0.15;

fn window(cfg: &RunConfig) -> (u64, u64) {
    let s = &cfg.smoothing;
    let lo = if s.fit_lo == 0 { 1 << (cfg.grid.threshold_exponent + 1) } else { s.fit_lo };
    let hi = if s.fit_hi == 0 { cfg.top_n() } else { s.fit_hi };
    (lo, hi)
}

fn sample(cfg: &RunConfig, index: usize) -> Result<Vec<ProbeResult>> {
    let seed = sample_seed(cfg.run.root_seed, cfg.run.experiment, index);
    let n = cfg.top_n();
    let r = support_radius(n);
    let steps = cfg.steps();
    let times: Vec<f64> = (0..=steps).map(|i| cfg.time.t_end * i as f64 / steps as f64).collect();
    let mut w1 = ModeDriverBank::new(Channel::W1, Some(n), r, seed);
    let mut w2 = ModeDriverBank::new(Channel::W2, Some(n), r, seed);
    let mut z = ModeDriverBank::new(Channel::Z, Some(n), r, seed);
    let (lo, hi) = window(cfg);
    let mut probe = SmoothingProbe::new(&times, r, r, cfg.threshold(), Rule::Simpson)?.with_fit_window(lo, hi);
    for (j, &t) in times.iter().enumerate() {
        for b in [&mut w1, &mut w2, &mut z] {
            b.advance_to(t)?;
        }
        let a = sample_a([&w1, &w2], n, t, r)?;
        let (p, dp) = sample_z(&z, Some(n), t, r)?;
        probe.accumulate(j, &a, &p, &dp)?;
    }
    Ok(probe.finish())
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let results: Vec<Vec<ProbeResult>> = (0..cfg.run.samples).into_par_iter().map(|s| sample(cfg, s)).collect::<Result<_>>()?;
    let mut blocks = Vec::new();
    let mut exps = Vec::new();
    for (s, res) in results.iter().enumerate() {
        for r in res {
            for &(k, v) in &r.blocks {
                blocks.push(row![s, r.kind.name(), k, v]);
            }
            exps.push(row![s, r.kind.name(), r.exponent]);
        }
    }
    sink.table("smoothing_blocks", &["sample[index]", "kind[name]", "K[mode]", "norm[L2 norm]"], &blocks)?;
    sink.table("smoothing_exponents", &["sample[index]", "kind[name]", "exponent[regularity]"], &exps)?;

    let med = |kind: ParaKind| {
        let v: Vec<f64> = results.iter().filter_map(|res| res.iter().find(|r| r.kind == kind).and_then(|r| r.exponent)).collect();
        (v.len() == results.len()).then(|| median(&v))
    };
    let (lh, hh, hl) = (med(ParaKind::LoHi), med(ParaKind::HiHi), med(ParaKind::HiLo));
    let gap = |x: Option<f64>| x.zip(lh).map(|(a, b)| a - b);
    let (g_hh, g_hl) = (gap(hh), gap(hl));
    let (lo, hi) = window(cfg);
    let checks = vec![
        Check::new("smoothing.hi_hi_gain", g_hh.is_some_and(|g| g >= MIN_GAP), format!("median exponent gap {g_hh:?}")),
        Check::new("smoothing.hi_lo_gain", g_hl.is_some_and(|g| g >= MIN_GAP), format!("median exponent gap {g_hl:?}")),
    ];
    Ok(Outcome {
        summary: json!({
            "fit_window": [lo, hi],
            "median_exponent": { "lo_hi": lh, "hi_hi": hh, "hi_lo": hl },
            "gap_hi_hi": g_hh,
            "gap_hi_lo": g_hl,
        }),
        checks,
        files: Vec::new(),
    })
}
