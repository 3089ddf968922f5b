//! The quadratic `|A|^2` of the potential: its mean against the resummed
//! covariance and the Monte Carlo average, and the growth in `N` with and
//! without the mass counterterm.

use super::{sample_seed, z_score, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use rayon::prelude::*;
use serde_json::json;
use swe_core::gauge::{cov_a_closed, quadratic_mean, renormalized_quadratic, resonant_quadratic_closed, s_n, sample_a, Component};
use swe_core::noise::{seed_derive, Channel, Label, ModeDriverBank};
use swe_core::scalar::support_radius;
use swe_core::spectral::{lp_weight, sobolev_norm, FourierField, ProductEngine};
use swe_core::stats::{mc_reduce, median};

/// `sum_k rho_{<=N}(k)^2 sum_alpha E|A^alpha(t, k)|^2` term by term.
fn resummed(n: u64, t: f64) -> f64 {
    let box_ = FourierField::zeros(support_radius(n) + 1, false);
    box_.modes()
        .map(|k| {
            let w = lp_weight(k, n);
            if w == 0.0 {
                return 0.0;
            }
            let minus = [-k[0], -k[1]];
            let c: f64 = [Component::Time, Component::Spatial(1, 1), Component::Spatial(2, 2)]
                .into_iter()
                .map(|c| cov_a_closed(c, k, minus, t, t))
                .sum();
            w * w * c
        })
        .sum()
}

fn banks(n: u64, seed: u64) -> [ModeDriverBank; 2] {
    let r = support_radius(n);
    [ModeDriverBank::new(Channel::W1, Some(n), r, seed), ModeDriverBank::new(Channel::W2, Some(n), r, seed)]
}

fn mean_sample(cfg: &RunConfig, n: u64, index: usize) -> Result<f64> {
    let seed = seed_derive(sample_seed(cfg.run.root_seed, cfg.run.experiment, index), &[Label::Str("mean"), n.into()]);
    let [mut w1, mut w2] = banks(n, seed);
    let t = cfg.renorm.t;
    w1.advance_to(t)?;
    w2.advance_to(t)?;
    Ok(quadratic_mean(&sample_a([&w1, &w2], n, t, support_radius(n))?))
}

/// `(||Q_ren||_{H^s}, zero-mode mean)` for every `N` of `grid.n_list` on one noise path.
fn growth_sample(cfg: &RunConfig, index: usize) -> Result<Vec<(f64, f64)>> {
    let seed = sample_seed(cfg.run.root_seed, cfg.run.experiment, index);
    let top = cfg.top_n();
    let [mut w1, mut w2] = banks(top, seed);
    let t = cfg.renorm.t;
    w1.advance_to(t)?;
    w2.advance_to(t)?;
    cfg.grid
        .n_list
        .iter()
        .map(|&n| {
            let r = support_radius(n);
            let a = sample_a([&w1, &w2], n, t, r)?;
            let q = renormalized_quadratic(&a, &ProductEngine::new(r))?;
            Ok((sobolev_norm(&q, cfg.renorm.sobolev), quadratic_mean(&a)))
        })
        .collect()
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let rc = &cfg.renorm;
    let mut checks = Vec::new();

    let mut rows = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for &n in &rc.closed_n {
        for &t in &rc.closed_times {
            let (c, s) = (resonant_quadratic_closed(n, t), resummed(n, t));
            let rel = (c - s).abs() / s.abs().max(1e-300);
            worst_rel = worst_rel.max(rel);
            rows.push(row![n, t, c, s, rel]);
        }
    }
    sink.table("renorm_closed", &["N[mode]", "t[time]", "closed[amplitude^2]", "resummed[amplitude^2]", "rel_err[relative]"], &rows)?;
    checks.push(Check::new("renorm.closed_matches_resummation", worst_rel <= 1e-10, format!("worst relative error {worst_rel:e}")));

    let mut rows = Vec::new();
    let mut worst_z: f64 = 0.0;
    for &n in &rc.mean_n {
        let xs: Vec<f64> = (0..rc.mean_samples).into_par_iter().map(|s| mean_sample(cfg, n, s)).collect::<Result<_>>()?;
        let m = mc_reduce(&xs)?;
        let closed = resonant_quadratic_closed(n, rc.t);
        let z = z_score(m.mean, m.stderr, closed);
        worst_z = worst_z.max(z);
        rows.push(row![n, rc.t, m.mean, m.stderr, closed, 2.5 * s_n(n) * rc.t, z, m.n]);
    }
    sink.table(
        "renorm_mean",
        &[
            "N[mode]",
            "t[time]",
            "mc_mean[amplitude^2]",
            "stderr[amplitude^2]",
            "closed[amplitude^2]",
            "mass[amplitude^2]",
            "z[stderr units]",
            "samples[count]",
        ],
        &rows,
    )?;
    checks.push(Check::new("renorm.mc_mean_tracks_closed_form", worst_z <= 4.0, format!("worst z {worst_z:.2}")));

    let per: Vec<Vec<(f64, f64)>> = (0..cfg.run.samples).into_par_iter().map(|s| growth_sample(cfg, s)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut med_norm = Vec::new();
    let mut mean_zero = Vec::new();
    for (i, &n) in cfg.grid.n_list.iter().enumerate() {
        for (s, v) in per.iter().enumerate() {
            rows.push(row![n, s, v[i].0, v[i].1]);
        }
        med_norm.push(median(&per.iter().map(|v| v[i].0).collect::<Vec<_>>()));
        mean_zero.push(per.iter().map(|v| v[i].1).sum::<f64>() / per.len() as f64);
    }
    sink.table("renorm_growth", &["N[mode]", "sample[index]", "renormalized_norm[H^s norm]", "unsubtracted_mean[amplitude^2]"], &rows)?;
    let (lo, hi) = (cfg.grid.n_list[0], cfg.top_n());
    let norm_ratio = med_norm.last().unwrap() / med_norm[0];
    let mean_ratio = mean_zero.last().unwrap() / mean_zero[0];
    let s_ratio = s_n(hi) / s_n(lo);
    checks.push(Check::new(
        "renorm.renormalized_bounded",
        norm_ratio < 1.5,
        format!("median norm ratio N={hi} over N={lo}: {norm_ratio:.4}"),
    ));
    checks.push(Check::new(
        "renorm.unsubtracted_tracks_s_ratio",
        (mean_ratio / s_ratio - 1.0).abs() <= 0.1,
        format!("mean ratio {mean_ratio:.4} vs S ratio {s_ratio:.4}"),
    ));
    Ok(Outcome {
        summary: json!({
            "closed_worst_rel_err": worst_rel,
            "mean_worst_z": worst_z,
            "N": cfg.grid.n_list,
            "median_renormalized_norm": med_norm,
            "mean_unsubtracted": mean_zero,
            "norm_ratio": norm_ratio,
            "mean_ratio": mean_ratio,
            "s_ratio": s_ratio,
        }),
        checks,
        files: Vec::new(),
    })
}
