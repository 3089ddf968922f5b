//! Second moments of `A` and `z` against their closed forms, and the Lorenz
//! constraint of sampled potentials.

use super::{sample_seed, z_score, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use rayon::prelude::*;
use serde_json::json;
use swe_core::estimates::cov_z_closed;
use swe_core::gauge::{cov_a_closed, sample_a, Component, VectorPotentialState};
use swe_core::noise::{seed_derive, Channel, Label, ModeDriverBank};
use swe_core::scalar::{sample_z, support_radius};
use swe_core::spectral::{mode_norm, FourierField, Mode};
use swe_core::stats::mc_reduce;

const COMPONENTS: [(Component, usize, &str); 3] =
    [(Component::Time, 0, "A0"), (Component::Spatial(1, 1), 1, "A1"), (Component::Spatial(2, 2), 2, "A2")];
const Z_LIMIT: f64 = 4.0;
const PASS_FRACTION: f64 = 0.95;

struct Cell {
    field: &'static str,
    k: Mode,
    t: f64,
    tp: f64,
    closed: f64,
}

fn cells(cfg: &RunConfig) -> Result<Vec<Cell>> {
    let mut out = Vec::new();
    for &k in &cfg.covariance.modes {
        for &[t, tp] in &cfg.covariance.times {
            for (c, _, name) in COMPONENTS {
                out.push(Cell { field: name, k, t, tp, closed: cov_a_closed(c, k, [-k[0], -k[1]], t, tp) });
            }
            out.push(Cell { field: "z", k, t, tp, closed: cov_z_closed(k, k, t, tp)? });
        }
    }
    Ok(out)
}

fn time_grid(cfg: &RunConfig) -> Vec<f64> {
    let mut ts: Vec<f64> = cfg.covariance.times.iter().flatten().copied().collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// Per cell, the product whose mean is the closed-form value.
fn sample(cfg: &RunConfig, cells: &[Cell], times: &[f64], index: usize) -> Result<Vec<f64>> {
    let seed = sample_seed(cfg.run.root_seed, cfg.run.experiment, index);
    let r = cfg.covariance.modes.iter().map(|k| k[0].unsigned_abs().max(k[1].unsigned_abs())).max().unwrap() as usize;
    // rho_{<=n} = 1 on every tested mode
    let kmax = cfg.covariance.modes.iter().map(|&k| mode_norm(k)).fold(0.0, f64::max);
    let n = (8.0 * kmax / 7.0).ceil().max(1.0) as u64;
    let n = n.next_power_of_two();
    let mut w1 = ModeDriverBank::new(Channel::W1, None, r, seed);
    let mut w2 = ModeDriverBank::new(Channel::W2, None, r, seed);
    let mut zb = ModeDriverBank::new(Channel::Z, None, r, seed);
    let mut states: Vec<(VectorPotentialState, FourierField)> = Vec::new();
    for &t in times {
        for b in [&mut w1, &mut w2, &mut zb] {
            b.advance_to(t)?;
        }
        states.push((sample_a([&w1, &w2], n, t, r)?, sample_z(&zb, None, t, r)?.0));
    }
    let at = |t: f64| &states[times.iter().position(|&s| s == t).unwrap()];
    Ok(cells
        .iter()
        .map(|c| {
            let (a, b) = (at(c.t), at(c.tp));
            let minus = [-c.k[0], -c.k[1]];
            match COMPONENTS.iter().find(|x| x.2 == c.field) {
                Some(&(_, i, _)) => (a.0.a[i].get(c.k) * b.0.a[i].get(minus)).re,
                None => (a.1.get(c.k) * b.1.get(c.k).conj()).re,
            }
        })
        .collect())
}

fn lorenz(cfg: &RunConfig) -> Result<Vec<(u64, f64, f64)>> {
    let c = &cfg.covariance;
    let mut times = c.lorenz_times.clone();
    times.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    for &n in &c.lorenz_n {
        let per_sample: Vec<Vec<f64>> = (0..c.lorenz_samples)
            .into_par_iter()
            .map(|s| {
                let seed = seed_derive(sample_seed(cfg.run.root_seed, cfg.run.experiment, s), &[Label::Str("lorenz"), n.into()]);
                let r = support_radius(n);
                let mut w1 = ModeDriverBank::new(Channel::W1, Some(n), r, seed);
                let mut w2 = ModeDriverBank::new(Channel::W2, Some(n), r, seed);
                times
                    .iter()
                    .map(|&t| {
                        w1.advance_to(t)?;
                        w2.advance_to(t)?;
                        Ok(sample_a([&w1, &w2], n, t, r)?.lorenz_residual())
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<_>>()?;
        for (i, &t) in times.iter().enumerate() {
            out.push((n, t, per_sample.iter().map(|v| v[i]).fold(0.0, f64::max)));
        }
    }
    Ok(out)
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let cells = cells(cfg)?;
    let times = time_grid(cfg);
    let samples: Vec<Vec<f64>> = (0..cfg.run.samples).into_par_iter().map(|s| sample(cfg, &cells, &times, s)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let (mut pass_a, mut total_a, mut pass_z, mut total_z) = (0, 0, 0, 0);
    let mut worst = (0.0f64, 0.0f64);
    for (i, c) in cells.iter().enumerate() {
        let xs: Vec<f64> = samples.iter().map(|s| s[i]).collect();
        let m = mc_reduce(&xs)?;
        let z = z_score(m.mean, m.stderr, c.closed);
        let ok = z <= Z_LIMIT;
        if c.field == "z" {
            total_z += 1;
            pass_z += ok as usize;
            worst.1 = worst.1.max(z);
        } else {
            total_a += 1;
            pass_a += ok as usize;
            worst.0 = worst.0.max(z);
        }
        rows.push(row![c.field, c.k[0], c.k[1], c.t, c.tp, m.mean, m.stderr, c.closed, z, m.n]);
    }
    sink.table(
        "covariance",
        &[
            "field[name]",
            "kx[mode]",
            "ky[mode]",
            "t[time]",
            "tp[time]",
            "mc[amplitude^2]",
            "stderr[amplitude^2]",
            "closed[amplitude^2]",
            "z[stderr units]",
            "samples[count]",
        ],
        &rows,
    )?;
    let lz = lorenz(cfg)?;
    let lrows: Vec<_> = lz.iter().map(|&(n, t, r)| row![n, t, r]).collect();
    sink.table("lorenz", &["N[mode]", "t[time]", "max_residual[relative]"], &lrows)?;
    let worst_lorenz = lz.iter().map(|x| x.2).fold(0.0, f64::max);
    let frac_a = pass_a as f64 / total_a as f64;
    let frac_z = pass_z as f64 / total_z as f64;
    Ok(Outcome {
        summary: json!({
            "potential": { "cells": total_a, "within_4_stderr": pass_a, "worst_z": worst.0 },
            "z": { "cells": total_z, "within_4_stderr": pass_z, "worst_z": worst.1 },
            "lorenz_max_residual": worst_lorenz,
        }),
        checks: vec![
            Check::new("covariance.lorenz", worst_lorenz < 1e-10, format!("max residual {worst_lorenz:e}")),
            Check::new(
                "covariance.potential",
                frac_a >= PASS_FRACTION,
                format!("{pass_a}/{total_a} cells within 4 stderr, worst z {:.2}", worst.0),
            ),
            Check::new(
                "covariance.z",
                frac_z >= PASS_FRACTION,
                format!("{pass_z}/{total_z} cells within 4 stderr, worst z {:.2}", worst.1),
            ),
        ],
        files: Vec::new(),
    })
}
