//! `D_N = sup_t ||phi_{<=2N} - phi_{<=N}||_{H^-delta x H^-delta-1}` on one noise path per sample.

use super::{sample_seed, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use rayon::prelude::*;
use serde_json::json;
use swe_core::noise::{Channel, ModeDriverBank};
use swe_core::scalar::{random_data, CoupledSolver, DataSpec, Diagnostics, SampledPotential, SolveSpec};
use swe_core::spectral::pair_norm;
use swe_core::stats::median;

fn sample(cfg: &RunConfig, index: usize) -> Result<(Vec<f64>, Diagnostics)> {
    let seed = sample_seed(cfg.run.root_seed, cfg.run.experiment, index);
    let levels = cfg.grid.n_list.clone();
    let r = cfg.radius();
    let h = 0.5 * cfg.time.dt;
    let (f0, f1) = random_data(&DataSpec { band: cfg.data.band, norm: cfg.data.norm, seed }, r);
    let potential = SampledPotential::new(cfg.top_n(), seed, Some(h));
    let z = ModeDriverBank::new(Channel::Z, None, r, seed).with_resolution(h);
    let spec = SolveSpec {
        levels: levels.clone(),
        radius: r,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        snapshot_every: cfg.time.snapshot_every,
        corrector_evals: 1,
    };
    let delta = cfg.converge.delta;
    let mut d = vec![0.0f64; levels.len() - 1];
    let diag = CoupledSolver::new(spec, Box::new(potential), Some(z), (&f0, &f1))?.run(|st| {
        for (i, di) in d.iter_mut().enumerate() {
            let v = pair_norm(&(&st[i + 1].phi - &st[i].phi), &(&st[i + 1].dtphi - &st[i].dtphi), -delta);
            *di = di.max(v);
        }
        Ok(())
    })?;
    Ok((d, diag))
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let results: Vec<(Vec<f64>, Diagnostics)> = (0..cfg.run.samples).into_par_iter().map(|s| sample(cfg, s)).collect::<Result<_>>()?;
    let ns = &cfg.grid.n_list[..cfg.grid.n_list.len() - 1];
    let medians: Vec<f64> = (0..ns.len()).map(|i| median(&results.iter().map(|r| r.0[i]).collect::<Vec<_>>())).collect();
    let mut rows = Vec::new();
    for (i, &n) in ns.iter().enumerate() {
        for (s, r) in results.iter().enumerate() {
            rows.push(row![n, s, r.0[i], medians[i]]);
        }
    }
    sink.table("converge", &["N[mode]", "sample[index]", "D_N[H^-delta norm]", "median_D_N[H^-delta norm]"], &rows)?;
    let diag_rows: Vec<_> =
        results.iter().enumerate().map(|(s, r)| row![s, r.1.max_lorenz_residual, r.1.cfl_warnings, r.1.max_potential]).collect();
    sink.table(
        "converge_diagnostics",
        &["sample[index]", "max_lorenz_residual[relative]", "cfl_warnings[steps]", "max_potential[amplitude]"],
        &diag_rows,
    )?;
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let ratio = medians.last().unwrap() / medians[0];
    let mut checks = Vec::new();
    if medians.len() >= 2 {
        checks.push(Check::new("converge.median_strictly_decreasing", decreasing, format!("medians {medians:?}")));
        checks.push(Check::new("converge.last_over_first_at_most_half", ratio <= 0.5, format!("ratio {ratio:.4}")));
    }
    Ok(Outcome {
        summary: json!({ "N": ns, "median_D_N": medians, "last_over_first": ratio, "strictly_decreasing": decreasing }),
        checks,
        files: Vec::new(),
    })
}
