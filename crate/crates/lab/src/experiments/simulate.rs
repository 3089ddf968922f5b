//! Trajectories of the coupled equation at the top truncation.

use super::{sample_seed, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use rayon::prelude::*;
use serde_json::json;
use std::fs::File;
use std::io::BufWriter;
use swe_core::noise::{Channel, ModeDriverBank};
use swe_core::scalar::{random_data, solve, write_snapshots_csv, DataSpec, SampledPotential, SnapshotSummary, SolveSpec, Trajectory};

fn trajectory(cfg: &RunConfig, seed: u64) -> Result<Trajectory> {
    let n = cfg.top_n();
    let r = cfg.radius();
    let h = 0.5 * cfg.time.dt;
    let (f0, f1) = random_data(&DataSpec { band: cfg.data.band, norm: cfg.data.norm, seed }, r);
    let z = ModeDriverBank::new(Channel::Z, None, r, seed).with_resolution(h);
    let spec = SolveSpec {
        levels: vec![n],
        radius: r,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
        snapshot_every: cfg.time.snapshot_every,
        corrector_evals: 1,
    };
    Ok(solve(spec, Box::new(SampledPotential::new(n, seed, Some(h))), Some(z), (&f0, &f1))?)
}

/// The three driver banks of sample `seed` at `t_end`, in the binary dump format.
///
/// Increments are schedule independent, so fresh banks advanced in one step
/// hold the same state as the ones the solver consumed.
fn dump_banks(cfg: &RunConfig, seed: u64, sink: &Sink) -> Result<Vec<String>> {
    let n = cfg.top_n();
    let ra = swe_core::scalar::support_radius(n);
    let h = 0.5 * cfg.time.dt;
    let mut files = Vec::new();
    for (ch, trunc, r) in [(Channel::W1, Some(n), ra), (Channel::W2, Some(n), ra), (Channel::Z, None, cfg.radius())] {
        let mut b = ModeDriverBank::new(ch, trunc, r, seed).with_resolution(h);
        b.advance_to(cfg.time.t_end)?;
        let name = format!("bank_{}.bin", ch.label());
        b.write_dump(BufWriter::new(File::create(sink.dir().join(&name))?))?;
        files.push(name);
    }
    Ok(files)
}

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let exp = cfg.run.experiment;
    let seeds: Vec<u64> = (0..cfg.run.samples).map(|s| sample_seed(cfg.run.root_seed, exp, s)).collect();
    let trajs: Vec<Trajectory> = seeds.par_iter().map(|&s| trajectory(cfg, s)).collect::<Result<_>>()?;
    let delta = cfg.converge.delta;
    let mut rows = Vec::new();
    for (s, tr) in trajs.iter().enumerate() {
        for snap in &tr.snapshots {
            let m = SnapshotSummary::of(snap, delta);
            rows.push(row![s, m.t, m.n, m.l2_phi, m.pair_norm_quarter, m.pair_norm_minus_delta, m.free_energy]);
        }
    }
    sink.table(
        "trajectory",
        &[
            "sample[index]",
            "t[time]",
            "N[mode]",
            "l2_phi[L2 norm]",
            "pair_norm_quarter[H^1/4 norm]",
            "pair_norm_minus_delta[H^-delta norm]",
            "free_energy[energy]",
        ],
        &rows,
    )?;
    let mut files = Vec::new();
    if cfg.output.snapshots {
        let name = "snapshots.csv".to_string();
        write_snapshots_csv(BufWriter::new(File::create(sink.dir().join(&name))?), &trajs[0].snapshots)?;
        files.push(name);
    }
    if cfg.output.bank_dump {
        files.extend(dump_banks(cfg, seeds[0], sink)?);
    }
    let lorenz = trajs.iter().map(|t| t.diagnostics.max_lorenz_residual).fold(0.0, f64::max);
    let finite = trajs.iter().all(|t| t.snapshots.iter().all(|s| s.phi.max_abs().is_finite()));
    let cfl: usize = trajs.iter().map(|t| t.diagnostics.cfl_warnings).sum();
    Ok(Outcome {
        summary: json!({ "max_lorenz_residual": lorenz, "cfl_warnings": cfl, "finite": finite }),
        checks: vec![
            Check::new("simulate.finite", finite, "all snapshots finite"),
            Check::new("simulate.lorenz", lorenz < 1e-10, format!("max residual {lorenz:e}")),
        ],
        files,
    })
}
