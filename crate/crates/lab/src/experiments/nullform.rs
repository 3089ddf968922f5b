//! Variance of the time-windowed null-form pairing as `N` grows.

use super::{sample_seed, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use serde_json::json;
use swe_core::estimates::{default_quad_pts, functional_variance_closed, functionals_mc, log_fit, window_nodes, Functional};
use swe_core::stats::LinearFit;

const TOP_SLOPE_TOL: f64 = 0.2;

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let nf = &cfg.nullform;
    let (m, scale) = (nf.m, nf.window_scale);
    let pts = |n: u64| if nf.quad_pts == 0 { default_quad_pts(m, n, scale) } else { nf.quad_pts };
    let ns = &cfg.grid.n_list;
    let closed: Vec<f64> =
        ns.iter().map(|&n| functional_variance_closed(Functional::NullForm, m, n, pts(n), scale)).collect::<swe_core::Result<_>>()?;

    let seed = sample_seed(cfg.run.root_seed, cfg.run.experiment, 0);
    let mc = functionals_mc(m, nf.mc_n, cfg.run.samples, seed, &window_nodes(m, scale, pts(nf.mc_n)))?;
    let mc_closed = match ns.iter().position(|&n| n == nf.mc_n) {
        Some(i) => closed[i],
        None => functional_variance_closed(Functional::NullForm, m, nf.mc_n, pts(nf.mc_n), scale)?,
    };
    let mut rows: Vec<_> = ns
        .iter()
        .zip(&closed)
        .map(|(&n, &v)| {
            if n == nf.mc_n {
                row![n, v, mc.null_form.variance, mc.null_form.variance_stderr, mc.null_form.samples]
            } else {
                row![n, v, None, None, 0usize]
            }
        })
        .collect();
    if !ns.contains(&nf.mc_n) {
        rows.push(row![nf.mc_n, mc_closed, mc.null_form.variance, mc.null_form.variance_stderr, mc.null_form.samples]);
    }
    sink.table(
        "nullform_variance",
        &["N[mode]", "var_closed[amplitude^2]", "var_mc[amplitude^2]", "stderr[amplitude^2]", "samples[count]"],
        &rows,
    )?;

    let points: Vec<(f64, f64)> = ns.iter().map(|&n| n as f64).zip(closed.iter().copied()).collect();
    let all = log_fit(&points)?;
    let top = log_fit(&points[points.len() - 3..])?;
    let increments: Vec<f64> = closed.windows(2).map(|w| w[1] - w[0]).collect();

    let mut gradient_fits: Vec<(u8, LinearFit)> = Vec::new();
    if nf.gradient {
        let mut grows = Vec::new();
        for j in [1u8, 2] {
            let vals: Vec<f64> = ns
                .iter()
                .map(|&n| functional_variance_closed(Functional::Gradient(j), m, n, pts(n), scale))
                .collect::<swe_core::Result<_>>()?;
            for (&n, &v) in ns.iter().zip(&vals) {
                grows.push(row![j as u64, n, v]);
            }
            // an identically vanishing functional has no meaningful slope
            if vals.iter().any(|&v| v > 0.0) {
                let p: Vec<(f64, f64)> = ns.iter().map(|&n| n as f64).zip(vals).collect();
                gradient_fits.push((j, log_fit(&p)?));
            }
        }
        sink.table("nullform_gradient", &["j[index]", "N[mode]", "var_closed[amplitude^2]"], &grows)?;
    }

    let gradient_json: serde_json::Map<String, serde_json::Value> =
        gradient_fits.iter().map(|(j, f)| (format!("G{j}"), json!(f))).collect();
    let fit = json!({
        "variable": "ln N",
        "all": all,
        "top3": top,
        "gradient": gradient_json,
        "increments": increments,
    });
    let files = vec![sink.json("nullform_fit.json", &fit)?];

    let nfmc = &mc.null_form;
    let var_z = (nfmc.variance - mc_closed).abs() / nfmc.variance_stderr;
    let mean_z = nfmc.mean_z_score();
    let rel = (top.slope - all.slope).abs() / all.slope.abs();
    let checks = vec![
        Check::new("nullform.increments_positive", increments.iter().all(|&d| d > 0.0), format!("{increments:?}")),
        Check::new("nullform.log_slope_positive", all.slope > 0.0 && all.r2 >= 0.98, format!("slope {:.4}, R^2 {:.5}", all.slope, all.r2)),
        Check::new(
            "nullform.top_slope_stable",
            rel <= TOP_SLOPE_TOL,
            format!("top-3 slope {:.4} vs {:.4} ({:.1}%)", top.slope, all.slope, 100.0 * rel),
        ),
        Check::new(
            "nullform.mc_variance",
            var_z <= 5.0,
            format!("MC {:.4} +- {:.4} vs closed {:.4} ({var_z:.2} stderr)", nfmc.variance, nfmc.variance_stderr, mc_closed),
        ),
        Check::new("nullform.mc_mean_zero", mean_z <= 4.0, format!("mean z-score {mean_z:.2}")),
        Check::new(
            "nullform.gradient_slope_positive",
            !nf.gradient || gradient_fits.iter().any(|(_, f)| f.slope > 0.0),
            format!("{:?}", gradient_fits.iter().map(|(j, f)| (j, f.slope)).collect::<Vec<_>>()),
        ),
        Check::new("nullform.pathwise_identity", mc.identity_defect < 1e-10, format!("defect {:e}", mc.identity_defect)),
    ];
    Ok(Outcome {
        summary: json!({
            "N": ns,
            "var_closed": closed,
            "fit": fit,
            "mc": { "N": nf.mc_n, "variance": nfmc.variance, "variance_stderr": nfmc.variance_stderr, "closed": mc_closed,
                     "mean_re": nfmc.mean_re, "mean_im": nfmc.mean_im, "samples": nfmc.samples },
        }),
        checks,
        files,
    })
}
