//! Worst-case lattice counts against the counting bounds over dyadic `K, L`.

use super::{sample_seed, Outcome};
use crate::config::RunConfig;
use crate::output::{Check, Sink};
use crate::{row, Result};
use rayon::prelude::*;
use serde_json::json;
use swe_core::estimates::{counting_constant_scan, CountRow};

const MAX_TOP_SLOPE: f64 = 0.1;

pub(super) fn run(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    let c = &cfg.counting;
    let seed = sample_seed(cfg.run.root_seed, cfg.run.experiment, 0);
    let per_variant: Vec<Vec<CountRow>> = c
        .variants
        .par_iter()
        .map(|v| counting_constant_scan(c.k_max, &[v.as_str()], c.l_samples, seed, cfg.threshold(), c.budget))
        .collect::<swe_core::Result<_>>()?;
    let rows: Vec<_> = per_variant.iter().flatten().map(|r| row![r.variant.as_str(), r.k, r.l, r.mu, r.count, r.bound, r.ratio]).collect();
    sink.table("counting", &["variant[name]", "K[mode]", "L[mode]", "mu[phase]", "count[points]", "bound[points]", "ratio[1]"], &rows)?;
    let mut summary = serde_json::Map::new();
    let mut checks = Vec::new();
    for (name, rows) in c.variants.iter().zip(&per_variant) {
        let worst_at = |k: u64| rows.iter().filter(|r| r.k == k).map(|r| r.ratio).fold(0.0, f64::max);
        let max = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
        let (hi, lo) = (worst_at(c.k_max), worst_at(c.k_max / 2));
        let slope = (hi / lo).log2();
        summary.insert(name.clone(), json!({ "max_ratio": max, "top_octave_slope": slope }));
        checks.push(Check::new(&format!("counting.{name}.finite"), max.is_finite() && max > 0.0, format!("max ratio {max:.4}")));
        checks.push(Check::new(
            &format!("counting.{name}.top_octave_slope"),
            slope <= MAX_TOP_SLOPE,
            format!("log2 of worst ratio K={} over K={}: {slope:.4}", c.k_max, c.k_max / 2),
        ));
    }
    Ok(Outcome { summary: serde_json::Value::Object(summary), checks, files: Vec::new() })
}
