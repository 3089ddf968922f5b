mod converge;
mod counting;
mod covariance;
mod nullform;
mod renorm;
mod simulate;
mod smoothing;

use crate::config::{Experiment, RunConfig};
use crate::output::{Check, Sink};
use crate::Result;

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
    pub files: Vec<String>,
}

pub(crate) fn dispatch(cfg: &RunConfig, sink: &mut Sink) -> Result<Outcome> {
    match cfg.run.experiment {
        Experiment::Simulate => simulate::run(cfg, sink),
        Experiment::Converge => converge::run(cfg, sink),
        Experiment::Covariance => covariance::run(cfg, sink),
        Experiment::Renorm => renorm::run(cfg, sink),
        Experiment::Nullform => nullform::run(cfg, sink),
        Experiment::Counting => counting::run(cfg, sink),
        Experiment::Smoothing => smoothing::run(cfg, sink),
    }
}

/// Key of sample `index`; every stochastic input of that sample derives from it.
pub fn sample_seed(root: u64, experiment: Experiment, index: usize) -> u64 {
    crate::output::derived_key(root, experiment.name(), index)
}

/// `|mean - want| / stderr`, with an exact match counting as 0.
pub(crate) fn z_score(mean: f64, stderr: f64, want: f64) -> f64 {
    let d = (mean - want).abs();
    if stderr > 0.0 {
        d / stderr
    } else if d <= 1e-12 * want.abs().max(1.0) {
        0.0
    } else {
        f64::INFINITY
    }
}
