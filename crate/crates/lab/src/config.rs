//! Run configuration: per-experiment defaults, a TOML file, then `key=value`
//! overrides, later layers winning.

use crate::LabError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use swe_core::spectral::{is_dyadic, Threshold};

pub const COUNTING_VARIANTS: [&str; 4] = ["minus", "plus", "zero", "linear"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Simulate,
    Converge,
    Covariance,
    Renorm,
    Nullform,
    Counting,
    Smoothing,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::Simulate,
        Experiment::Converge,
        Experiment::Covariance,
        Experiment::Renorm,
        Experiment::Nullform,
        Experiment::Counting,
        Experiment::Smoothing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Simulate => "simulate",
            Experiment::Converge => "converge",
            Experiment::Covariance => "covariance",
            Experiment::Renorm => "renorm",
            Experiment::Nullform => "nullform",
            Experiment::Counting => "counting",
            Experiment::Smoothing => "smoothing",
        }
    }

    /// The statement of the underlying analysis that the experiment exercises.
    pub fn anchor(self) -> &'static str {
        match self {
            Experiment::Simulate => "theorem:well-posedness/trajectory",
            Experiment::Converge => "theorem:well-posedness/convergence",
            Experiment::Covariance => "lemma:potential-covariance+lemma:z-covariance",
            Experiment::Renorm => "definition:renormalized-mass+lemma:resonant-quadratic",
            Experiment::Nullform => "theorem:null-form-divergence",
            Experiment::Counting => "lemma:lattice-counting",
            Experiment::Smoothing => "heuristic:paraproduct-smoothing",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            format!("unknown experiment `{s}` (expected one of simulate, converge, covariance, renorm, nullform, counting, smoothing)")
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub experiment: Experiment,
    pub samples: usize,
    pub root_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Box radius of the scalar field; `0` selects the smallest admissible value.
    pub radius: usize,
    pub n_list: Vec<u64>,
    pub threshold_exponent: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt: f64,
    pub snapshot_every: usize,
}

/// Initial data `(phi_0, phi_1)`: Gaussian on `|n| <= band`, rescaled to the given
/// `H^{1/4} x H^{-3/4}` norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub band: usize,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovarianceSection {
    pub modes: Vec<[i64; 2]>,
    pub times: Vec<[f64; 2]>,
    pub lorenz_n: Vec<u64>,
    pub lorenz_times: Vec<f64>,
    pub lorenz_samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RenormSection {
    pub closed_n: Vec<u64>,
    pub closed_times: Vec<f64>,
    pub mean_n: Vec<u64>,
    pub mean_samples: usize,
    /// time of the MC mean and of the growth scan over `grid.n_list`
    pub t: f64,
    pub sobolev: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullformSection {
    pub m: [i64; 2],
    pub window_scale: f64,
    /// `0` picks the node count per truncation automatically.
    pub quad_pts: usize,
    pub mc_n: u64,
    pub gradient: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountingSection {
    pub k_max: u64,
    pub variants: Vec<String>,
    pub l_samples: usize,
    pub budget: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingSection {
    /// Fit window in blocks; `0` means `2^(e+1)` below and the truncation above.
    pub fit_lo: u64,
    pub fit_hi: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub snapshots: bool,
    pub bank_dump: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub grid: GridSection,
    pub time: TimeSection,
    pub data: DataSection,
    pub converge: ConvergeSection,
    pub covariance: CovarianceSection,
    pub renorm: RenormSection,
    pub nullform: NullformSection,
    pub counting: CountingSection,
    pub smoothing: SmoothingSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Defaults for `experiment`, sized like the acceptance runs.
    pub fn preset(experiment: Experiment) -> Self {
        let mut c = RunConfig {
            run: RunSection { experiment, samples: 8, root_seed: 20240601 },
            grid: GridSection { radius: 0, n_list: vec![8, 16, 32, 64, 128], threshold_exponent: Threshold::DESK.exponent },
            time: TimeSection { t_end: 1.0, dt: 1.0 / 512.0, snapshot_every: 16 },
            data: DataSection { band: 8, norm: 1.0 },
            converge: ConvergeSection { delta: 0.2 },
            covariance: CovarianceSection {
                modes: vec![[1, 0], [2, 0], [3, 4]],
                times: vec![[1.0, 1.0], [1.0, 2.0], [2.0, 2.0]],
                lorenz_n: vec![8, 16, 32, 64],
                lorenz_times: vec![0.25, 1.0, 4.0],
                lorenz_samples: 100,
            },
            renorm: RenormSection {
                closed_n: vec![8, 16, 32],
                closed_times: vec![0.5, 1.0],
                mean_n: vec![16, 64],
                mean_samples: 2000,
                t: 1.0,
                sobolev: -0.1,
            },
            nullform: NullformSection { m: [1, 0], window_scale: 32.0, quad_pts: 0, mc_n: 16, gradient: true },
            counting: CountingSection { k_max: 128, variants: COUNTING_VARIANTS.map(String::from).to_vec(), l_samples: 8, budget: 1 << 26 },
            smoothing: SmoothingSection { fit_lo: 0, fit_hi: 0 },
            output: OutputSection { snapshots: true, bank_dump: false },
        };
        match experiment {
            Experiment::Simulate => {
                c.run.samples = 1;
                c.grid.n_list = vec![16];
                c.time.dt = 1.0 / 256.0;
                c.time.snapshot_every = 32;
            }
            Experiment::Converge => {}
            Experiment::Covariance => {
                c.run.samples = 20_000;
                c.grid.n_list = vec![8];
            }
            Experiment::Renorm => {
                c.run.samples = 64;
                c.grid.n_list = vec![16, 32, 64, 128];
            }
            Experiment::Nullform => c.run.samples = 50_000,
            Experiment::Counting => c.run.samples = 1,
            Experiment::Smoothing => {
                c.run.samples = 16;
                c.grid.n_list = vec![64];
                c.time.t_end = 0.25;
                c.time.dt = 1.0 / 256.0;
            }
        }
        c
    }

    /// Layers `file` (TOML text) and `overrides` over the preset, then validates.
    pub fn load(experiment: Experiment, file: Option<&str>, overrides: &[String]) -> Result<Self, LabError> {
        let mut table = toml::Table::try_from(RunConfig::preset(experiment)).expect("preset serializes");
        let mut errors = Vec::new();
        if let Some(text) = file {
            match text.parse::<toml::Table>() {
                Ok(t) => merge(&mut table, t),
                Err(e) => errors.push(format!("config file: {e}")),
            }
        }
        for o in overrides {
            if let Err(e) = apply_override(&mut table, o) {
                errors.push(e);
            }
        }
        if !errors.is_empty() {
            return Err(LabError::Validation(errors));
        }
        let mut cfg: RunConfig = table.try_into().map_err(|e: toml::de::Error| LabError::Validation(vec![e.message().to_string()]))?;
        // the experiment named on the command line wins over the file
        cfg.run.experiment = experiment;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn threshold(&self) -> Threshold {
        Threshold { exponent: self.grid.threshold_exponent }
    }

    pub fn top_n(&self) -> u64 {
        self.grid.n_list.iter().copied().max().unwrap_or(1)
    }

    /// Smallest radius allowed by the invariant `radius >= (9/8) max N + 4`.
    pub fn min_radius(&self) -> usize {
        (9 * self.top_n()).div_ceil(8) as usize + 4
    }

    pub fn radius(&self) -> usize {
        if self.grid.radius == 0 {
            self.min_radius()
        } else {
            self.grid.radius
        }
    }

    pub fn steps(&self) -> usize {
        (self.time.t_end / self.time.dt).round() as usize
    }

    /// Every violated invariant, one message per field.
    pub fn validate(&self) -> Result<(), LabError> {
        let mut e = Vec::new();
        let exp = self.run.experiment;
        let n_list = &self.grid.n_list;
        if n_list.is_empty() {
            e.push("grid.n_list: must not be empty".to_string());
        }
        if let Some(n) = n_list.iter().find(|&&n| !is_dyadic(n)) {
            e.push(format!("grid.n_list: {n} is not a power of two"));
        }
        if n_list.windows(2).any(|w| w[0] >= w[1]) {
            e.push("grid.n_list: must be strictly increasing".to_string());
        }
        if self.grid.radius != 0 && self.grid.radius < self.min_radius() {
            e.push(format!("grid.radius: {} violates radius >= (9/8)*max(n_list) + 4 = {}", self.grid.radius, self.min_radius()));
        }
        if !(1..=16).contains(&self.grid.threshold_exponent) {
            e.push("grid.threshold_exponent: must lie in 1..=16".to_string());
        }
        if !(self.time.dt > 0.0) {
            e.push(format!("time.dt: {} violates dt > 0", self.time.dt));
        }
        if !(self.time.t_end > 0.0) {
            e.push(format!("time.t_end: {} must be positive", self.time.t_end));
        } else if self.time.dt > 0.0 {
            let n = (self.time.t_end / self.time.dt).round();
            if n < 1.0 || (n * self.time.dt - self.time.t_end).abs() > 1e-9 * self.time.t_end {
                e.push(format!("time.t_end: {} is not a positive multiple of dt = {}", self.time.t_end, self.time.dt));
            }
        }
        if self.time.snapshot_every == 0 {
            e.push("time.snapshot_every: must be at least 1".to_string());
        }
        if self.data.band == 0 || !(self.data.norm >= 0.0) {
            e.push("data: band must be >= 1 and norm >= 0".to_string());
        }
        let min_samples = match exp {
            Experiment::Covariance | Experiment::Nullform | Experiment::Renorm => 3,
            _ => 1,
        };
        if self.run.samples < min_samples {
            e.push(format!("run.samples: {} < {min_samples} required by {exp}", self.run.samples));
        }
        match exp {
            Experiment::Converge => {
                if n_list.len() < 2 {
                    e.push("grid.n_list: converge needs at least two truncations".to_string());
                }
                if !(self.converge.delta >= 0.0) {
                    e.push("converge.delta: must be nonnegative".to_string());
                }
            }
            Experiment::Covariance => {
                let c = &self.covariance;
                if c.modes.is_empty() || c.times.is_empty() {
                    e.push("covariance.modes/times: must not be empty".to_string());
                }
                if c.modes.contains(&[0, 0]) {
                    e.push("covariance.modes: the zero mode has no closed form here".to_string());
                }
                if c.times.iter().flatten().chain(&c.lorenz_times).any(|&t| !(t > 0.0)) {
                    e.push("covariance.times: times must be positive".to_string());
                }
                if c.lorenz_n.iter().any(|&n| !is_dyadic(n)) {
                    e.push("covariance.lorenz_n: entries must be powers of two".to_string());
                }
            }
            Experiment::Renorm => {
                let r = &self.renorm;
                if r.closed_n.iter().chain(&r.mean_n).any(|&n| !is_dyadic(n)) {
                    e.push("renorm.closed_n/mean_n: entries must be powers of two".to_string());
                }
                if r.mean_samples < 3 {
                    e.push("renorm.mean_samples: must be at least 3".to_string());
                }
                if !(r.t > 0.0) || r.closed_times.iter().any(|&t| !(t > 0.0)) {
                    e.push("renorm.t/closed_times: times must be positive".to_string());
                }
            }
            Experiment::Nullform => {
                let nf = &self.nullform;
                if nf.m == [0, 0] {
                    e.push("nullform.m: must be nonzero".to_string());
                }
                if !(nf.window_scale > 0.0) {
                    e.push("nullform.window_scale: must be positive".to_string());
                }
                if nf.quad_pts != 0 && nf.quad_pts < 64 {
                    e.push("nullform.quad_pts: must be 0 (automatic) or at least 64".to_string());
                }
                if !is_dyadic(nf.mc_n) {
                    e.push("nullform.mc_n: must be a power of two".to_string());
                }
                if n_list.len() < 3 {
                    e.push("grid.n_list: the log fit needs at least three truncations".to_string());
                }
            }
            Experiment::Counting => {
                let c = &self.counting;
                if !is_dyadic(c.k_max) || c.k_max < 2 {
                    e.push("counting.k_max: must be a power of two >= 2".to_string());
                }
                for v in &c.variants {
                    if !COUNTING_VARIANTS.contains(&v.as_str()) {
                        e.push(format!("counting.variants: unknown variant `{v}`"));
                    }
                }
                if c.l_samples == 0 {
                    e.push("counting.l_samples: must be at least 1".to_string());
                }
            }
            Experiment::Smoothing => {
                let s = &self.smoothing;
                if s.fit_hi != 0 && s.fit_lo > s.fit_hi {
                    e.push("smoothing.fit_lo: must not exceed fit_hi".to_string());
                }
            }
            Experiment::Simulate => {}
        }
        if e.is_empty() {
            Ok(())
        } else {
            Err(LabError::Validation(e))
        }
    }
}

fn merge(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// `section.key=value`, with `value` read as a TOML value (bare words become strings).
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<(), String> {
    let (path, raw) = spec.split_once('=').ok_or_else(|| format!("override `{spec}`: expected key=value"))?;
    let path: Vec<&str> = path.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(format!("override `{spec}`: empty key"));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let (last, parents) = path.split_last().unwrap();
    let mut cur = table;
    for p in parents {
        cur = match cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(Default::default())) {
            toml::Value::Table(t) => t,
            _ => return Err(format!("override `{spec}`: `{p}` is not a section")),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for e in Experiment::ALL {
            RunConfig::preset(e).validate().unwrap();
        }
    }

    #[test]
    fn precedence_cli_over_file_over_defaults() {
        let file = "[run]\nsamples = 5\nroot_seed = 9\n[grid]\nn_list = [8, 16]\n";
        let c = RunConfig::load(Experiment::Converge, Some(file), &["run.samples=3".into()]).unwrap();
        assert_eq!(c.run.samples, 3);
        assert_eq!(c.run.root_seed, 9);
        assert_eq!(c.grid.n_list, vec![8, 16]);
        assert_eq!(c.time.dt, 1.0 / 512.0);
    }

    #[test]
    fn overrides_parse_values() {
        let c = RunConfig::load(
            Experiment::Counting,
            None,
            &["counting.variants=[\"plus\"]".into(), "time.dt=0.25".into(), "run.experiment=counting".into()],
        )
        .unwrap();
        assert_eq!(c.counting.variants, vec!["plus".to_string()]);
        assert_eq!(c.time.dt, 0.25);
    }

    #[test]
    fn validation_lists_every_field() {
        let err =
            RunConfig::load(Experiment::Converge, None, &["grid.radius=10".into(), "time.dt=-1".into(), "grid.n_list=[8, 12]".into()])
                .unwrap_err();
        let LabError::Validation(msgs) = err else { panic!() };
        assert!(msgs.iter().any(|m| m.contains("grid.radius") && m.contains("(9/8)*max(n_list) + 4")));
        assert!(msgs.iter().any(|m| m.contains("time.dt")));
        assert!(msgs.iter().any(|m| m.contains("12 is not a power of two")));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::load(Experiment::Simulate, Some("[grid]\nradious = 3\n"), &[]).is_err());
        assert!(RunConfig::load(Experiment::Simulate, None, &["nosuch".into()]).is_err());
    }

    #[test]
    fn radius_defaults_to_invariant_minimum() {
        let c = RunConfig::preset(Experiment::Converge);
        assert_eq!(c.radius(), 148);
    }
}
