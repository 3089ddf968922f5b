//! Lattice points `k` with `|k| ~ K` on which a phase function stays in a
//! window of width 2, maximized over the window position.

use crate::error::{Error, Result};
use crate::spectral::{mode_norm, Mode, Threshold};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Variant {
    /// `|k + l| - |k|`
    Minus,
    /// `|k + l| + |k|`
    Plus,
    /// `|k + l|`
    Zero,
    /// `u . k + sigma |k|` for a unit vector `u`
    Linear { sigma: i8, angle: f64 },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Minus => "minus",
            Variant::Plus => "plus",
            Variant::Zero => "zero",
            Variant::Linear { .. } => "linear",
        }
    }

    pub fn phase(&self, k: Mode, l: Mode) -> f64 {
        let kl = [k[0] + l[0], k[1] + l[1]];
        match *self {
            Variant::Minus => mode_norm(kl) - mode_norm(k),
            Variant::Plus => mode_norm(kl) + mode_norm(k),
            Variant::Zero => mode_norm(kl),
            Variant::Linear { sigma, angle } => angle.cos() * k[0] as f64 + angle.sin() * k[1] as f64 + sigma as f64 * mode_norm(k),
        }
    }

    /// Right-hand side of the counting bound for `|k| ~ K`, `|l| ~ L`.
    pub fn bound(&self, k: u64, l: u64) -> f64 {
        let kf = k as f64;
        match self {
            Variant::Minus => (k.min(l) as f64).powf(-0.5) * kf * kf,
            Variant::Plus | Variant::Linear { .. } => kf.powf(1.5),
            Variant::Zero => kf,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountQuery {
    pub k: u64,
    pub l: Mode,
    pub mu: f64,
    pub variant: Variant,
}

/// Two phases count as the same window when they differ by at most 2 up to this slack.
pub const WINDOW_SLACK: f64 = 1e-9;

/// Lattice points of the annulus `2^-e K <= |k| <= 2^e K`.
pub fn annulus(k: u64, threshold: Threshold) -> Vec<Mode> {
    let s = 2f64.powi(threshold.exponent as i32);
    let (lo, hi) = (k as f64 / s, k as f64 * s);
    let r = hi.floor() as i64;
    let mut out = Vec::new();
    for a in -r..=r {
        for b in -r..=r {
            let n = mode_norm([a, b]);
            if n >= lo && n <= hi {
                out.push([a, b]);
            }
        }
    }
    out
}

fn phases(k: u64, l: Mode, variant: Variant, threshold: Threshold, budget: usize) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    let s = 2f64.powi(threshold.exponent as i32);
    let side = 2.0 * (k as f64 * s).floor() + 1.0;
    if side * side > budget as f64 {
        return Err(Error::BudgetExceeded(format!("annulus for K = {k} exceeds {budget} points")));
    }
    Ok(annulus(k, threshold).into_iter().map(|m| variant.phase(m, l)).collect())
}

/// `#{k : |k| ~ K, |phase(k) - mu| <= 1}`.
pub fn count_lattice(q: &CountQuery, threshold: Threshold, budget: usize) -> Result<usize> {
    let v = phases(q.k, q.l, q.variant, threshold, budget)?;
    Ok(v.iter().filter(|&&p| (p - q.mu).abs() <= 1.0 + WINDOW_SLACK).count())
}

/// Supremum of [`count_lattice`] over `mu`, with a maximizing `mu`.
pub fn sup_count(k: u64, l: Mode, variant: Variant, threshold: Threshold, budget: usize) -> Result<(usize, f64)> {
    let mut v = phases(k, l, variant, threshold, budget)?;
    v.sort_by(|a, b| a.total_cmp(b));
    let (mut best, mut mu) = (0, 0.0);
    let mut j = 0;
    for i in 0..v.len() {
        j = j.max(i);
        while j + 1 < v.len() && v[j + 1] - v[i] <= 2.0 + WINDOW_SLACK {
            j += 1;
        }
        if j + 1 - i > best {
            best = j + 1 - i;
            mu = v[i] + 1.0;
        }
    }
    Ok((best, mu))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    pub variant: String,
    pub k: u64,
    pub l: u64,
    pub mu: f64,
    pub count: usize,
    pub bound: f64,
    pub ratio: f64,
}

/// Deterministic sample of `l` with `L/2 < |l| <= L`.
pub fn sample_l(l: u64, samples: usize, seed: u64) -> Vec<Mode> {
    use rand::Rng;
    let mut rng = crate::noise::stream(crate::noise::seed_derive(seed, &["counting-l".into(), l.into()]));
    let r = l as i64;
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < samples && tries < 10_000 {
        tries += 1;
        let k = [rng.random_range(-r..=r), rng.random_range(-r..=r)];
        let n = mode_norm(k);
        if n > l as f64 / 2.0 && n <= l as f64 {
            out.push(k);
        }
    }
    out
}

pub const LINEAR_ANGLES: usize = 8;

/// Worst `count / bound` per `(variant, K, L)` over the sampled `l` (and directions).
pub fn counting_constant_scan(
    k_max: u64,
    variants: &[&str],
    l_samples: usize,
    seed: u64,
    threshold: Threshold,
    budget: usize,
) -> Result<Vec<CountRow>> {
    let dyadics: Vec<u64> = (0..).map(|e| 1u64 << e).take_while(|&d| d <= k_max).collect();
    let mut rows = Vec::new();
    for name in variants {
        for &k in &dyadics {
            let ls: Vec<u64> = if *name == "linear" { vec![1] } else { dyadics.clone() };
            for &l in &ls {
                let mut best: Option<CountRow> = None;
                let queries: Vec<(Variant, Mode)> = match *name {
                    "linear" => (-1i8..=1)
                        .flat_map(|sigma| {
                            (0..LINEAR_ANGLES).map(move |a| {
                                let angle = std::f64::consts::PI * a as f64 / LINEAR_ANGLES as f64 + 0.1;
                                (Variant::Linear { sigma, angle }, [0, 0])
                            })
                        })
                        .collect(),
                    other => {
                        let v = match other {
                            "minus" => Variant::Minus,
                            "plus" => Variant::Plus,
                            "zero" => Variant::Zero,
                            _ => return Err(Error::InvalidArgument(format!("unknown variant {other}"))),
                        };
                        sample_l(l, l_samples, seed).into_iter().map(|lv| (v, lv)).collect()
                    }
                };
                for (variant, lv) in queries {
                    let (count, mu) = sup_count(k, lv, variant, threshold, budget)?;
                    let bound = variant.bound(k, l);
                    let ratio = count as f64 / bound;
                    if best.as_ref().is_none_or(|b| ratio > b.ratio) {
                        best = Some(CountRow { variant: name.to_string(), k, l, mu, count, bound, ratio });
                    }
                }
                rows.extend(best);
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BIG: usize = 1 << 24;

    fn oracle(k: u64, l: Mode, mu: f64, variant: Variant, e: u32) -> usize {
        let (lo, hi) = (k as f64 / 2f64.powi(e as i32), k as f64 * 2f64.powi(e as i32));
        let mut n = 0;
        for a in -600i64..=600 {
            for b in -600i64..=600 {
                let r = ((a * a + b * b) as f64).sqrt();
                if r < lo || r > hi {
                    continue;
                }
                let s = (((a + l[0]).pow(2) + (b + l[1]).pow(2)) as f64).sqrt();
                let p = match variant {
                    Variant::Minus => s - r,
                    Variant::Plus => s + r,
                    Variant::Zero => s,
                    Variant::Linear { sigma, angle } => a as f64 * angle.cos() + b as f64 * angle.sin() + sigma as f64 * r,
                };
                if (p - mu).abs() <= 1.0 + 1e-9 {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn empty_bands() {
        let t = Threshold::DESK;
        let q = CountQuery { k: 8, l: [3, 1], mu: -10.0, variant: Variant::Zero };
        assert_eq!(count_lattice(&q, t, BIG).unwrap(), 0);
        for k in [1, 4, 16] {
            let q = CountQuery { k, l: [4, 0], mu: 7.0, variant: Variant::Minus };
            assert_eq!(count_lattice(&q, t, BIG).unwrap(), 0);
        }
        assert!(count_lattice(&q, t, 10).is_err());
    }

    #[test]
    fn matches_naive_enumeration() {
        let t = Threshold::DESK;
        let q = CountQuery { k: 4, l: [4, 0], mu: 0.0, variant: Variant::Minus };
        assert_eq!(count_lattice(&q, t, BIG).unwrap(), oracle(4, [4, 0], 0.0, Variant::Minus, 2));
        for (i, variant) in [Variant::Plus, Variant::Zero, Variant::Linear { sigma: -1, angle: 0.3 }].into_iter().enumerate() {
            let l = [i as i64 + 1, 2];
            let (best, mu) = sup_count(8, l, variant, t, BIG).unwrap();
            assert_eq!(best, oracle(8, l, mu, variant, 2));
            for shift in [-0.37, 0.0, 1.3, 5.0] {
                assert!(oracle(8, l, mu + shift, variant, 2) <= best);
            }
        }
    }

    #[test]
    fn scan_ratios_finite() {
        let rows = counting_constant_scan(8, &["minus", "plus", "zero", "linear"], 2, 3, Threshold::DESK, BIG).unwrap();
        assert!(rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
        assert!(counting_constant_scan(8, &["bogus"], 2, 3, Threshold::DESK, BIG).is_err());
    }
}
