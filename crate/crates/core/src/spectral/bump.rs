//! The dyadic bump and Littlewood-Paley weights.

use super::field::Mode;

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

/// Quintic transition from 1 at 7/8 to 0 at 9/8, even in `xi`.
pub fn rho(xi: f64) -> f64 {
    1.0 - smoothstep((xi.abs() - 0.875) * 4.0)
}

pub fn is_dyadic(n: u64) -> bool {
    n.is_power_of_two()
}

/// `rho_{<=n}(k) = rho(|k| / n)`.
pub fn lp_weight(k: Mode, n: u64) -> f64 {
    rho(super::field::mode_norm(k) / n as f64)
}

/// `rho_1 = rho_{<=1}` and `rho_n = rho_{<=n} - rho_{<=n/2}` for `n >= 2`.
pub fn block_weight(k: Mode, n: u64) -> f64 {
    block_weight_at(super::field::mode_norm(k), n)
}

pub(crate) fn block_weight_at(r: f64, n: u64) -> f64 {
    let n = n as f64;
    if n <= 1.0 {
        rho(r)
    } else {
        rho(r / n) - rho(2.0 * r / n)
    }
}

/// Dyadic blocks 1, 2, 4, ... that can be nonzero on a box of the given radius.
pub fn dyadic_blocks(radius: usize) -> Vec<u64> {
    let top = radius as f64 * std::f64::consts::SQRT_2;
    let mut out = vec![1u64];
    // rho(r/K) == 1 once r <= 7K/8, so the last block needed is the first K with 7K/8 >= top
    while (*out.last().unwrap() as f64) * 0.875 < top {
        let next = out.last().unwrap() * 2;
        out.push(next);
    }
    out
}

/// Dyadic comparison `k << l` meaning `k < l * 2^-exponent`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Threshold {
    pub exponent: u32,
}

impl Threshold {
    pub const DESK: Threshold = Threshold { exponent: 2 };
    pub const WIDE: Threshold = Threshold { exponent: 10 };

    pub fn much_less(&self, k: f64, l: f64) -> bool {
        k < l / 2f64.powi(self.exponent as i32)
    }

    pub fn comparable(&self, k: f64, l: f64) -> bool {
        !self.much_less(k, l) && !self.much_less(l, k)
    }
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::DESK
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(lp_weight([0, 0], 8), 1.0);
        assert_eq!(lp_weight([7, 0], 8), 1.0);
        assert_eq!(lp_weight([9, 0], 8), 0.0);
        assert_eq!(lp_weight([8, 0], 8), 0.5);
        assert!(rho(0.9) > rho(1.0) && rho(1.0) > rho(1.1));
    }

    #[test]
    fn blocks_telescope() {
        for r in [0.0, 0.5, 1.0, 3.3, 17.0, 100.2] {
            let s: f64 = dyadic_blocks(128).iter().map(|&k| block_weight_at(r, k)).sum();
            assert!((s - 1.0).abs() < 1e-15, "{r} {s}");
        }
    }

    #[test]
    fn comparisons() {
        let t = Threshold::DESK;
        assert!(t.much_less(1.0, 8.0));
        assert!(!t.much_less(2.0, 8.0));
        assert!(t.comparable(2.0, 8.0));
        assert!(Threshold::WIDE.much_less(1.0, 4096.0));
    }
}
