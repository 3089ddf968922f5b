use crate::spectral::{mode_norm, Mode};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Component {
    Time,
    Spatial(usize, usize),
}

/// `E[A^alpha(t, k) A^beta(t', l)]` in closed form.
///
/// The time component carries `-4 sin(t|k|) - 4 sin(t'|k|)`, the value of
/// `|k|^-2 int_0^{t^t'} (1 - cos((t-s)|k|)) (1 - cos((t'-s)|k|)) ds`.
pub fn cov_a_closed(component: Component, k: Mode, l: Mode, t: f64, tp: f64) -> f64 {
    let paired = k[0] + l[0] == 0 && k[1] + l[1] == 0;
    if !paired {
        return 0.0;
    }
    let lo = t.min(tp);
    let hi = t.max(tp);
    let zero = k == [0, 0];
    match component {
        Component::Time => {
            if zero {
                return 0.0;
            }
            let w = mode_norm(k);
            (lo * (1.0 + 0.5 * ((t - tp) * w).cos()) + ((t + tp) * w).sin() / (4.0 * w) - ((t * w).sin() + (tp * w).sin()) / w
                + 3.0 * ((hi - lo) * w).sin() / (4.0 * w))
                / (w * w)
        }
        Component::Spatial(a, b) => {
            if a != b {
                return 0.0;
            }
            if zero {
                return lo * lo * (0.5 * hi - lo / 6.0);
            }
            let w = mode_norm(k);
            (lo * ((t - tp) * w).cos() + (((hi - lo) * w).sin() - ((t + tp) * w).sin()) / (2.0 * w)) / (2.0 * w * w)
        }
    }
}
