//! Window functions for the frequency-uniform (box) decomposition.
//!
//! A window is a 1-D factor `g` translated to every integer `k`; the n-D
//! symbol is the tensor product `φ_k(ξ) = Π_a g(ξ_a − k_a)`. Both windows
//! here satisfy the exact partition of unity `Σ_k g(t − k) = 1`.

use serde::{Deserialize, Serialize};

use crate::grid::BoxIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Window {
    /// Smooth bump `g(t) = S(1 − |t|)` on `|t| ≤ 1` with the cosine ramp
    /// `S(x) = (1 − cos πx)/2`; adjacent translates overlap and the ramps
    /// sum to one exactly.
    RaisedCosine,
    /// Indicator of the half-open unit box `[−1/2, 1/2)`; ties at the right
    /// edge belong to the next box up.
    Sharp,
}

impl Window {
    /// The 1-D factor `g(t)`.
    pub fn factor(self, t: f64) -> f64 {
        match self {
            Window::RaisedCosine => {
                let a = t.abs();
                if a >= 1.0 {
                    0.0
                } else {
                    0.5 * (1.0 - (std::f64::consts::PI * (1.0 - a)).cos())
                }
            }
            Window::Sharp => {
                if (-0.5..0.5).contains(&t) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Tensor-product symbol `φ_k(ξ)` over the first `n` axes.
    pub fn phi(self, xi: &[f64; 3], k: &BoxIndex, n: usize) -> f64 {
        let mut prod = 1.0;
        for axis in 0..n {
            prod *= self.factor(xi[axis] - k[axis] as f64);
            if prod == 0.0 {
                return 0.0;
            }
        }
        prod
    }

    /// Per-axis reach of the factor: boxes with `|ξ_a − k_a| ≥` this value
    /// on some axis receive nothing from `ξ`.
    pub fn support_radius(self) -> f64 {
        match self {
            Window::RaisedCosine => 1.0,
            Window::Sharp => 0.5,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn raised_cosine_anchor_values() {
        let w = Window::RaisedCosine;
        assert!((w.factor(0.0) - 1.0).abs() <= 1e-15);
        assert!(w.factor(1.0).abs() <= 1e-15);
        assert!(w.factor(-1.0).abs() <= 1e-15);
        assert!((w.factor(0.5) - 0.5).abs() <= 1e-15);
        assert!((w.factor(-0.5) - 0.5).abs() <= 1e-15);
        assert!(w.factor(1.7).abs() == 0.0);
    }

    #[test]
    fn sharp_tie_goes_up() {
        let w = Window::Sharp;
        assert_eq!(w.factor(-0.5), 1.0);
        assert_eq!(w.factor(0.5), 0.0);
        assert_eq!(w.factor(0.0), 1.0);
        assert_eq!(w.factor(0.49999), 1.0);
    }

    #[test]
    fn partition_of_unity_on_fine_mesh() {
        for w in [Window::RaisedCosine, Window::Sharp] {
            for i in 0..=4000 {
                let t = -2.0 + 4.0 * i as f64 / 4000.0;
                let sum: f64 = (-4..=4).map(|k| w.factor(t - k as f64)).sum();
                assert!((sum - 1.0).abs() <= 1e-15, "{w:?} at t = {t}: {sum}");
            }
        }
    }

    #[test]
    fn tensor_product_in_2d() {
        let w = Window::RaisedCosine;
        let xi = [0.5, 0.25, 0.0];
        let phi = w.phi(&xi, &[0, 0, 0], 2);
        let expect = w.factor(0.5) * w.factor(0.25);
        assert!((phi - expect).abs() <= 1e-15);
    }
}
