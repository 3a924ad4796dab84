//! Periodized grids.
//!
//! A grid lives on the torus `[0, 2πP)^n` with `M` samples per axis, so the
//! spacing is `h = 2πP/M` and the frequency lattice is `{m/P : m ∈ [−M/2, M/2)}`
//! per axis. Integer frequencies are always lattice points, which keeps the
//! unit frequency boxes aligned with the lattice.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Hard cap on `M^n`; grids above this are rejected at construction.
pub const MAX_TOTAL_SAMPLES: usize = 1 << 24;

/// Lattice box index `k ∈ Z^n`. Axes beyond the grid dimension are zero.
pub type BoxIndex = [i64; 3];

/// Validated grid: dimension `n`, period multiplier `P`, samples per axis `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n: usize,
    period: u32,
    samples_per_axis: usize,
}

impl GridSpec {
    /// Build a grid, validating `1 ≤ n ≤ 3`, `P ≥ 1`, even `M ≥ 8`, and the
    /// total-sample memory cap.
    pub fn new(n: usize, period: u32, samples_per_axis: usize) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidGrid(format!("dimension n = {n} outside 1..=3")));
        }
        if period < 1 {
            return Err(Error::InvalidGrid("period multiplier P must be >= 1".into()));
        }
        if samples_per_axis % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "samples per axis M = {samples_per_axis} must be even"
            )));
        }
        if samples_per_axis < 8 {
            return Err(Error::InvalidGrid(format!(
                "samples per axis M = {samples_per_axis} must be >= 8"
            )));
        }
        let total = samples_per_axis
            .checked_pow(n as u32)
            .ok_or_else(|| Error::InvalidGrid("M^n overflows usize".into()))?;
        if total > MAX_TOTAL_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "M^n = {total} exceeds memory cap {MAX_TOTAL_SAMPLES}"
            )));
        }
        Ok(Self { n, period, samples_per_axis })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn samples_per_axis(&self) -> usize {
        self.samples_per_axis
    }

    pub fn total_samples(&self) -> usize {
        self.samples_per_axis.pow(self.n as u32)
    }

    /// Box side length `L = 2πP`.
    pub fn box_side(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.period as f64
    }

    /// Grid spacing `h = L/M`.
    pub fn spacing(&self) -> f64 {
        self.box_side() / self.samples_per_axis as f64
    }

    /// Largest representable frequency magnitude per axis, `M/(2P)`.
    pub fn max_freq(&self) -> f64 {
        self.samples_per_axis as f64 / (2.0 * self.period as f64)
    }

    /// Largest box radius `K` with `K + 1 ≤ M/(2P)`, i.e. the largest radius
    /// whose window support still fits inside the Nyquist band.
    pub fn max_box_radius(&self) -> i64 {
        (self.samples_per_axis as i64) / (2 * self.period as i64) - 1
    }

    /// Integer mode of a per-axis storage position (FFT order):
    /// `a ∈ [0, M/2)` maps to `a`, the rest to `a − M`.
    pub fn mode_of_pos(&self, pos: usize) -> i64 {
        let m = self.samples_per_axis as i64;
        let a = pos as i64;
        if a < m / 2 {
            a
        } else {
            a - m
        }
    }

    /// Per-axis storage position of an integer mode in `[−M/2, M/2)`.
    pub fn pos_of_mode(&self, mode: i64) -> Option<usize> {
        let m = self.samples_per_axis as i64;
        if mode < -m / 2 || mode >= m / 2 {
            return None;
        }
        Some(if mode >= 0 { mode as usize } else { (mode + m) as usize })
    }

    /// Frequency value of an integer mode: `ξ = m/P`.
    pub fn freq_of_mode(&self, mode: i64) -> f64 {
        mode as f64 / self.period as f64
    }

    /// Decode a flat row-major index into per-axis positions.
    pub fn decode(&self, flat: usize) -> [usize; 3] {
        let m = self.samples_per_axis;
        let mut out = [0usize; 3];
        let mut rest = flat;
        for axis in (0..self.n).rev() {
            out[axis] = rest % m;
            rest /= m;
        }
        out
    }

    /// Encode per-axis positions into a flat row-major index.
    pub fn encode(&self, pos: &[usize; 3]) -> usize {
        let m = self.samples_per_axis;
        let mut flat = 0usize;
        for axis in 0..self.n {
            flat = flat * m + pos[axis];
        }
        flat
    }

    /// Integer modes of the lattice point at a flat index, padded with zeros.
    pub fn modes_at(&self, flat: usize) -> [i64; 3] {
        let pos = self.decode(flat);
        let mut modes = [0i64; 3];
        for axis in 0..self.n {
            modes[axis] = self.mode_of_pos(pos[axis]);
        }
        modes
    }

    /// Frequency vector `ξ_m` at a flat index, padded with zeros.
    pub fn freq_at(&self, flat: usize) -> [f64; 3] {
        let modes = self.modes_at(flat);
        let mut xi = [0.0f64; 3];
        for axis in 0..self.n {
            xi[axis] = self.freq_of_mode(modes[axis]);
        }
        xi
    }

    /// `|ξ|²` at a flat index.
    pub fn freq_norm_sq_at(&self, flat: usize) -> f64 {
        let xi = self.freq_at(flat);
        xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]
    }

    /// Spatial sample point `x_j = j·h` per axis, padded with zeros.
    pub fn point_at(&self, flat: usize) -> [f64; 3] {
        let pos = self.decode(flat);
        let h = self.spacing();
        let mut x = [0.0f64; 3];
        for axis in 0..self.n {
            x[axis] = pos[axis] as f64 * h;
        }
        x
    }

    /// Sample point wrapped to the centered box `[−L/2, L/2)` per axis.
    pub fn centered_point_at(&self, flat: usize) -> [f64; 3] {
        let l = self.box_side();
        let mut x = self.point_at(flat);
        for axis in 0..self.n {
            if x[axis] >= l / 2.0 {
                x[axis] -= l;
            }
        }
        x
    }
}

/// All lattice box indices with `|k|_∞ ≤ radius` for dimension `n`, in
/// lexicographic order. Axes beyond `n` stay zero.
pub fn lattice_boxes(n: usize, radius: i64) -> Vec<BoxIndex> {
    assert!((1..=3).contains(&n), "dimension out of range");
    let side: Vec<i64> = (-radius..=radius).collect();
    let mut out = Vec::new();
    match n {
        1 => {
            for &a in &side {
                out.push([a, 0, 0]);
            }
        }
        2 => {
            for &a in &side {
                for &b in &side {
                    out.push([a, b, 0]);
                }
            }
        }
        _ => {
            for &a in &side {
                for &b in &side {
                    for &c in &side {
                        out.push([a, b, c]);
                    }
                }
            }
        }
    }
    out
}

/// `|k|_∞` of a box index over the first `n` axes.
pub fn box_sup_norm(k: &BoxIndex, n: usize) -> i64 {
    (0..n).map(|i| k[i].abs()).max().unwrap_or(0)
}

/// Euclidean `|k|` of a box index over the first `n` axes.
pub fn box_euclid_norm(k: &BoxIndex, n: usize) -> f64 {
    ((0..n).map(|i| (k[i] * k[i]) as f64).sum::<f64>()).sqrt()
}

/// Japanese bracket `⟨k⟩ = √(1 + |k|²)`.
pub fn bracket(k: &BoxIndex, n: usize) -> f64 {
    (1.0 + (0..n).map(|i| (k[i] * k[i]) as f64).sum::<f64>()).sqrt()
}
