//! Frequency-uniform (box) decomposition: project a field onto unit
//! frequency cubes around lattice points and reassemble it.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::field::{Field, SpectralField};
use crate::grid::{lattice_boxes, BoxIndex, GridSpec};
use crate::window::Window;
use crate::Result;

/// All pieces `□_k f` for `|k|_∞ ≤ k_max`, in the lexicographic box order
/// of [`lattice_boxes`].
#[derive(Debug, Clone)]
pub struct Decomposition {
    grid: GridSpec,
    window: Window,
    k_max: i64,
    boxes: Vec<BoxIndex>,
    pieces: Vec<Field>,
}

/// Per-axis window factor tables evaluated on the grid's frequency lattice,
/// so the n-D symbol at a flat spectral index is a product of table lookups.
pub(crate) fn box_weight_tables(grid: &GridSpec, w: Window, k: &BoxIndex) -> Vec<Vec<f64>> {
    (0..grid.dim())
        .map(|axis| {
            (0..grid.samples_per_axis())
                .map(|pos| w.factor(grid.freq_of_mode(grid.mode_of_pos(pos)) - k[axis] as f64))
                .collect()
        })
        .collect()
}

pub(crate) fn apply_box_weights(c: &SpectralField, tables: &[Vec<f64>]) -> SpectralField {
    let grid = *c.grid();
    let n = grid.dim();
    let mut out = c.clone();
    for (flat, z) in out.coeffs_mut().iter_mut().enumerate() {
        let pos = grid.decode(flat);
        let mut weight = 1.0;
        for axis in 0..n {
            weight *= tables[axis][pos[axis]];
        }
        *z *= weight;
    }
    out
}

fn check_box_in_range(grid: &GridSpec, k: &BoxIndex) -> Result<()> {
    let k_max = grid.max_box_radius();
    if (0..grid.dim()).any(|a| k[a].abs() > k_max) {
        return Err(Error::BoxOutOfRange { index: *k, k_max });
    }
    Ok(())
}

/// Spectral-side projection `φ(·−k)·𝓕f`.
pub(crate) fn box_project_coeffs(
    c: &SpectralField,
    k: &BoxIndex,
    w: Window,
) -> Result<SpectralField> {
    check_box_in_range(c.grid(), k)?;
    Ok(apply_box_weights(c, &box_weight_tables(c.grid(), w, k)))
}

/// The piece `□_k f = 𝓕^{−1}(φ(·−k)·𝓕f)`.
pub fn box_project(f: &Field, k: &BoxIndex, w: Window) -> Result<Field> {
    Ok(box_project_coeffs(&f.fft(), k, w)?.ifft())
}

/// Decompose `f` into all pieces with `|k|_∞ ≤ k_max`.
///
/// Requires `k_max + 1 ≤ M/(2P)` so every window translate is fully inside
/// the Nyquist band; under that condition the pieces reconstruct any field
/// band-limited to `|ξ|_∞ ≤ k_max − 1` exactly (up to roundoff).
pub fn decompose(f: &Field, w: Window, k_max: i64) -> Result<Decomposition> {
    let grid = *f.grid();
    if k_max < 0 || k_max > grid.max_box_radius() {
        return Err(Error::KmaxTooLarge { k_max, band: grid.max_freq() });
    }
    let spectrum = f.fft();
    let boxes = lattice_boxes(grid.dim(), k_max);
    let pieces: Vec<Field> = boxes
        .par_iter()
        .map(|k| {
            apply_box_weights(&spectrum, &box_weight_tables(&grid, w, k)).ifft()
        })
        .collect();
    Ok(Decomposition { grid, window: w, k_max, boxes, pieces })
}

impl Decomposition {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Boxes in storage order.
    pub fn boxes(&self) -> &[BoxIndex] {
        &self.boxes
    }

    pub fn pieces(&self) -> &[Field] {
        &self.pieces
    }

    /// The piece for box `k`, if `|k|_∞ ≤ k_max`.
    pub fn piece(&self, k: &BoxIndex) -> Option<&Field> {
        let side = 2 * self.k_max + 1;
        let mut flat = 0i64;
        for axis in 0..self.grid.dim() {
            let off = k[axis] + self.k_max;
            if !(0..side).contains(&off) {
                return None;
            }
            flat = flat * side + off;
        }
        self.pieces.get(flat as usize)
    }

    /// `Σ_k □_k f`.
    pub fn reconstruct(&self) -> Field {
        let mut acc = Field::zeros(self.grid);
        for piece in &self.pieces {
            acc.axpy(Complex64::new(1.0, 0.0), piece).expect("pieces share the grid");
        }
        acc
    }
}
