//! Shared helpers for unit tests: seeded random fields.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};

use crate::field::{Field, SpectralField};
use crate::grid::GridSpec;

/// Uniform random complex samples in the unit square, seeded.
pub(crate) fn random_field(grid: GridSpec, seed: u64) -> Field {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..grid.total_samples())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    Field::new(grid, samples).unwrap()
}

/// Random coefficients on modes with per-axis frequency `|ξ_a| ≤ band`,
/// zero elsewhere.
pub(crate) fn random_band_limited(grid: GridSpec, band: f64, seed: u64) -> Field {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut c = SpectralField::zeros(grid);
    let limit = (band * grid.period() as f64).floor() as i64;
    for flat in 0..grid.total_samples() {
        let m = grid.modes_at(flat);
        if (0..grid.dim()).all(|a| m[a].abs() <= limit) {
            c.coeffs_mut()[flat] =
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    c.ifft()
}
