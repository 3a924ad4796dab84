//! Complex fields on a periodized grid and their Fourier coefficients.
//!
//! Normalization convention:
//!
//! ```text
//! f(x_j) = Σ_m c_m e^{i ξ_m · x_j},      c_m = M^{−n} Σ_j f(x_j) e^{−i ξ_m · x_j}
//! ```
//!
//! which makes single modes exact and gives the Parseval identity
//! `h^n Σ_j |f(x_j)|² = L^n Σ_m |c_m|²`.

use num_complex::Complex64;

use crate::error::Error;
use crate::fft::transform_nd;
use crate::grid::GridSpec;
use crate::Result;

/// Spatial samples on a grid, row-major over axes. Immutable after build.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

/// Fourier coefficients on the frequency lattice, stored in FFT order
/// (per-axis positions `0..M` mapping to modes `0..M/2, −M/2..−1`).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.total_samples() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match M^n = {}",
                samples.len(),
                grid.total_samples()
            )));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.total_samples();
        Self { grid, samples: vec![Complex64::ZERO; len] }
    }

    /// Constant field `f ≡ c`.
    pub fn constant(grid: GridSpec, value: Complex64) -> Self {
        let len = grid.total_samples();
        Self { grid, samples: vec![value; len] }
    }

    /// Sample a function of the raw grid coordinate `x_j ∈ [0, L)^n`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64; 3]) -> Complex64) -> Self {
        let samples = (0..grid.total_samples()).map(|j| f(&grid.point_at(j))).collect();
        Self { grid, samples }
    }

    /// Sample a function of the centered coordinate `x ∈ [−L/2, L/2)^n`.
    ///
    /// This is the natural way to put a decaying function of `R^n` on the
    /// torus: its spatial mass must sit inside one period box.
    pub fn from_fn_centered(grid: GridSpec, f: impl Fn(&[f64; 3]) -> Complex64) -> Self {
        let samples =
            (0..grid.total_samples()).map(|j| f(&grid.centered_point_at(j))).collect();
        Self { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    /// Forward transform under the coefficients-sum convention.
    pub fn fft(&self) -> SpectralField {
        let g = self.grid;
        let mut coeffs = self.samples.clone();
        transform_nd(&mut coeffs, g.dim(), g.samples_per_axis(), true);
        let scale = 1.0 / g.total_samples() as f64;
        for c in &mut coeffs {
            *c *= scale;
        }
        SpectralField { grid: g, coeffs }
    }

    /// Quadrature norm `(h^n Σ_j |f_j|^p)^{1/p}`, with `p = ∞` the sample max.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::InvalidExponent { name: "p", value: p });
        }
        if p.is_infinite() {
            return Ok(self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max));
        }
        let h = self.grid.spacing();
        let measure = h.powi(self.grid.dim() as i32);
        if p == 2.0 {
            let sum: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
            return Ok((measure * sum).sqrt());
        }
        let sum: f64 = self.samples.iter().map(|z| z.norm().powf(p)).sum();
        Ok((measure * sum).powf(1.0 / p))
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Ok(Field { grid: self.grid, samples })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect();
        Ok(Field { grid: self.grid, samples })
    }

    pub fn scaled(&self, factor: Complex64) -> Field {
        let samples = self.samples.iter().map(|a| a * factor).collect();
        Field { grid: self.grid, samples }
    }

    /// In-place `self += factor · other`.
    pub fn axpy(&mut self, factor: Complex64, other: &Field) -> Result<()> {
        self.check_same_grid(other)?;
        for (a, b) in self.samples.iter_mut().zip(&other.samples) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Pointwise `k`-th power of the samples (no dealiasing; see the solver
    /// for the band-exact version).
    pub fn pow_pointwise(&self, k: u32) -> Field {
        let samples = self.samples.iter().map(|z| z.powu(k)).collect();
        Field { grid: self.grid, samples }
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs {:?}",
                self.grid, other.grid
            )));
        }
        Ok(())
    }
}

impl SpectralField {
    pub fn new(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.total_samples() {
            return Err(Error::InvalidGrid(format!(
                "coefficient count {} does not match M^n = {}",
                coeffs.len(),
                grid.total_samples()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let len = grid.total_samples();
        Self { grid, coeffs: vec![Complex64::ZERO; len] }
    }

    /// Place `amplitude` at the single lattice mode `modes` (per-axis integer
    /// indices, so frequency `ξ = modes/P`).
    pub fn delta(grid: GridSpec, modes: &[i64; 3], amplitude: Complex64) -> Result<Self> {
        let mut out = Self::zeros(grid);
        out.add_mode(modes, amplitude)?;
        Ok(out)
    }

    /// Add `amplitude` at a lattice mode.
    pub fn add_mode(&mut self, modes: &[i64; 3], amplitude: Complex64) -> Result<()> {
        let mut pos = [0usize; 3];
        for axis in 0..self.grid.dim() {
            pos[axis] = self.grid.pos_of_mode(modes[axis]).ok_or_else(|| {
                Error::BandOverflow(format!(
                    "mode {} outside [−M/2, M/2) for M = {}",
                    modes[axis],
                    self.grid.samples_per_axis()
                ))
            })?;
        }
        let flat = self.grid.encode(&pos);
        self.coeffs[flat] += amplitude;
        Ok(())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient at a lattice mode, `None` outside the band.
    pub fn coeff_at(&self, modes: &[i64; 3]) -> Option<Complex64> {
        let mut pos = [0usize; 3];
        for axis in 0..self.grid.dim() {
            pos[axis] = self.grid.pos_of_mode(modes[axis])?;
        }
        Some(self.coeffs[self.grid.encode(&pos)])
    }

    /// Inverse transform back to spatial samples.
    pub fn ifft(&self) -> Field {
        let g = self.grid;
        let mut samples = self.coeffs.clone();
        transform_nd(&mut samples, g.dim(), g.samples_per_axis(), false);
        Field { grid: g, samples }
    }

    /// Multiply every coefficient by `weight(flat index)`.
    pub fn multiplied(&self, weight: impl Fn(usize) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c * weight(j))
            .collect();
        SpectralField { grid: self.grid, coeffs }
    }

    /// Spectral `L²` norm `(L^n Σ_m |c_m|²)^{1/2}`; equals the quadrature
    /// `L²` norm by Parseval.
    pub fn l2_norm(&self) -> f64 {
        let l = self.grid.box_side().powi(self.grid.dim() as i32);
        (l * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// Forward transform: spatial samples to lattice coefficients.
pub fn fft_forward(f: &Field) -> SpectralField {
    f.fft()
}

/// Inverse transform: lattice coefficients to spatial samples.
pub fn fft_inverse(c: &SpectralField) -> Field {
    c.ifft()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::testutil::random_field;
    use proptest::prelude::*;

    fn grid1(m: usize) -> GridSpec {
        GridSpec::new(1, 1, m).unwrap()
    }

    #[test]
    fn single_mode_forward() {
        let g = grid1(16);
        let f = Field::from_fn(g, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        let c = f.fft();
        for flat in 0..g.total_samples() {
            let expect = if g.modes_at(flat)[0] == 3 { 1.0 } else { 0.0 };
            assert!((c.coeffs()[flat] - Complex64::new(expect, 0.0)).norm() <= 1e-12);
        }
    }

    #[test]
    fn constant_field_forward() {
        let g = grid1(16);
        let f = Field::constant(g, Complex64::new(2.0, 0.0));
        let c = f.fft();
        assert!((c.coeff_at(&[0, 0, 0]).unwrap() - Complex64::new(2.0, 0.0)).norm() <= 1e-13);
        let off: f64 = c
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != 0)
            .map(|(_, z)| z.norm())
            .sum();
        assert!(off <= 1e-12);
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid1(16);
        let two_pi = 2.0 * std::f64::consts::PI;
        let f = Field::constant(g, Complex64::new(1.0, 0.0));
        assert!((f.lp_norm(2.0).unwrap() - two_pi.sqrt()).abs() <= 1e-12);

        let mode = Field::from_fn(g, |x| Complex64::new(0.0, 3.0 * x[0]).exp());
        for p in [1.0, 2.0, 3.5, 8.0] {
            assert!((mode.lp_norm(p).unwrap() - two_pi.powf(1.0 / p)).abs() <= 1e-12);
        }
        assert!((mode.lp_norm(f64::INFINITY).unwrap() - 1.0).abs() <= 1e-12);
        assert!(mode.lp_norm(0.5).is_err());
    }

    // Oracle: the Gaussian L² norm by high-resolution midpoint quadrature of
    // the closed-form integrand, independent of Field/GridSpec code.
    fn gaussian_l2_oracle() -> f64 {
        let (a, b, steps) = (-16.0 * std::f64::consts::PI, 16.0 * std::f64::consts::PI, 1 << 21);
        let dx = (b - a) / steps as f64;
        let sum: f64 = (0..steps)
            .map(|i| {
                let x: f64 = a + (i as f64 + 0.5) * dx;
                (-2.0 * x * x).exp()
            })
            .sum();
        (sum * dx).sqrt()
    }

    #[test]
    fn gaussian_l2_matches_oracle() {
        let oracle = gaussian_l2_oracle();
        let analytic = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((oracle - analytic).abs() <= 1e-10, "oracle {oracle} vs analytic {analytic}");

        let g = GridSpec::new(1, 4, 512).unwrap();
        let f = Field::from_fn_centered(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        assert!((f.lp_norm(2.0).unwrap() - analytic).abs() <= 1e-8);
    }

    #[test]
    fn resolution_stability_of_quadrature_norms() {
        // Band-limited field with |f| bounded away from zero, so |f|^p is
        // analytic and the periodic quadrature error is far below 1e-10.
        let build = |m: usize| {
            let mut c = SpectralField::zeros(grid1(m));
            c.add_mode(&[0, 0, 0], Complex64::new(3.0, 0.0)).unwrap();
            c.add_mode(&[1, 0, 0], Complex64::new(1.0, 0.2)).unwrap();
            c.add_mode(&[2, 0, 0], Complex64::new(0.5, -0.1)).unwrap();
            c.ifft()
        };
        let coarse = build(64);
        let fine = build(128);
        for p in [1.0, 2.0, 4.0] {
            let a = coarse.lp_norm(p).unwrap();
            let b = fine.lp_norm(p).unwrap();
            assert!((a - b).abs() / b.abs() <= 1e-10, "p = {p}: {a} vs {b}");
        }
        // Sup norm compares exactly for a unimodular envelope.
        let mode = |m: usize| {
            Field::from_fn(grid1(m), |x| Complex64::new(0.0, 3.0 * x[0]).exp())
        };
        let a = mode(64).lp_norm(f64::INFINITY).unwrap();
        let b = mode(128).lp_norm(f64::INFINITY).unwrap();
        assert!((a - b).abs() <= 1e-10);
    }

    proptest! {
        #[test]
        fn roundtrip_is_identity(seed in 0u64..256) {
            let g = grid1(32);
            let f = random_field(g, seed);
            let back = f.fft().ifft();
            let num = back.sub(&f).unwrap().lp_norm(2.0).unwrap();
            let den = f.lp_norm(2.0).unwrap();
            prop_assert!(num <= 1e-12 * den.max(1.0));
        }

        #[test]
        fn parseval_identity(seed in 0u64..256) {
            let g = GridSpec::new(2, 1, 8).unwrap();
            let f = random_field(g, seed);
            let spatial = f.lp_norm(2.0).unwrap();
            let spectral = f.fft().l2_norm();
            prop_assert!((spatial - spectral).abs() <= 1e-12 * spatial.max(1.0));
        }

        #[test]
        fn lp_norm_absolutely_homogeneous(seed in 0u64..64, lam in -4.0f64..4.0, p in 1.0f64..6.0) {
            let g = grid1(16);
            let f = random_field(g, seed);
            let scaled = f.scaled(Complex64::new(lam, 0.0));
            let lhs = scaled.lp_norm(p).unwrap();
            let rhs = lam.abs() * f.lp_norm(p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
