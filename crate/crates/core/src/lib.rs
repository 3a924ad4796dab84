//! Spectral numerics on periodized grids with frequency-uniform decomposition.
//!
//! The library computes modulation-space quantities for discretized fields:
//!
//! - [`grid`] / [`field`]: periodized grids `[0, 2πP)^n`, complex fields, the
//!   forward/inverse Fourier transform pair, and `L^p` quadrature norms;
//! - [`window`] / [`decompose`]: the partition-of-unity window `φ` and the
//!   frequency-box projections `□_k = F⁻¹ φ(·−k) F`;
//! - [`modnorm`]: the norm `‖f‖ = (Σ_k ⟨k⟩^{sq} ‖□_k f‖_p^q)^{1/q}`, the index
//!   `σ(s,q) = s − n(1−1/q)`, and the Bessel multiplier `(I−Δ)^{σ/2}`;
//! - [`classify`]: well/ill-posedness verdicts for `u_t + (−Δ)^{α/2} u = u^k`
//!   and related dispersive model equations, as pure threshold arithmetic;
//! - [`propagator`]: Fourier-multiplier semigroups (fractional heat,
//!   Schrödinger, Klein–Gordon cosine/sinc) with per-box decay checks;
//! - [`solver`]: dealiased powers, Duhamel quadrature, whole-interval Picard
//!   iteration, and exponential time differencing;
//! - [`probes`]: experiment harnesses that measure smoothing rates, product
//!   estimate constants, and norm-inflation exponents, with log–log slope fits.

pub mod classify;
pub mod decompose;
pub mod error;
pub mod field;
pub mod fft;
pub mod grid;
pub mod io;
pub mod modnorm;
pub mod probes;
pub mod propagator;
pub mod quadrature;
pub mod solver;
pub mod window;

#[cfg(test)]
pub(crate) mod testutil;

pub use classify::{classify, embedding_predicate, Embedding, Equation, Status, Verdict};
pub use decompose::{box_project, decompose, Decomposition};
pub use error::Error;
pub use field::{Field, SpectralField};
pub use grid::{BoxIndex, GridSpec};
pub use modnorm::{
    apply_bessel, modulation_breakdown, modulation_norm, modulation_norm_of_coeffs, sigma_index,
    spectral_tail_mass, ModulationParams,
};
pub use probes::{
    build_inflation_data, fit_slope, inflation_probe, inflation_witness, log_spaced,
    product_probe, smoothing_probe, InflationCase, InflationConfig, InflationPoint,
    InflationReport, ProductConfig, ProductLaw, ProductPoint, ProductReport, SlopeCheck,
    SlopeFit, SlopeVerdict, SmoothingConfig, SmoothingPoint, SmoothingReport,
};
pub use propagator::{box_decay_check, kg_free_evolution, propagate, BoxDecay, PropagatorSpec};
pub use solver::{
    duhamel, duhamel_residual, etd_solve, picard_correction, picard_solve, pow_dealiased,
    BlowupInfo, EvolveConfig, SolveDiagnostics, SolveMode, TimeGridKind, Trajectory,
};
pub use window::Window;

/// Result alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
