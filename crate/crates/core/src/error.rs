//! Error type shared by all modules.

use thiserror::Error;

/// Errors reported by grid construction, transforms, norms, solvers and probes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid norm exponent {name} = {value}; require {name} >= 1")]
    InvalidExponent { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("box index {index:?} outside active range |k|_inf <= {k_max}")]
    BoxOutOfRange { index: [i64; 3], k_max: i64 },

    #[error("K_max = {k_max} too large for grid: need K_max + 1 <= M/(2P) = {band:.3}")]
    KmaxTooLarge { k_max: i64, band: f64 },

    #[error("dealias factor {factor} insufficient for power k = {k}; need >= {needed}")]
    InsufficientHeadroom { factor: f64, k: u32, needed: f64 },

    #[error("frequency band overflow: {0}")]
    BandOverflow(String),

    #[error("quadrature requires at least one node, got {0}")]
    InvalidQuadrature(usize),

    #[error(
        "Picard iteration did not converge in {iterations} iterations \
         (last sup-norm difference {last_diff:.3e}); horizon or data too large for contraction"
    )]
    NonConvergence { iterations: usize, last_diff: f64 },

    #[error("probe needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("degenerate abscissae: all x values coincide")]
    DegenerateAbscissae,

    #[error("log-log fit requires positive values, got ({x}, {y})")]
    NonPositiveSample { x: f64, y: f64 },

    #[error("field file: {0}")]
    FieldFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
