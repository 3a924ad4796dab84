//! Experiment harness:
//!
//! * norm-inflation probes — frequency-localized data families, the Duhamel
//!   witness `A(u₀) = ∫₀ᵗ U(t−τ)(U(τ)u₀)^k dτ` at `t = N^{−α}`, and log–log
//!   rate fits against the predicted exponents;
//! * smoothing-rate probes for the fractional heat semigroup;
//! * product-estimate ensembles bounding `‖u^k‖` by norm products;
//! * plain least-squares slope regression used by all of the above.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::field::{Field, SpectralField};
use crate::grid::{bracket, GridSpec};
use crate::modnorm::{
    box_l2_spectral, combine, exponent, modulation_norm_of_coeffs, sigma_index, ModulationParams,
};
use crate::propagator::{propagate, propagate_coeffs, PropagatorSpec};
use crate::solver::{duhamel, pow_dealiased};
use crate::window::Window;
use crate::Result;

// ---------------------------------------------------------------------------
// Slope regression
// ---------------------------------------------------------------------------

/// Least-squares line through the (optionally log–log transformed) points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeVerdict {
    Consistent,
    Inconsistent,
}

/// A fitted slope next to the predicted one, with the tolerance that decided
/// the verdict recorded alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeCheck {
    pub fitted: SlopeFit,
    pub predicted: f64,
    pub tolerance: f64,
    pub verdict: SlopeVerdict,
}

impl SlopeCheck {
    pub fn new(fitted: SlopeFit, predicted: f64, tolerance: f64) -> Self {
        let verdict = if (fitted.slope - predicted).abs() <= tolerance {
            SlopeVerdict::Consistent
        } else {
            SlopeVerdict::Inconsistent
        };
        Self { fitted, predicted, tolerance, verdict }
    }

    fn from_points(points: &[(f64, f64)], predicted: f64, tolerance: f64) -> Result<Self> {
        Ok(Self::new(fit_slope(points, true)?, predicted, tolerance))
    }
}

/// Least-squares slope of `y` against `x` (of `log y` against `log x` when
/// `log_log`); `stderr` is the usual regression standard error of the slope.
pub fn fit_slope(points: &[(f64, f64)], log_log: bool) -> Result<SlopeFit> {
    if points.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: points.len() });
    }
    let data: Vec<(f64, f64)> = if log_log {
        points
            .iter()
            .map(|&(x, y)| {
                if x <= 0.0 || y <= 0.0 || !x.is_finite() || !y.is_finite() {
                    Err(Error::NonPositiveSample { x, y })
                } else {
                    Ok((x.ln(), y.ln()))
                }
            })
            .collect::<Result<_>>()?
    } else {
        points.to_vec()
    };
    let n = data.len() as f64;
    let xbar = data.iter().map(|(x, _)| x).sum::<f64>() / n;
    let ybar = data.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|(x, _)| (x - xbar) * (x - xbar)).sum();
    let scale: f64 = data.iter().map(|(x, _)| x * x).sum::<f64>().max(1.0);
    if sxx <= scale * 1e-24 {
        return Err(Error::DegenerateAbscissae);
    }
    let sxy: f64 = data.iter().map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = data
        .iter()
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = (ssr / ((n - 2.0) * sxx)).sqrt();
    Ok(SlopeFit { slope, stderr, intercept })
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(count >= 2 && lo > 0.0 && hi > lo);
    let step = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (step * i as f64).exp()).collect()
}

/// Lattice points of the cube `center·ē + [−h, h]^n` (all-ones direction
/// over the first `n` axes), in lexicographic order.
fn cube_points(n: usize, center: i64, halfwidth: i64) -> Vec<[i64; 3]> {
    let side = (2 * halfwidth + 1) as usize;
    let total = side.pow(n as u32);
    let mut out = Vec::with_capacity(total);
    for mut counter in 0..total {
        let mut point = [0i64; 3];
        for axis in (0..n).rev() {
            point[axis] = center - halfwidth + (counter % side) as i64;
            counter /= side;
        }
        out.push(point);
    }
    out
}

fn even_grid_samples(band_needed: i64) -> usize {
    ((2 * band_needed + 4).max(8) as usize).next_power_of_two()
}

fn headroom(k: u32) -> f64 {
    (k as f64 + 1.0) / 2.0
}

// ---------------------------------------------------------------------------
// Inflation probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InflationCase {
    /// Two unit cubes at `±N·ē`: fixed mass, escaping frequency.
    One,
    /// Two width-`N` cubes at `±sep·kN·ē`: growing support, separated from
    /// the origin by the `sep` multiplier.
    Two,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InflationConfig {
    pub case: InflationCase,
    pub n: usize,
    pub k: u32,
    pub alpha: f64,
    pub s: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    /// Frequency parameters probed; increasing, at least three.
    pub n_list: Vec<i64>,
    /// Case-two separation multiplier (support sits at `sep·kN`).
    pub sep: i64,
    pub quad_nodes: usize,
    pub window: Window,
    pub tol_input: f64,
    pub tol_output: f64,
    pub tol_exponent: f64,
}

impl InflationConfig {
    pub fn new(case: InflationCase, n: usize, k: u32, alpha: f64, s: f64, q: f64) -> Result<Self> {
        let cfg = Self {
            case,
            n,
            k,
            alpha,
            s,
            q,
            n_list: vec![8, 16, 32, 64],
            sep: 4,
            quad_nodes: 32,
            window: Window::RaisedCosine,
            tol_input: 0.1,
            tol_output: 0.15,
            tol_exponent: 0.2,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 3 {
            return Err(Error::InvalidParameter(format!("dimension {} not in 1..=3", self.n)));
        }
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("power k must be ≥ 2, got {}", self.k)));
        }
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be finite, got {}", self.s)));
        }
        if !(self.q >= 1.0) || self.q.is_infinite() {
            return Err(Error::InvalidExponent { name: "q", value: self.q });
        }
        if self.case == InflationCase::Two && self.sep < 2 {
            return Err(Error::InvalidParameter(format!(
                "sep must be ≥ 2 to separate the data from the origin, got {}",
                self.sep
            )));
        }
        if self.quad_nodes < 4 {
            return Err(Error::InvalidQuadrature(self.quad_nodes));
        }
        if self.n_list.len() < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: self.n_list.len() });
        }
        if self.n_list[0] < 2 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n_list must be strictly increasing with entries ≥ 2".into(),
            ));
        }
        for &tol in [&self.tol_input, &self.tol_output, &self.tol_exponent] {
            if !(tol > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
            }
        }
        Ok(())
    }

    /// Center of the data cubes for parameter `N` (the `+` side).
    fn data_center(&self, big_n: i64) -> i64 {
        match self.case {
            InflationCase::One => big_n,
            InflationCase::Two => self.sep * self.k as i64 * big_n,
        }
    }

    fn data_halfwidth(&self, big_n: i64) -> i64 {
        match self.case {
            InflationCase::One => 1,
            InflationCase::Two => big_n,
        }
    }

    /// Center of the output cluster: the `k`-fold sumset of the `+` cube
    /// sits around `k` times the data center.
    fn output_center(&self, big_n: i64) -> i64 {
        self.k as i64 * self.data_center(big_n)
    }

    /// Near-center box radius: the `+`-side sumset has halfwidth `k` times
    /// the data halfwidth; one extra box absorbs window bleed.
    fn near_radius(&self, big_n: i64) -> i64 {
        self.k as i64 * self.data_halfwidth(big_n) + 1
    }

    fn grid_for(&self, big_n: i64) -> Result<GridSpec> {
        let fmax = self.k as i64 * (self.data_center(big_n) + self.data_halfwidth(big_n));
        GridSpec::new(self.n, 1, even_grid_samples(fmax + self.k as i64))
    }

    fn norm_params(&self) -> Result<ModulationParams> {
        ModulationParams::new(self.s, 2.0, self.q, self.n)
    }

    pub fn predicted_input_slope(&self) -> f64 {
        match self.case {
            InflationCase::One => self.s,
            InflationCase::Two => self.s + self.n as f64 / self.q,
        }
    }

    pub fn predicted_output_slope(&self) -> f64 {
        let n = self.n as f64;
        match self.case {
            InflationCase::One => self.s - self.alpha,
            InflationCase::Two => {
                self.s + n / self.q + (self.k as f64 - 1.0) * n - self.alpha
            }
        }
    }

    /// Predicted growth exponent of `‖A(u₀)‖ / ‖u₀‖^k`.
    pub fn predicted_exponent(&self) -> f64 {
        let km1 = self.k as f64 - 1.0;
        match self.case {
            InflationCase::One => -self.alpha - km1 * self.s,
            InflationCase::Two => -km1 * sigma_index(self.s, self.q, self.n) - self.alpha,
        }
    }
}

/// One measured frequency parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InflationPoint {
    #[serde(rename = "N")]
    pub big_n: i64,
    pub t: f64,
    pub grid_m: usize,
    pub input_norm: f64,
    pub output_total: f64,
    pub output_near: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InflationReport {
    pub config: InflationConfig,
    pub points: Vec<InflationPoint>,
    pub input: SlopeCheck,
    pub output_near: SlopeCheck,
    /// Fitted `output_near` slope minus `k` times the fitted input slope.
    pub inflation_exponent: f64,
    pub predicted_exponent: f64,
    pub exponent_tolerance: f64,
    pub exponent_verdict: SlopeVerdict,
}

/// Data family member: coefficients `1` on two mirrored frequency cubes,
/// giving a real, even field.
pub fn build_inflation_data(cfg: &InflationConfig, big_n: i64) -> Result<Field> {
    cfg.validate()?;
    if !cfg.n_list.contains(&big_n) && big_n < 2 {
        return Err(Error::InvalidParameter(format!("N must be ≥ 2, got {big_n}")));
    }
    let grid = cfg.grid_for(big_n)?;
    let mut c = SpectralField::zeros(grid);
    let center = cfg.data_center(big_n);
    let half = cfg.data_halfwidth(big_n);
    for sign in [1i64, -1] {
        for point in cube_points(cfg.n, sign * center, half) {
            c.add_mode(&point, Complex64::new(1.0, 0.0))?;
        }
    }
    Ok(c.ifft())
}

/// The data together with the witness `A(u₀)` at `t = N^{−α}`, computed by
/// Gauss–Legendre Duhamel quadrature with the forcing evaluated through the
/// exact free propagator (no trajectory interpolation involved).
pub fn inflation_witness(cfg: &InflationConfig, big_n: i64) -> Result<(Field, Field)> {
    let u0 = build_inflation_data(cfg, big_n)?;
    let t = (big_n as f64).powf(-cfg.alpha);
    let spec = PropagatorSpec::FractionalHeat { alpha: cfg.alpha };
    let k = cfg.k;
    let witness = duhamel(
        &spec,
        |tau| pow_dealiased(&propagate(&u0, &spec, tau)?, k, headroom(k)),
        t,
        cfg.quad_nodes,
    )?;
    Ok((u0, witness))
}

/// Modulation norm restricted to boxes `|j − c_N·ē|_∞ ≤ r` around the
/// output cluster (the `+` side only, mirroring the single-cluster lower
/// bound the rates come from).
fn near_center_norm(c: &SpectralField, cfg: &InflationConfig, big_n: i64) -> f64 {
    let center = cfg.output_center(big_n);
    let radius = cfg.near_radius(big_n);
    let terms: Vec<(f64, f64)> = cube_points(cfg.n, center, radius)
        .iter()
        .map(|j| (bracket(j, cfg.n).powf(cfg.s), box_l2_spectral(c, j, cfg.window)))
        .collect();
    combine(terms, cfg.q)
}

pub fn inflation_probe(cfg: &InflationConfig) -> Result<InflationReport> {
    cfg.validate()?;
    let mp = cfg.norm_params()?;
    let points: Vec<InflationPoint> = cfg
        .n_list
        .par_iter()
        .map(|&big_n| -> Result<InflationPoint> {
            let (u0, witness) = inflation_witness(cfg, big_n)?;
            let grid = *u0.grid();
            let k_max = grid.max_box_radius();
            let cu = u0.fft();
            let cw = witness.fft();
            Ok(InflationPoint {
                big_n,
                t: (big_n as f64).powf(-cfg.alpha),
                grid_m: grid.samples_per_axis(),
                input_norm: modulation_norm_of_coeffs(&cu, &mp, cfg.window, k_max)?,
                output_total: modulation_norm_of_coeffs(&cw, &mp, cfg.window, k_max)?,
                output_near: near_center_norm(&cw, cfg, big_n),
            })
        })
        .collect::<Result<_>>()?;

    let input_pts: Vec<(f64, f64)> =
        points.iter().map(|p| (p.big_n as f64, p.input_norm)).collect();
    let near_pts: Vec<(f64, f64)> =
        points.iter().map(|p| (p.big_n as f64, p.output_near)).collect();
    let input = SlopeCheck::from_points(&input_pts, cfg.predicted_input_slope(), cfg.tol_input)?;
    let output_near =
        SlopeCheck::from_points(&near_pts, cfg.predicted_output_slope(), cfg.tol_output)?;
    let inflation_exponent = output_near.fitted.slope - cfg.k as f64 * input.fitted.slope;
    let predicted_exponent = cfg.predicted_exponent();
    let exponent_verdict = if (inflation_exponent - predicted_exponent).abs() <= cfg.tol_exponent {
        SlopeVerdict::Consistent
    } else {
        SlopeVerdict::Inconsistent
    };
    Ok(InflationReport {
        config: cfg.clone(),
        points,
        input,
        output_near,
        inflation_exponent,
        predicted_exponent,
        exponent_tolerance: cfg.tol_exponent,
        exponent_verdict,
    })
}

// ---------------------------------------------------------------------------
// Smoothing probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    pub spec: PropagatorSpec,
    pub s1: f64,
    pub s2: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    /// Single-mode family frequencies (1D).
    pub n_list: Vec<i64>,
    pub t_list: Vec<f64>,
    pub window: Window,
    pub tol: f64,
}

impl SmoothingConfig {
    pub fn new(spec: PropagatorSpec, s1: f64, s2: f64, q: f64) -> Result<Self> {
        let cfg = Self {
            spec,
            s1,
            s2,
            q,
            n_list: (2..=256).collect(),
            t_list: log_spaced(12, 1.0 / 128.0, 1.0 / 8.0),
            window: Window::RaisedCosine,
            tol: 0.1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let PropagatorSpec::FractionalHeat { alpha } = self.spec {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
            }
        }
        if !self.s1.is_finite() || !self.s2.is_finite() || self.s1 < self.s2 {
            return Err(Error::InvalidParameter(format!(
                "need finite s1 ≥ s2, got s1 = {}, s2 = {}",
                self.s1, self.s2
            )));
        }
        if !(self.q >= 1.0) {
            return Err(Error::InvalidExponent { name: "q", value: self.q });
        }
        if self.n_list.len() < 2 {
            return Err(Error::InvalidParameter(
                "family too small to resolve the sup: need ≥ 2 frequencies".into(),
            ));
        }
        if self.n_list[0] < 1 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "n_list must be strictly increasing with entries ≥ 1".into(),
            ));
        }
        if self.t_list.len() < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: self.t_list.len() });
        }
        if self.t_list.iter().any(|&t| !(t > 0.0) || !t.is_finite())
            || self.t_list.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter(
                "t_list must be strictly increasing and positive".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }

    pub fn predicted_slope(&self) -> f64 {
        match self.spec {
            PropagatorSpec::FractionalHeat { alpha } => -(self.s1 - self.s2) / alpha,
            // Unimodular / bounded multipliers smooth nothing.
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmoothingPoint {
    pub t: f64,
    /// `max_N ‖U(t)f_N‖_{M^{s1}_{2,q}} / ‖f_N‖_{M^{s2}_{2,q}}`.
    pub ratio: f64,
    /// Frequency attaining the max; values pinned at the family edge signal
    /// an under-resolved sup.
    pub argmax_n: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmoothingReport {
    pub config: SmoothingConfig,
    pub points: Vec<SmoothingPoint>,
    pub check: SlopeCheck,
}

/// Rate fit for `‖U(t)·‖_{M^{s2}→M^{s1}}` over a single-mode family on a
/// 1D grid sized to hold the largest frequency.
pub fn smoothing_probe(cfg: &SmoothingConfig) -> Result<SmoothingReport> {
    cfg.validate()?;
    let n_max = *cfg.n_list.last().expect("validated nonempty");
    let grid = GridSpec::new(1, 1, even_grid_samples(n_max))?;
    let k_max = grid.max_box_radius();
    let mp_out = ModulationParams::new(cfg.s1, 2.0, cfg.q, 1)?;
    let mp_in = ModulationParams::new(cfg.s2, 2.0, cfg.q, 1)?;

    let family: Vec<(i64, SpectralField, f64)> = cfg
        .n_list
        .iter()
        .map(|&n| -> Result<_> {
            let c = SpectralField::delta(grid, &[n, 0, 0], Complex64::new(1.0, 0.0))?;
            let input = modulation_norm_of_coeffs(&c, &mp_in, cfg.window, k_max)?;
            Ok((n, c, input))
        })
        .collect::<Result<_>>()?;

    let points: Vec<SmoothingPoint> = cfg
        .t_list
        .par_iter()
        .map(|&t| -> Result<SmoothingPoint> {
            let mut best = (f64::NEG_INFINITY, 0i64);
            for (n, c, input) in &family {
                let evolved = propagate_coeffs(c, &cfg.spec, t)?;
                let out = modulation_norm_of_coeffs(&evolved, &mp_out, cfg.window, k_max)?;
                let ratio = out / input;
                if ratio > best.0 {
                    best = (ratio, *n);
                }
            }
            Ok(SmoothingPoint { t, ratio: best.0, argmax_n: best.1 })
        })
        .collect::<Result<_>>()?;

    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.t, p.ratio)).collect();
    let check = SlopeCheck::from_points(&pts, cfg.predicted_slope(), cfg.tol)?;
    Ok(SmoothingReport { config: cfg.clone(), points, check })
}

// ---------------------------------------------------------------------------
// Product probe
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum ProductLaw {
    /// `‖u^k‖_{M^s_{p,q}} ≤ C·‖u‖_{M^s_{p,q1}}·‖u‖_{M^0_{p,q2}}^{k−1}`
    /// under the exponent relation `1/q + k − 1 = 1/q1 + (k−1)/q2`.
    Factored {
        #[serde(with = "exponent")]
        q1: f64,
        #[serde(with = "exponent")]
        q2: f64,
    },
    /// `‖u^k‖_{M^s_{p,q}} ≤ C·‖u‖^k_{M^{s1}_{p,q1}}` for suitable
    /// `(s1, q1)` above `(s, q)`.
    Power {
        s1: f64,
        #[serde(with = "exponent")]
        q1: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductConfig {
    pub law: ProductLaw,
    /// Target norm `M^s_{p,q}` for `u^k`.
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub k: u32,
    pub ensemble_size: usize,
    pub lambda_list: Vec<i64>,
    pub window: Window,
    pub seed: u64,
    pub tol: f64,
}

impl ProductConfig {
    pub fn new(law: ProductLaw, s: f64, p: f64, q: f64, k: u32) -> Result<Self> {
        let cfg = Self {
            law,
            s,
            p,
            q,
            k,
            ensemble_size: 8,
            lambda_list: vec![16, 32, 64],
            window: Window::RaisedCosine,
            seed: 7,
            tol: 0.1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::InvalidParameter(format!("power k must be ≥ 2, got {}", self.k)));
        }
        ModulationParams::new(self.s, self.p, self.q, 1)?;
        if self.ensemble_size < 5 {
            return Err(Error::InvalidParameter(
                "ensemble must have ≥ 5 members (structured members plus randomized ones)".into(),
            ));
        }
        if self.lambda_list.len() < 3 {
            return Err(Error::TooFewPoints { needed: 3, got: self.lambda_list.len() });
        }
        if self.lambda_list[0] < 4 || self.lambda_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "lambda_list must be strictly increasing with entries ≥ 4".into(),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {}", self.tol)));
        }
        let inv = |e: f64| if e.is_infinite() { 0.0 } else { 1.0 / e };
        let km1 = self.k as f64 - 1.0;
        match self.law {
            ProductLaw::Factored { q1, q2 } => {
                if !(q1 >= 1.0) {
                    return Err(Error::InvalidExponent { name: "q1", value: q1 });
                }
                if !(q2 >= 1.0) {
                    return Err(Error::InvalidExponent { name: "q2", value: q2 });
                }
                if self.s < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "factored law needs s ≥ 0, got {}",
                        self.s
                    )));
                }
                let lhs = inv(self.q) + km1;
                let rhs = inv(q1) + km1 * inv(q2);
                if (lhs - rhs).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "exponent relation violated: 1/q + k − 1 = {lhs} but 1/q1 + (k−1)/q2 = {rhs}"
                    )));
                }
            }
            ProductLaw::Power { s1, q1 } => {
                if !(q1 >= 1.0) {
                    return Err(Error::InvalidExponent { name: "q1", value: q1 });
                }
                if q1 > self.q {
                    return Err(Error::InvalidParameter(format!(
                        "power law needs q1 ≤ q, got q1 = {q1}, q = {}",
                        self.q
                    )));
                }
                if !(self.s >= 0.0 && s1 >= self.s && s1 > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power law needs 0 ≤ s ≤ s1 with s1 > 0, got s = {}, s1 = {s1}",
                        self.s
                    )));
                }
                let r = sigma_index(s1, q1, 1) - sigma_index(self.s, self.q, 1);
                if !(r > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "power law needs an index drop σ(s1,q1) − σ(s,q) > 0, got {r}"
                    )));
                }
                if sigma_index(s1, q1, 1) <= -r / km1 {
                    return Err(Error::InvalidParameter(format!(
                        "power law needs σ(s1,q1) > −R/(k−1), got σ = {}, −R/(k−1) = {}",
                        sigma_index(s1, q1, 1),
                        -r / km1
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductPoint {
    pub lambda: i64,
    pub max_ratio: f64,
    pub argmax_member: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProductReport {
    pub config: ProductConfig,
    pub points: Vec<ProductPoint>,
    pub check: SlopeCheck,
}

/// Seeded ensemble member on the band `|m| ≤ Λ` (1D): a few structured
/// extremal candidates, then randomized dense and decaying spectra.
fn ensemble_member(
    grid: GridSpec,
    lambda: i64,
    member: usize,
    seed: u64,
) -> Result<SpectralField> {
    let one = Complex64::new(1.0, 0.0);
    match member {
        0 => SpectralField::delta(grid, &[0, 0, 0], one),
        1 => SpectralField::delta(grid, &[lambda / 2, 0, 0], one),
        2 => SpectralField::delta(grid, &[lambda, 0, 0], one),
        3 => {
            let mut c = SpectralField::delta(grid, &[0, 0, 0], one)?;
            c.add_mode(&[lambda, 0, 0], one)?;
            Ok(c)
        }
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (lambda as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
                    ^ ((member as u64) << 32),
            );
            let decaying = (member - 4) % 2 == 1;
            let mut c = SpectralField::zeros(grid);
            for m in -lambda..=lambda {
                let mut z =
                    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                if decaying {
                    z *= (1.0 + (m * m) as f64).sqrt().recip();
                }
                c.add_mode(&[m, 0, 0], z)?;
            }
            Ok(c)
        }
    }
}

pub fn product_probe(cfg: &ProductConfig) -> Result<ProductReport> {
    cfg.validate()?;
    let mp_target = ModulationParams::new(cfg.s, cfg.p, cfg.q, 1)?;
    let points: Vec<ProductPoint> = cfg
        .lambda_list
        .par_iter()
        .map(|&lambda| -> Result<ProductPoint> {
            let grid = GridSpec::new(1, 1, even_grid_samples(cfg.k as i64 * lambda))?;
            let k_max = grid.max_box_radius();
            let mut best = (f64::NEG_INFINITY, 0usize);
            for member in 0..cfg.ensemble_size {
                let c = ensemble_member(grid, lambda, member, cfg.seed)?;
                let u = c.ifft();
                let powered = pow_dealiased(&u, cfg.k, headroom(cfg.k))?.fft();
                let num = modulation_norm_of_coeffs(&powered, &mp_target, cfg.window, k_max)?;
                let den = match cfg.law {
                    ProductLaw::Factored { q1, q2 } => {
                        let mp1 = ModulationParams::new(cfg.s, cfg.p, q1, 1)?;
                        let mp2 = ModulationParams::new(0.0, cfg.p, q2, 1)?;
                        modulation_norm_of_coeffs(&c, &mp1, cfg.window, k_max)?
                            * modulation_norm_of_coeffs(&c, &mp2, cfg.window, k_max)?
                                .powi(cfg.k as i32 - 1)
                    }
                    ProductLaw::Power { s1, q1 } => {
                        let mp1 = ModulationParams::new(s1, cfg.p, q1, 1)?;
                        modulation_norm_of_coeffs(&c, &mp1, cfg.window, k_max)?
                            .powi(cfg.k as i32)
                    }
                };
                let ratio = num / den;
                if ratio > best.0 {
                    best = (ratio, member);
                }
            }
            Ok(ProductPoint { lambda, max_ratio: best.0, argmax_member: best.1 })
        })
        .collect::<Result<_>>()?;

    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.lambda as f64, p.max_ratio)).collect();
    let check = SlopeCheck::from_points(&pts, 0.0, cfg.tol)?;
    Ok(ProductReport { config: cfg.clone(), points, check })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{picard_correction, EvolveConfig};

    #[test]
    fn fit_slope_recovers_exact_power_law() {
        let pts: Vec<(f64, f64)> =
            [1.0, 2.0, 4.0, 8.0, 16.0].iter().map(|&x: &f64| (x, 7.0 * x.powf(-2.5))).collect();
        let fit = fit_slope(&pts, true).unwrap();
        assert!((fit.slope + 2.5).abs() <= 1e-12, "{}", fit.slope);
        assert!((fit.intercept - 7f64.ln()).abs() <= 1e-12);
        assert!(fit.stderr <= 1e-12);
    }

    #[test]
    fn fit_slope_tolerates_small_perturbation() {
        let pts: Vec<(f64, f64)> = (1..=50)
            .map(|i| {
                let x = i as f64;
                (x, (1.0 + 0.01 * x.sin()) / x)
            })
            .collect();
        let fit = fit_slope(&pts, true).unwrap();
        assert!((fit.slope + 1.0).abs() <= 0.02, "{}", fit.slope);
    }

    #[test]
    fn fit_slope_plain_line() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 + 2.0)).collect();
        let fit = fit_slope(&pts, false).unwrap();
        assert!((fit.slope - 3.0).abs() <= 1e-12 && (fit.intercept - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn fit_slope_error_paths() {
        let two = [(1.0, 1.0), (2.0, 0.5)];
        assert!(matches!(fit_slope(&two, true), Err(Error::TooFewPoints { needed: 3, got: 2 })));
        let flat = [(2.0, 1.0), (2.0, 2.0), (2.0, 3.0)];
        assert!(matches!(fit_slope(&flat, false), Err(Error::DegenerateAbscissae)));
        let neg = [(1.0, 1.0), (2.0, -0.5), (3.0, 0.1)];
        assert!(matches!(fit_slope(&neg, true), Err(Error::NonPositiveSample { .. })));
        assert!(fit_slope(&neg, false).is_ok());
    }

    fn case1_config() -> InflationConfig {
        InflationConfig::new(InflationCase::One, 1, 2, 1.0, -1.5, 2.0).unwrap()
    }

    #[test]
    fn case_one_data_has_six_unit_coefficients() {
        let u0 = build_inflation_data(&case1_config(), 8).unwrap();
        let c = u0.fft();
        let g = c.grid();
        let mut seen = 0;
        for flat in 0..g.total_samples() {
            let m = g.modes_at(flat)[0];
            let z = c.coeffs()[flat];
            if [7i64, 8, 9, -7, -8, -9].contains(&m) {
                assert!((z - Complex64::new(1.0, 0.0)).norm() <= 1e-12, "mode {m}: {z}");
                seen += 1;
            } else {
                assert!(z.norm() <= 1e-12, "mode {m} should be empty: {z}");
            }
        }
        assert_eq!(seen, 6);
        let worst_im =
            u0.samples().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(worst_im <= 1e-12, "field should be real: {worst_im}");
    }

    #[test]
    fn case_two_data_fills_wide_cubes() {
        let mut cfg = InflationConfig::new(InflationCase::Two, 1, 2, 1.0, -0.5, 4.0).unwrap();
        cfg.n_list = vec![4, 8, 16];
        let u0 = build_inflation_data(&cfg, 4).unwrap();
        let c = u0.fft();
        let g = c.grid();
        let mut seen = 0;
        for flat in 0..g.total_samples() {
            let m = g.modes_at(flat)[0];
            let z = c.coeffs()[flat];
            let inside = (28..=36).contains(&m.abs());
            if inside {
                assert!((z - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
                seen += 1;
            } else {
                assert!(z.norm() <= 1e-12, "mode {m}: {z}");
            }
        }
        assert_eq!(seen, 18);
        let worst_im = u0.samples().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        assert!(worst_im <= 1e-12);
    }

    #[test]
    fn case_one_square_has_exact_sumset_support() {
        // (χ₊ + χ₋)² concentrates k-fold tents at ±2N and the cross terms
        // near zero; every count is elementary convolution arithmetic.
        let u0 = build_inflation_data(&case1_config(), 8).unwrap();
        let sq = pow_dealiased(&u0, 2, 1.5).unwrap();
        let c = sq.fft();
        let g = c.grid();
        let expected = |m: i64| -> f64 {
            match m.abs() {
                0 => 6.0,
                1 => 4.0,
                2 => 2.0,
                14 => 1.0,
                15 => 2.0,
                16 => 3.0,
                17 => 2.0,
                18 => 1.0,
                _ => 0.0,
            }
        };
        for flat in 0..g.total_samples() {
            let m = g.modes_at(flat)[0];
            let z = c.coeffs()[flat];
            assert!(
                (z - Complex64::new(expected(m), 0.0)).norm() <= 1e-12,
                "mode {m}: got {z}, expected {}",
                expected(m)
            );
        }
    }

    #[test]
    fn witness_matches_first_picard_correction() {
        let cfg = case1_config();
        let (u0, witness) = inflation_witness(&cfg, 8).unwrap();
        let mut ecfg = EvolveConfig::new(2, 0.125, 1).unwrap();
        ecfg.quad_nodes = cfg.quad_nodes;
        let spec = PropagatorSpec::FractionalHeat { alpha: 1.0 };
        let correction = picard_correction(&u0, &spec, &ecfg).unwrap();
        let diff = witness.sub(&correction).unwrap().lp_norm(2.0).unwrap();
        let scale = witness.lp_norm(2.0).unwrap().max(1.0);
        assert!(diff <= 1e-10 * scale, "witness vs picard correction: {diff}");
    }

    #[test]
    fn inflation_smoke_case_one() {
        let mut cfg = case1_config();
        cfg.n_list = vec![4, 8, 16];
        let report = inflation_probe(&cfg).unwrap();
        assert_eq!(report.points.len(), 3);
        for p in &report.points {
            assert!(p.output_near <= p.output_total * (1.0 + 1e-9), "{p:?}");
            assert!(p.input_norm > 0.0 && p.output_near > 0.0);
        }
        assert_eq!(report.input.verdict, SlopeVerdict::Consistent, "{:?}", report.input);
        assert_eq!(report.output_near.verdict, SlopeVerdict::Consistent, "{:?}", report.output_near);
        assert!(
            (report.inflation_exponent - 0.5).abs() <= 0.2,
            "exponent {}",
            report.inflation_exponent
        );
        assert_eq!(report.exponent_verdict, SlopeVerdict::Consistent);
    }

    #[test]
    fn inflation_config_rejections() {
        let mut cfg = case1_config();
        cfg.n_list = vec![8, 16];
        assert!(matches!(cfg.validate(), Err(Error::TooFewPoints { .. })));
        let mut cfg = case1_config();
        cfg.n_list = vec![8, 8, 16];
        assert!(cfg.validate().is_err());
        let mut cfg = case1_config();
        cfg.k = 1;
        assert!(cfg.validate().is_err());
        let mut cfg = case1_config();
        cfg.alpha = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = case1_config();
        cfg.q = f64::INFINITY;
        assert!(cfg.validate().is_err());
        let mut cfg = InflationConfig::new(InflationCase::Two, 1, 2, 1.0, -0.5, 4.0).unwrap();
        cfg.sep = 1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn smoothing_heat_rate_smoke() {
        let mut cfg = SmoothingConfig::new(
            PropagatorSpec::FractionalHeat { alpha: 1.0 },
            1.0,
            0.0,
            2.0,
        )
        .unwrap();
        cfg.n_list = (2..=64).collect();
        cfg.t_list = log_spaced(8, 1.0 / 32.0, 1.0 / 8.0);
        let report = smoothing_probe(&cfg).unwrap();
        assert!((report.check.fitted.slope + 1.0).abs() <= 0.05, "{:?}", report.check);
        assert_eq!(report.check.verdict, SlopeVerdict::Consistent);
        // The argmax should sit strictly inside the family.
        for p in &report.points {
            assert!(p.argmax_n > 2 && p.argmax_n < 64, "{p:?}");
        }
    }

    #[test]
    fn smoothing_equal_exponents_is_flat() {
        let mut cfg = SmoothingConfig::new(
            PropagatorSpec::FractionalHeat { alpha: 1.0 },
            0.5,
            0.5,
            2.0,
        )
        .unwrap();
        cfg.n_list = (1..=64).collect();
        let report = smoothing_probe(&cfg).unwrap();
        assert!(report.check.fitted.slope.abs() <= 0.05, "{:?}", report.check);
        for p in &report.points {
            assert!(p.ratio <= 1.0 + 1e-12, "no smoothing needed, ratio ≤ 1: {p:?}");
        }
    }

    #[test]
    fn smoothing_schrodinger_preserves_ratios() {
        let mut cfg =
            SmoothingConfig::new(PropagatorSpec::Schrodinger, 0.0, 0.0, 2.0).unwrap();
        cfg.n_list = (1..=16).collect();
        let report = smoothing_probe(&cfg).unwrap();
        for p in &report.points {
            assert!((p.ratio - 1.0).abs() <= 1e-12, "{p:?}");
        }
        assert!(report.check.fitted.slope.abs() <= 1e-9);
    }

    #[test]
    fn product_factored_hits_equality_constant() {
        // q = q1 = q2 = 1, s = 0: Young's inequality on the box sums makes
        // (2π)^{−1/2} the exact supremum, attained by single modes.
        let cfg =
            ProductConfig::new(ProductLaw::Factored { q1: 1.0, q2: 1.0 }, 0.0, 2.0, 1.0, 2)
                .unwrap();
        let report = product_probe(&cfg).unwrap();
        let bound = (2.0 * std::f64::consts::PI).powf(-0.5);
        for p in &report.points {
            assert!((p.max_ratio - bound).abs() <= 1e-10, "{p:?} vs {bound}");
        }
        assert!(report.check.fitted.slope.abs() <= 1e-6, "{:?}", report.check);
        assert_eq!(report.check.verdict, SlopeVerdict::Consistent);
    }

    #[test]
    fn product_power_law_stays_bounded() {
        let cfg =
            ProductConfig::new(ProductLaw::Power { s1: 1.0, q1: 1.0 }, 0.0, 2.0, 2.0, 2).unwrap();
        let report = product_probe(&cfg).unwrap();
        for p in &report.points {
            assert!(p.max_ratio.is_finite() && p.max_ratio > 0.0);
        }
        assert!(report.check.fitted.slope.abs() <= 0.05, "{:?}", report.check);
        assert_eq!(report.check.verdict, SlopeVerdict::Consistent);
    }

    #[test]
    fn product_validation_rejects_broken_exponent_relations() {
        assert!(matches!(
            ProductConfig::new(ProductLaw::Factored { q1: 1.0, q2: 1.0 }, 0.0, 2.0, 2.0, 2),
            Err(Error::InvalidParameter(_))
        ));
        assert!(ProductConfig::new(ProductLaw::Factored { q1: 1.0, q2: 1.0 }, -0.5, 2.0, 1.0, 2)
            .is_err());
        assert!(ProductConfig::new(ProductLaw::Power { s1: 0.0, q1: 1.0 }, 0.0, 2.0, 2.0, 2)
            .is_err());
        assert!(ProductConfig::new(ProductLaw::Power { s1: 0.5, q1: 2.0 }, 0.5, 2.0, 2.0, 2)
            .is_err());
    }

    #[test]
    fn product_reports_are_deterministic() {
        let mut cfg =
            ProductConfig::new(ProductLaw::Factored { q1: 1.0, q2: 1.0 }, 0.0, 2.0, 1.0, 2)
                .unwrap();
        cfg.lambda_list = vec![8, 16, 32];
        let a = serde_json::to_string(&product_probe(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&product_probe(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cube_points_enumerates_lexicographically() {
        let pts = cube_points(2, 3, 1);
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], [2, 2, 0]);
        assert_eq!(pts[4], [3, 3, 0]);
        assert_eq!(pts[8], [4, 4, 0]);
        assert_eq!(cube_points(1, -5, 2).len(), 5);
    }
}
