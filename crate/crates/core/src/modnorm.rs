//! The modulation norm `(Σ_k ⟨k⟩^{sq} ‖□_k f‖_p^q)^{1/q}` and the index
//! arithmetic that goes with it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decompose::{apply_box_weights, box_weight_tables};
use crate::error::Error;
use crate::field::{Field, SpectralField};
use crate::grid::{bracket, lattice_boxes, BoxIndex, GridSpec};
use crate::window::Window;
use crate::Result;

/// The exponents of `M^s_{p,q}` in dimension `n`. `p` and `q` may be
/// `f64::INFINITY` (written `"inf"` in serialized form).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulationParams {
    pub s: f64,
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
    pub n: usize,
}

/// Serde codec for exponents in `[1, ∞]`: numbers stay numbers, infinity is
/// the string `"inf"` (JSON has no literal for it).
pub mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(value: &f64, ser: S) -> Result<S::Ok, S::Error> {
        if value.is_infinite() {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => Err(de::Error::custom(format!("expected a number or \"inf\", got {s:?}"))),
        }
    }
}

impl ModulationParams {
    pub fn new(s: f64, p: f64, q: f64, n: usize) -> Result<Self> {
        let mp = Self { s, p, q, n };
        mp.validate()?;
        Ok(mp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidExponent { name: "p", value: self.p });
        }
        if !(self.q >= 1.0) {
            return Err(Error::InvalidExponent { name: "q", value: self.q });
        }
        if !self.s.is_finite() {
            return Err(Error::InvalidParameter(format!("s must be finite, got {}", self.s)));
        }
        if self.n == 0 || self.n > 3 {
            return Err(Error::InvalidParameter(format!("dimension {} not in 1..=3", self.n)));
        }
        Ok(())
    }

    /// The index `σ(s,q)` of these exponents.
    pub fn sigma(&self) -> f64 {
        sigma_index(self.s, self.q, self.n)
    }
}

/// `σ(s,q) = s − n(1 − 1/q)`; requires `q ≥ 1` (so `1/q ∈ (0,1]`, or 0 at
/// `q = ∞`).
pub fn sigma_index(s: f64, q: f64, n: usize) -> f64 {
    let inv_q = if q.is_infinite() { 0.0 } else { 1.0 / q };
    s - n as f64 * (1.0 - inv_q)
}

fn check_setup(grid: &GridSpec, mp: &ModulationParams, k_max: i64) -> Result<()> {
    mp.validate()?;
    if mp.n != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "norm dimension {} vs grid dimension {}",
            mp.n,
            grid.dim()
        )));
    }
    if k_max < 0 || k_max > grid.max_box_radius() {
        return Err(Error::KmaxTooLarge { k_max, band: grid.max_freq() });
    }
    Ok(())
}

/// `‖□_k f‖₂` by per-box Parseval: no inverse transform needed, and only
/// modes inside the window support are visited.
pub(crate) fn box_l2_spectral(c: &SpectralField, k: &BoxIndex, w: Window) -> f64 {
    let grid = c.grid();
    let n = grid.dim();
    let m = grid.samples_per_axis();
    // Positions with a nonzero factor on each axis.
    let mut live: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for axis in 0..n {
        let mut list = Vec::new();
        for pos in 0..m {
            let t = grid.freq_of_mode(grid.mode_of_pos(pos)) - k[axis] as f64;
            let wgt = w.factor(t);
            if wgt != 0.0 {
                list.push((pos, wgt));
            }
        }
        live.push(list);
    }
    // Recurse over the (≤ 3)-fold cross product of live positions.
    fn walk(
        axis: usize,
        n: usize,
        live: &[Vec<(usize, f64)>],
        grid: &GridSpec,
        coeffs: &[num_complex::Complex64],
        weight_acc: f64,
        pos_acc: &mut [usize; 3],
        sum: &mut f64,
    ) {
        if axis == n {
            let flat = grid.encode(pos_acc);
            *sum += weight_acc * weight_acc * coeffs[flat].norm_sqr();
            return;
        }
        for &(pos, wgt) in &live[axis] {
            pos_acc[axis] = pos;
            walk(axis + 1, n, live, grid, coeffs, weight_acc * wgt, pos_acc, sum);
        }
    }
    let mut sum = 0.0;
    let mut pos_acc = [0usize; 3];
    walk(0, n, &live, grid, c.coeffs(), 1.0, &mut pos_acc, &mut sum);
    let vol = grid.box_side().powi(n as i32);
    (vol * sum).sqrt()
}

/// `‖□_k f‖_p` the direct way: weight the spectrum, invert, quadrature.
fn box_lp_spatial(c: &SpectralField, k: &BoxIndex, w: Window, p: f64) -> f64 {
    let piece = apply_box_weights(c, &box_weight_tables(c.grid(), w, k)).ifft();
    piece.lp_norm(p).expect("p validated by caller")
}

fn box_lp(c: &SpectralField, k: &BoxIndex, w: Window, p: f64) -> f64 {
    if p == 2.0 {
        box_l2_spectral(c, k, w)
    } else {
        box_lp_spatial(c, k, w, p)
    }
}

pub(crate) fn combine(terms: Vec<(f64, f64)>, q: f64) -> f64 {
    // terms: (⟨k⟩^s weight, box norm)
    if q.is_infinite() {
        return terms.iter().map(|(w, x)| w * x).fold(0.0, f64::max);
    }
    if q == 2.0 {
        return terms.iter().map(|(w, x)| (w * x) * (w * x)).sum::<f64>().sqrt();
    }
    if q == 1.0 {
        return terms.iter().map(|(w, x)| w * x).sum();
    }
    // Stable general case: factor out the peak so large q cannot overflow.
    let peak = terms.iter().map(|(w, x)| w * x).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let sum: f64 = terms.iter().map(|(w, x)| (w * x / peak).powf(q)).sum();
    peak * sum.powf(1.0 / q)
}

/// The norm of `M^s_{p,q}` truncated to boxes `|k|_∞ ≤ k_max`.
///
/// Exact for fields band-limited inside the active boxes; otherwise the
/// truncation drops only boxes beyond `k_max`, whose content is bounded by
/// [`spectral_tail_mass`] at band `k_max − 1`.
pub fn modulation_norm(
    f: &Field,
    mp: &ModulationParams,
    w: Window,
    k_max: i64,
) -> Result<f64> {
    check_setup(f.grid(), mp, k_max)?;
    let c = f.fft();
    Ok(modulation_norm_spectral(&c, mp, w, k_max))
}

/// Same as [`modulation_norm`], starting from coefficients (skips one
/// forward transform when the caller already holds the spectrum).
pub fn modulation_norm_of_coeffs(
    c: &SpectralField,
    mp: &ModulationParams,
    w: Window,
    k_max: i64,
) -> Result<f64> {
    check_setup(c.grid(), mp, k_max)?;
    Ok(modulation_norm_spectral(c, mp, w, k_max))
}

fn modulation_norm_spectral(c: &SpectralField, mp: &ModulationParams, w: Window, k_max: i64) -> f64 {
    let n = c.grid().dim();
    let boxes = lattice_boxes(n, k_max);
    let terms: Vec<(f64, f64)> = if mp.p == 2.0 {
        boxes
            .iter()
            .map(|k| (bracket(k, n).powf(mp.s), box_l2_spectral(c, k, w)))
            .collect()
    } else {
        boxes
            .par_iter()
            .map(|k| (bracket(k, n).powf(mp.s), box_lp_spatial(c, k, w, mp.p)))
            .collect()
    };
    combine(terms, mp.q)
}

/// Unweighted per-box norms `‖□_k f‖_p` for `|k|_∞ ≤ k_max`, in
/// [`lattice_boxes`] order.
pub fn modulation_breakdown(
    f: &Field,
    mp: &ModulationParams,
    w: Window,
    k_max: i64,
) -> Result<Vec<(BoxIndex, f64)>> {
    check_setup(f.grid(), mp, k_max)?;
    let c = f.fft();
    let boxes = lattice_boxes(f.grid().dim(), k_max);
    Ok(boxes
        .into_par_iter()
        .map(|k| {
            let norm = box_lp(&c, &k, w, mp.p);
            (k, norm)
        })
        .collect())
}

/// `L²` mass of the spectrum beyond the per-axis frequency band:
/// `(L^n Σ_{|ξ_m|_∞ > band} |c_m|²)^{1/2}`.
pub fn spectral_tail_mass(f: &Field, band: f64) -> f64 {
    let c = f.fft();
    let grid = c.grid();
    let n = grid.dim();
    let mut sum = 0.0;
    for (flat, z) in c.coeffs().iter().enumerate() {
        let xi = grid.freq_at(flat);
        let sup = (0..n).map(|a| xi[a].abs()).fold(0.0, f64::max);
        if sup > band {
            sum += z.norm_sqr();
        }
    }
    (grid.box_side().powi(n as i32) * sum).sqrt()
}

/// Bessel multiplier `J_σ f = 𝓕^{−1} (1+|ξ|²)^{σ/2} 𝓕 f`.
pub fn apply_bessel(f: &Field, sigma: f64) -> Field {
    let c = f.fft();
    let grid = *c.grid();
    c.multiplied(|flat| {
        num_complex::Complex64::new((1.0 + grid.freq_norm_sq_at(flat)).powf(sigma / 2.0), 0.0)
    })
    .ifft()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_band_limited, random_field};
    use num_complex::Complex64;
    use proptest::prelude::*;

    const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

    fn grid1(m: usize) -> GridSpec {
        GridSpec::new(1, 1, m).unwrap()
    }

    fn mode_sum(grid: GridSpec, modes: &[i64]) -> Field {
        let mut c = SpectralField::zeros(grid);
        for &m in modes {
            c.add_mode(&[m, 0, 0], Complex64::new(1.0, 0.0)).unwrap();
        }
        c.ifft()
    }

    #[test]
    fn sigma_index_values() {
        assert_eq!(sigma_index(1.0, 1.0, 3), 1.0);
        assert_eq!(sigma_index(0.0, 2.0, 2), -1.0);
        assert!((sigma_index(2.0, 4.0, 1) - 1.25).abs() <= 1e-15);
        assert_eq!(sigma_index(0.5, f64::INFINITY, 2), -1.5);
    }

    #[test]
    fn single_mode_norms() {
        let g = grid1(32);
        let f = mode_sum(g, &[3]);
        for q in [1.0, 2.0, 4.0, f64::INFINITY] {
            let mp = ModulationParams::new(0.0, 2.0, q, 1).unwrap();
            let v = modulation_norm(&f, &mp, Window::RaisedCosine, 8).unwrap();
            assert!((v - TWO_PI.sqrt()).abs() <= 1e-12, "q = {q}: {v}");
        }
        let mp = ModulationParams::new(1.0, 2.0, 2.0, 1).unwrap();
        let v = modulation_norm(&f, &mp, Window::RaisedCosine, 8).unwrap();
        assert!((v - 10f64.sqrt() * TWO_PI.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn two_mode_norms() {
        let g = grid1(32);
        let f = mode_sum(g, &[3, 4]);
        let w = Window::RaisedCosine;
        let q1 = ModulationParams::new(0.0, 2.0, 1.0, 1).unwrap();
        let q2 = ModulationParams::new(0.0, 2.0, 2.0, 1).unwrap();
        let qi = ModulationParams::new(0.0, 2.0, f64::INFINITY, 1).unwrap();
        assert!((modulation_norm(&f, &q1, w, 8).unwrap() - 2.0 * TWO_PI.sqrt()).abs() <= 1e-12);
        assert!(
            (modulation_norm(&f, &q2, w, 8).unwrap() - 2f64.sqrt() * TWO_PI.sqrt()).abs() <= 1e-12
        );
        assert!((modulation_norm(&f, &qi, w, 8).unwrap() - TWO_PI.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn plancherel_anchor_sharp_window() {
        // Spectrum kept inside the covered boxes: the norm truncated at
        // k_max cannot see modes beyond it (e.g. the Nyquist mode sits in
        // box −M/(2P), one past the largest representable box).
        for (n, p, m, seed) in [(1usize, 1u32, 64usize, 3u64), (1, 2, 64, 4), (2, 1, 16, 5)] {
            let g = GridSpec::new(n, p, m).unwrap();
            let f = random_band_limited(g, (g.max_box_radius() - 1) as f64, seed);
            let mp = ModulationParams::new(0.0, 2.0, 2.0, n).unwrap();
            let v = modulation_norm(&f, &mp, Window::Sharp, g.max_box_radius()).unwrap();
            let l2 = f.lp_norm(2.0).unwrap();
            assert!((v - l2).abs() <= 1e-10 * l2, "n={n} P={p}: {v} vs {l2}");
        }
    }

    #[test]
    fn raised_cosine_l2_equivalence_band() {
        // Σ_k φ_k² ∈ [2^{−n}, 1] on each mode, so the s=0, p=q=2 norm sits
        // within [2^{−n/2}, 1] of the L² norm, with the exact ratio fixed by
        // the frequency content alone — refining the grid cannot move it.
        let build = |m: usize| {
            use rand::{Rng, SeedableRng};
            let g = GridSpec::new(1, 2, m).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
            let mut c = SpectralField::zeros(g);
            for mode in -7..=7 {
                let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                c.add_mode(&[mode, 0, 0], z).unwrap();
            }
            c.ifft()
        };
        let ratio = |f: &Field| {
            let mp = ModulationParams::new(0.0, 2.0, 2.0, 1).unwrap();
            let v = modulation_norm(f, &mp, Window::RaisedCosine, f.grid().max_box_radius())
                .unwrap();
            v / f.lp_norm(2.0).unwrap()
        };
        let coarse = build(32);
        let fine = build(64);
        let (rc, rf) = (ratio(&coarse), ratio(&fine));
        assert!(rc >= 1.0 / 2f64.sqrt() - 1e-12 && rc <= 1.0 + 1e-12, "ratio {rc}");
        assert!((rc - rf).abs() <= 1e-12, "{rc} vs {rf}");
    }

    // Oracle for the Gaussian norm: closed-form periodized coefficients
    // c_m = (√π/L)e^{−ξ_m²/4}, per-box weighted ℓ² sums with an inline
    // raised-cosine factor, no FFT and no decomposition code.
    fn gaussian_norm_oracle(grid: GridSpec, s: f64, q: f64) -> f64 {
        let l = grid.box_side();
        let m = grid.samples_per_axis() as i64;
        let g = |t: f64| {
            let a = t.abs();
            if a >= 1.0 {
                0.0
            } else {
                0.5 * (1.0 - (std::f64::consts::PI * (1.0 - a)).cos())
            }
        };
        let k_max = grid.max_box_radius();
        let mut total = 0.0;
        for k in -k_max..=k_max {
            let mut box_sq = 0.0;
            for mode in -m / 2..m / 2 {
                let xi = grid.freq_of_mode(mode);
                let c = std::f64::consts::PI.sqrt() / l * (-xi * xi / 4.0).exp();
                let wgt = g(xi - k as f64);
                box_sq += wgt * wgt * c * c;
            }
            let box_norm = (l * box_sq).sqrt();
            let weight = (1.0 + (k * k) as f64).sqrt().powf(s);
            total += (weight * box_norm).powf(q);
        }
        total.powf(1.0 / q)
    }

    #[test]
    fn gaussian_norm_matches_direct_summation_oracle() {
        let g = GridSpec::new(1, 4, 512).unwrap();
        let f = Field::from_fn_centered(g, |x| Complex64::new((-x[0] * x[0]).exp(), 0.0));
        let mp = ModulationParams::new(0.5, 2.0, 1.5, 1).unwrap();
        let v = modulation_norm(&f, &mp, Window::RaisedCosine, g.max_box_radius()).unwrap();
        let oracle = gaussian_norm_oracle(g, 0.5, 1.5);
        assert!((v - oracle).abs() <= 1e-8 * oracle, "{v} vs oracle {oracle}");
    }

    #[test]
    fn bessel_multiplier_examples() {
        let g = grid1(32);
        let f = mode_sum(g, &[3]);
        let id = apply_bessel(&f, 0.0);
        assert!(id.sub(&f).unwrap().lp_norm(2.0).unwrap() <= 1e-12);
        let up = apply_bessel(&f, 2.0);
        assert!(up.sub(&f.scaled(Complex64::new(10.0, 0.0))).unwrap().lp_norm(2.0).unwrap() <= 1e-11);
        let h = random_field(g, 12);
        let back = apply_bessel(&apply_bessel(&h, 1.7), -1.7);
        let rel = back.sub(&h).unwrap().lp_norm(2.0).unwrap() / h.lp_norm(2.0).unwrap();
        assert!(rel <= 1e-12);
    }

    #[test]
    fn bessel_isomorphism_ratio_is_one_for_single_modes() {
        // ⟨N⟩ = √(1+N²) is exactly the Bessel symbol at ξ=N, so moving σ
        // derivatives onto the weight leaves single-mode norms unchanged.
        let sigma = 1.3;
        let s = 0.5;
        for npow in [2i64, 4, 8, 16, 32, 64] {
            let g = grid1(256);
            let f = mode_sum(g, &[npow]);
            let mp_hi = ModulationParams::new(s, 2.0, 2.0, 1).unwrap();
            let mp_lo = ModulationParams::new(s - sigma, 2.0, 2.0, 1).unwrap();
            let k_max = g.max_box_radius();
            let num =
                modulation_norm(&apply_bessel(&f, sigma), &mp_lo, Window::RaisedCosine, k_max)
                    .unwrap();
            let den = modulation_norm(&f, &mp_hi, Window::RaisedCosine, k_max).unwrap();
            assert!((num / den - 1.0).abs() <= 1e-12, "N = {npow}: {}", num / den);
        }
    }

    #[test]
    fn tail_mass_examples() {
        let g = grid1(32);
        let f = mode_sum(g, &[5]);
        assert!(spectral_tail_mass(&f, 4.0) - TWO_PI.sqrt() <= 1e-12);
        assert!(spectral_tail_mass(&f, 5.0) <= 1e-12);
        let bl = random_band_limited(g, 3.0, 21);
        assert!(spectral_tail_mass(&bl, 3.0) <= 1e-12);
    }

    #[test]
    fn breakdown_matches_manual_projection() {
        let g = grid1(32);
        let f = random_band_limited(g, 5.0, 22);
        let mp = ModulationParams::new(0.0, 4.0, 2.0, 1).unwrap();
        let rows = modulation_breakdown(&f, &mp, Window::RaisedCosine, 6).unwrap();
        assert_eq!(rows.len(), 13);
        for (k, norm) in rows {
            let direct = crate::decompose::box_project(&f, &k, Window::RaisedCosine)
                .unwrap()
                .lp_norm(4.0)
                .unwrap();
            assert!((norm - direct).abs() <= 1e-12 * direct.max(1.0));
        }
    }

    #[test]
    fn rejects_bad_exponents_and_mismatched_dim() {
        assert!(ModulationParams::new(0.0, 0.5, 2.0, 1).is_err());
        assert!(ModulationParams::new(0.0, 2.0, 0.0, 1).is_err());
        let g = grid1(16);
        let f = Field::zeros(g);
        let mp = ModulationParams { s: 0.0, p: 2.0, q: 2.0, n: 2 };
        assert!(matches!(
            modulation_norm(&f, &mp, Window::Sharp, 4),
            Err(Error::GridMismatch(_))
        ));
        let mp1 = ModulationParams::new(0.0, 2.0, 2.0, 1).unwrap();
        assert!(matches!(
            modulation_norm(&f, &mp1, Window::Sharp, 99),
            Err(Error::KmaxTooLarge { .. })
        ));
    }

    #[test]
    fn exponent_serde_roundtrip() {
        let mp = ModulationParams::new(0.5, f64::INFINITY, 2.0, 1).unwrap();
        let text = serde_json::to_string(&mp).unwrap();
        assert!(text.contains("\"inf\""));
        let back: ModulationParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mp);
    }

    proptest! {
        #[test]
        fn spectral_l2_route_matches_spatial(seed in 0u64..40, kk in -4i64..=4) {
            let g = GridSpec::new(1, 2, 32).unwrap();
            let c = random_field(g, seed).fft();
            let k = [kk, 0, 0];
            for w in [Window::RaisedCosine, Window::Sharp] {
                let fast = box_l2_spectral(&c, &k, w);
                let slow = box_lp_spatial(&c, &k, w, 2.0);
                prop_assert!((fast - slow).abs() <= 1e-12 * slow.max(1.0));
            }
        }

        #[test]
        fn norm_is_absolutely_homogeneous(seed in 0u64..32, lam in 0.01f64..10.0) {
            let g = grid1(16);
            let f = random_field(g, seed);
            let mp = ModulationParams::new(0.7, 2.0, 1.5, 1).unwrap();
            let a = modulation_norm(&f.scaled(Complex64::new(lam, 0.0)), &mp, Window::RaisedCosine, 7).unwrap();
            let b = lam * modulation_norm(&f, &mp, Window::RaisedCosine, 7).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * b.max(1.0));
        }

        #[test]
        fn norm_satisfies_triangle_inequality(sa in 0u64..16, sb in 16u64..32) {
            let g = grid1(16);
            let f = random_field(g, sa);
            let h = random_field(g, sb);
            let mp = ModulationParams::new(0.3, 2.0, 2.0, 1).unwrap();
            let w = Window::RaisedCosine;
            let lhs = modulation_norm(&f.add(&h).unwrap(), &mp, w, 7).unwrap();
            let rhs = modulation_norm(&f, &mp, w, 7).unwrap() + modulation_norm(&h, &mp, w, 7).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
