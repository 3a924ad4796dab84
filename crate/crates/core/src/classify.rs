//! Threshold arithmetic for local well-posedness and norm-inflation
//! ill-posedness of `u_t + (−Δ)^{α/2} u = u^k` and related models on
//! `M^s_{2,q}`-type data, plus the space-embedding predicate.
//!
//! Every verdict is pure arithmetic in `(equation, n, k, s, q)`: the
//! well-posed and ill-posed regions never intersect, and parameter points
//! where neither set of inequalities fires come back as `Gap`.

use serde::Serialize;

use crate::error::Error;
use crate::modnorm::{sigma_index, ModulationParams};
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    WellPosed,
    IllPosed,
    Gap,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::WellPosed => "well-posed",
            Status::IllPosed => "ill-posed",
            Status::Gap => "gap",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Equation {
    /// `u_t + (−Δ)^{α/2} u = u^k`.
    FractionalHeat { alpha: f64 },
    /// `i u_t + Δu = u^k` (free evolution conserves every `M^s_{2,q}` norm).
    Schrodinger,
    /// `u_tt + u − Δu = u^k`, classified through its cosine/sinc propagators.
    KleinGordon,
    /// Heat equation `u_t − Δu = u^k` under the comparison classifier with
    /// non-matching exponent ranges; its two regions overlap (the bound is
    /// not sharp), so the intersection is flagged rather than resolved.
    HeatIwabuchi,
}

impl Equation {
    fn name(&self) -> &'static str {
        match self {
            Equation::FractionalHeat { .. } => "fractional-heat",
            Equation::Schrodinger => "schrodinger",
            Equation::KleinGordon => "klein-gordon",
            Equation::HeatIwabuchi => "heat-iwabuchi",
        }
    }
}

/// Outcome of [`classify`]: the status, the rule identifier that fired, the
/// computed index `σ(s,q)`, and the numeric thresholds it was compared to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    /// Which rule decided the status, e.g. `"fractional-heat.subcritical"`.
    pub rule: String,
    pub sigma: f64,
    pub thresholds: Vec<(String, f64)>,
    /// Set only for [`Equation::HeatIwabuchi`] where the quoted well-posed
    /// and ill-posed ranges intersect; the status there is `Gap`.
    pub overlap: bool,
}

fn named(pairs: &[(&str, f64)]) -> Vec<(String, f64)> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Classify `(n, k, s, q)` for the given equation.
///
/// Requires integer `k ≥ 2`, finite `q ≥ 1`, `1 ≤ n ≤ 3`, and `α > 0` for
/// the fractional heat equation. Boundary cases of strict inequalities
/// resolve to `Gap`.
pub fn classify(equation: Equation, n: usize, k: u32, s: f64, q: f64) -> Result<Verdict> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("power k must be ≥ 2, got {k}")));
    }
    if n == 0 || n > 3 {
        return Err(Error::InvalidParameter(format!("dimension {n} not in 1..=3")));
    }
    if !(q >= 1.0) || q.is_infinite() {
        return Err(Error::InvalidExponent { name: "q", value: q });
    }
    if !s.is_finite() {
        return Err(Error::InvalidParameter(format!("s must be finite, got {s}")));
    }
    if let Equation::FractionalHeat { alpha } = equation {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
    }

    let sigma = sigma_index(s, q, n);
    let km1 = (k - 1) as f64;
    let name = equation.name();

    let verdict = match equation {
        Equation::FractionalHeat { alpha } => {
            let crit = -alpha / km1;
            let thresholds = named(&[("sigma", sigma), ("critical_sigma", crit), ("critical_s", crit)]);
            let wp = s >= 0.0 && sigma > crit;
            let ip = sigma < crit || s < crit;
            status_verdict(name, wp, ip, false, sigma, thresholds)
        }
        Equation::Schrodinger => {
            let crit = -2.0 / km1;
            let thresholds = named(&[("sigma", sigma), ("critical_sigma", crit), ("critical_s", crit)]);
            let wp = (s > 0.0 && sigma > 0.0) || (s == 0.0 && sigma >= 0.0);
            let ip = sigma < crit || s < crit;
            status_verdict(name, wp, ip, false, sigma, thresholds)
        }
        Equation::KleinGordon => {
            let wp_cut = -1.0 / km1;
            let crit = -2.0 / km1;
            let thresholds = named(&[
                ("sigma", sigma),
                ("wellposed_sigma", wp_cut),
                ("critical_sigma", crit),
                ("critical_s", crit),
            ]);
            let wp = s >= 0.0 && sigma > wp_cut;
            let ip = sigma < crit || s < crit;
            status_verdict(name, wp, ip, false, sigma, thresholds)
        }
        Equation::HeatIwabuchi => {
            let wp_cut = -2.0 / km1;
            let ip_s = -2.0 / k as f64;
            let ip_sigma = -((n + 2) as f64) / k as f64;
            let thresholds = named(&[
                ("sigma", sigma),
                ("wellposed_sigma", wp_cut),
                ("illposed_s", ip_s),
                ("illposed_sigma", ip_sigma),
            ]);
            let wp = sigma > wp_cut;
            let ip = s < ip_s || sigma < ip_sigma;
            status_verdict(name, wp, ip, wp && ip, sigma, thresholds)
        }
    };
    Ok(verdict)
}

fn status_verdict(
    name: &str,
    wp: bool,
    ip: bool,
    overlap: bool,
    sigma: f64,
    thresholds: Vec<(String, f64)>,
) -> Verdict {
    let (status, rule) = if overlap {
        (Status::Gap, format!("{name}.overlap"))
    } else if wp {
        (Status::WellPosed, format!("{name}.subcritical"))
    } else if ip {
        (Status::IllPosed, format!("{name}.supercritical"))
    } else {
        (Status::Gap, format!("{name}.gap"))
    };
    Verdict { status, rule, sigma, thresholds, overlap }
}

/// How one modulation space sits inside another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embedding {
    /// All three exponents move the right way: `s₁ ≥ s₂`, `p₁ ≤ p₂`,
    /// `q₁ ≤ q₂`.
    Monotone,
    /// `q` moves the wrong way but extra smoothness pays for it:
    /// `q₁ > q₂`, `s₁ > s₂`, and `s₁ − s₂ > n/q₂ − n/q₁`.
    Compensated,
    /// Neither sufficient condition applies (no claim either way).
    Unknown,
}

/// Test whether `M^{s₁}_{p₁,q₁} ⊆ M^{s₂}_{p₂,q₂}` follows from one of the
/// two sufficient conditions. Both spaces must share the dimension.
pub fn embedding_predicate(mp1: &ModulationParams, mp2: &ModulationParams) -> Result<Embedding> {
    mp1.validate()?;
    mp2.validate()?;
    if mp1.n != mp2.n {
        return Err(Error::InvalidParameter(format!(
            "embedding requires equal dimensions, got {} and {}",
            mp1.n, mp2.n
        )));
    }
    let n = mp1.n as f64;
    if mp1.s >= mp2.s && mp1.p <= mp2.p && mp1.q <= mp2.q {
        return Ok(Embedding::Monotone);
    }
    let inv = |q: f64| if q.is_infinite() { 0.0 } else { 1.0 / q };
    if mp1.q > mp2.q && mp1.s > mp2.s && mp1.s - mp2.s > n * inv(mp2.q) - n * inv(mp1.q) {
        return Ok(Embedding::Compensated);
    }
    Ok(Embedding::Unknown)
}
