//! One function per subcommand: resolve flags/config/defaults, run the
//! library call, and emit the report or CSV with its manifest.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::json;

use modspace::grid::{bracket, GridSpec};
use modspace::io;
use modspace::probes::{
    inflation_probe, product_probe, smoothing_probe, InflationCase, InflationConfig,
    InflationReport, ProductConfig, ProductLaw, ProductReport, SmoothingConfig, SmoothingReport,
};
use modspace::solver::{duhamel_residual, etd_solve, picard_solve, EvolveConfig, SolveMode};
use modspace::{
    classify as run_classify, decompose as run_decompose, log_spaced, modulation_breakdown,
    modulation_norm, Equation, ModulationParams, PropagatorSpec, Status, Verdict, Window,
};

use crate::report::{csv_text, emit, emit_json, fmt_f64, hex_digest, OutFormat, RunManifest};
use crate::{
    ClassifyArgs, CliResult, Ctx, DecomposeArgs, EvolveArgs, InflationArgs, NormArgs, ProductArgs,
    SmoothingArgs, SweepArgs,
};

/// Exponents keep their "inf" spelling in manifests.
fn exp_json(x: f64) -> serde_json::Value {
    if x.is_infinite() {
        json!("inf")
    } else {
        json!(x)
    }
}

fn window_name(w: Window) -> serde_json::Value {
    serde_json::to_value(w).expect("window serializes")
}

fn require_field_path(path: &Option<PathBuf>, ctx: &Ctx) -> CliResult<PathBuf> {
    match ctx.resolve_opt(path.clone(), "field")? {
        Some(p) => Ok(p),
        None => Err("missing field file argument".into()),
    }
}

// ---------------------------------------------------------------------------
// norm
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct BreakdownRow {
    k: [i64; 3],
    box_norm: f64,
    weight: f64,
    weighted: f64,
}

#[derive(Serialize)]
struct NormDoc {
    manifest: RunManifest,
    grid: GridSpec,
    norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    breakdown: Option<Vec<BreakdownRow>>,
}

pub fn norm(ctx: &Ctx, args: &NormArgs) -> CliResult<()> {
    let path = require_field_path(&args.field, ctx)?;
    let field = io::read_field(&path)?;
    let grid = *field.grid();

    let s = ctx.resolve(args.s, "s", 0.0)?;
    let p = ctx.resolve_exponent(args.p, "p", 2.0)?;
    let q = ctx.resolve_exponent(args.q, "q", 2.0)?;
    let window = ctx.resolve(args.window, "window", Window::RaisedCosine)?;
    let k_max = ctx
        .resolve_opt(args.k_max, "k-max")?
        .unwrap_or_else(|| grid.max_box_radius());
    let breakdown = ctx.resolve(args.breakdown.then_some(true), "breakdown", false)?;

    let mp = ModulationParams::new(s, p, q, grid.dim())?;
    let total = modulation_norm(&field, &mp, window, k_max)?;

    let format = ctx.format.unwrap_or(OutFormat::Report);
    let want_rows = breakdown || format == OutFormat::Csv;
    let rows = if want_rows {
        let per_box = modulation_breakdown(&field, &mp, window, k_max)?;
        Some(
            per_box
                .into_iter()
                .map(|(k, box_norm)| {
                    let weight = bracket(&k, grid.dim()).powf(s);
                    BreakdownRow { k, box_norm, weight, weighted: weight * box_norm }
                })
                .collect::<Vec<_>>(),
        )
    } else {
        None
    };

    let mut manifest = RunManifest::new(
        "norm",
        ctx.seed,
        json!({
            "field": path.display().to_string(),
            "s": s, "p": exp_json(p), "q": exp_json(q),
            "window": window_name(window), "k-max": k_max,
            "breakdown": breakdown,
        }),
    );
    manifest.record_input(&path)?;

    match format {
        OutFormat::Report => {
            emit_json(ctx.out.as_ref(), &NormDoc { manifest, grid, norm: total, breakdown: rows })
        }
        OutFormat::Csv => {
            let rows = rows.expect("csv rows computed above");
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.k[0].to_string(),
                        r.k[1].to_string(),
                        r.k[2].to_string(),
                        fmt_f64(r.box_norm),
                        fmt_f64(r.weight),
                        fmt_f64(r.weighted),
                    ]
                })
                .collect();
            emit(
                ctx.out.as_ref(),
                &csv_text(&["k1", "k2", "k3", "box_norm", "weight", "weighted"], &cells),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// decompose
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PieceRow {
    k: [i64; 3],
    l2: f64,
}

#[derive(Serialize)]
struct DecomposeDoc {
    manifest: RunManifest,
    grid: GridSpec,
    l2_norm: f64,
    reconstruction_rel_error: f64,
    boxes: Vec<PieceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pieces_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    piece_digests: Option<BTreeMap<String, String>>,
}

pub fn decompose(ctx: &Ctx, args: &DecomposeArgs) -> CliResult<()> {
    let path = require_field_path(&args.field, ctx)?;
    let field = io::read_field(&path)?;
    let grid = *field.grid();

    let window = ctx.resolve(args.window, "window", Window::RaisedCosine)?;
    let k_max = ctx
        .resolve_opt(args.k_max, "k-max")?
        .unwrap_or_else(|| grid.max_box_radius());
    let pieces_dir: Option<PathBuf> = ctx.resolve_opt(args.pieces_dir.clone(), "pieces-dir")?;

    let dec = run_decompose(&field, window, k_max)?;
    let l2 = field.lp_norm(2.0)?;
    let recon = dec.reconstruct();
    let rel = recon.sub(&field)?.lp_norm(2.0)? / l2.max(f64::MIN_POSITIVE);

    let mut boxes = Vec::with_capacity(dec.boxes().len());
    for (k, piece) in dec.boxes().iter().zip(dec.pieces()) {
        boxes.push(PieceRow { k: *k, l2: piece.lp_norm(2.0)? });
    }

    let piece_digests = match &pieces_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            let mut digests = BTreeMap::new();
            for (k, piece) in dec.boxes().iter().zip(dec.pieces()) {
                let name = format!("box_{}_{}_{}.json", k[0], k[1], k[2]);
                let text = io::field_to_string(piece);
                std::fs::write(dir.join(&name), &text)
                    .map_err(|e| format!("cannot write {}: {e}", dir.join(&name).display()))?;
                digests.insert(name, hex_digest(text.as_bytes()));
            }
            Some(digests)
        }
        None => None,
    };

    let mut manifest = RunManifest::new(
        "decompose",
        ctx.seed,
        json!({
            "field": path.display().to_string(),
            "window": window_name(window), "k-max": k_max,
            "pieces-dir": pieces_dir.as_ref().map(|d| d.display().to_string()),
        }),
    );
    manifest.record_input(&path)?;

    match ctx.format.unwrap_or(OutFormat::Report) {
        OutFormat::Report => emit_json(
            ctx.out.as_ref(),
            &DecomposeDoc {
                manifest,
                grid,
                l2_norm: l2,
                reconstruction_rel_error: rel,
                boxes,
                pieces_dir: pieces_dir.map(|d| d.display().to_string()),
                piece_digests,
            },
        ),
        OutFormat::Csv => {
            let cells: Vec<Vec<String>> = boxes
                .iter()
                .map(|r| {
                    vec![
                        r.k[0].to_string(),
                        r.k[1].to_string(),
                        r.k[2].to_string(),
                        fmt_f64(r.l2),
                    ]
                })
                .collect();
            emit(ctx.out.as_ref(), &csv_text(&["k1", "k2", "k3", "l2"], &cells))
        }
    }
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

fn parse_equation(name: &str, alpha: f64) -> CliResult<Equation> {
    match name {
        "fractional-heat" | "heat" => Ok(Equation::FractionalHeat { alpha }),
        "schrodinger" => Ok(Equation::Schrodinger),
        "klein-gordon" => Ok(Equation::KleinGordon),
        "heat-iwabuchi" => Ok(Equation::HeatIwabuchi),
        other => Err(format!(
            "unknown equation {other:?} (expected fractional-heat, schrodinger, klein-gordon, or heat-iwabuchi)"
        )
        .into()),
    }
}

fn verdict_summary(v: &Verdict) -> String {
    let thresholds = v
        .thresholds
        .iter()
        .filter(|(name, _)| name != "sigma")
        .map(|(name, value)| format!("{name} = {value:.3}"))
        .collect::<Vec<_>>()
        .join(", ");
    if thresholds.is_empty() {
        format!("{} [{}] sigma(s,q) = {:.3}", v.status, v.rule, v.sigma)
    } else {
        format!("{} [{}] sigma(s,q) = {:.3} vs {}", v.status, v.rule, v.sigma, thresholds)
    }
}

#[derive(Serialize)]
struct ClassifyDoc {
    manifest: RunManifest,
    equation: Equation,
    n: u32,
    k: u32,
    s: f64,
    q: f64,
    verdict: Verdict,
    summary: String,
}

pub fn classify(ctx: &Ctx, args: &ClassifyArgs) -> CliResult<()> {
    let name = ctx.resolve(args.equation.clone(), "equation", "fractional-heat".to_string())?;
    let alpha = ctx.resolve(args.alpha, "alpha", 1.0)?;
    let n = ctx.resolve(args.n, "n", 1)?;
    let k = ctx.resolve(args.k, "k", 2)?;
    let s = ctx.resolve(args.s, "s", 0.0)?;
    let q = ctx.resolve_exponent(args.q, "q", 2.0)?;

    let equation = parse_equation(&name, alpha)?;
    let verdict = run_classify(equation, n as usize, k, s, q)?;
    let summary = verdict_summary(&verdict);

    let manifest = RunManifest::new(
        "classify",
        ctx.seed,
        json!({
            "equation": name, "alpha": alpha, "n": n, "k": k,
            "s": s, "q": exp_json(q),
        }),
    );

    match ctx.format.unwrap_or(OutFormat::Report) {
        OutFormat::Report => emit_json(
            ctx.out.as_ref(),
            &ClassifyDoc { manifest, equation, n, k, s, q, verdict, summary },
        ),
        OutFormat::Csv => {
            let row = vec![
                fmt_f64(s),
                fmt_f64(q),
                fmt_f64(verdict.sigma),
                verdict.status.to_string(),
                verdict.rule.clone(),
            ];
            emit(ctx.out.as_ref(), &csv_text(&["s", "q", "sigma", "status", "rule"], &[row]))
        }
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SweepRow {
    s: f64,
    q: f64,
    sigma: f64,
    status: Status,
    rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitted_exponent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    predicted_exponent: Option<f64>,
}

#[derive(Serialize)]
struct SweepDoc {
    manifest: RunManifest,
    rows: Vec<SweepRow>,
}

pub fn sweep(ctx: &Ctx, args: &SweepArgs) -> CliResult<()> {
    let name = ctx.resolve(args.equation.clone(), "equation", "fractional-heat".to_string())?;
    let alpha = ctx.resolve(args.alpha, "alpha", 1.0)?;
    let n = ctx.resolve(args.n, "n", 1)?;
    let k = ctx.resolve(args.k, "k", 2)?;
    let s_min = ctx.resolve(args.s_min, "s-min", -3.0)?;
    let s_max = ctx.resolve(args.s_max, "s-max", 1.0)?;
    let s_steps = ctx.resolve(args.s_steps, "s-steps", 41)?;
    let q_list = ctx.resolve(args.q_list.clone(), "q-list", vec![1.0, 2.0, 4.0])?;
    let measure = ctx.resolve(args.measure.then_some(true), "measure", false)?;
    let stride = ctx.resolve(args.measure_stride, "measure-stride", 2)?;

    if s_steps == 0 {
        return Err("s-steps must be at least 1".into());
    }
    if q_list.is_empty() {
        return Err("q-list must be nonempty".into());
    }
    if !(s_min.is_finite() && s_max.is_finite() && s_min <= s_max) {
        return Err(format!("need finite s-min <= s-max, got {s_min} and {s_max}").into());
    }
    if measure && stride == 0 {
        return Err("measure-stride must be at least 1".into());
    }
    let equation = parse_equation(&name, alpha)?;

    let s_values: Vec<f64> = if s_steps == 1 {
        vec![s_min]
    } else {
        (0..s_steps)
            .map(|i| s_min + (s_max - s_min) * i as f64 / (s_steps - 1) as f64)
            .collect()
    };

    let mut rows = Vec::with_capacity(s_values.len() * q_list.len());
    for (si, &s) in s_values.iter().enumerate() {
        for &q in &q_list {
            let verdict = run_classify(equation, n as usize, k, s, q)?;
            let mut fitted = None;
            let mut predicted = None;
            let probe_here = measure
                && si % stride == 0
                && verdict.status == Status::IllPosed
                && q.is_finite()
                && matches!(equation, Equation::FractionalHeat { .. });
            if probe_here {
                let mut cfg = InflationConfig::new(InflationCase::One, n as usize, k, alpha, s, q)?;
                cfg.n_list = vec![8, 16, 32];
                let report = inflation_probe(&cfg)?;
                fitted = Some(report.inflation_exponent);
                predicted = Some(report.predicted_exponent);
            }
            rows.push(SweepRow {
                s,
                q,
                sigma: verdict.sigma,
                status: verdict.status,
                rule: verdict.rule,
                fitted_exponent: fitted,
                predicted_exponent: predicted,
            });
        }
    }

    let manifest = RunManifest::new(
        "sweep",
        ctx.seed,
        json!({
            "equation": name, "alpha": alpha, "n": n, "k": k,
            "s-min": s_min, "s-max": s_max, "s-steps": s_steps,
            "q-list": q_list.iter().map(|&q| exp_json(q)).collect::<Vec<_>>(),
            "measure": measure, "measure-stride": stride,
        }),
    );

    match ctx.format.unwrap_or(OutFormat::Csv) {
        OutFormat::Report => emit_json(ctx.out.as_ref(), &SweepDoc { manifest, rows }),
        OutFormat::Csv => {
            let mut header = vec!["s", "q", "sigma", "status", "rule"];
            if measure {
                header.push("fitted_exponent");
                header.push("predicted_exponent");
            }
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut row = vec![
                        fmt_f64(r.s),
                        fmt_f64(r.q),
                        fmt_f64(r.sigma),
                        r.status.to_string(),
                        r.rule.clone(),
                    ];
                    if measure {
                        row.push(r.fitted_exponent.map(fmt_f64).unwrap_or_default());
                        row.push(r.predicted_exponent.map(fmt_f64).unwrap_or_default());
                    }
                    row
                })
                .collect();
            emit(ctx.out.as_ref(), &csv_text(&header, &cells))
        }
    }
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

fn parse_semigroup(name: &str, alpha: f64) -> CliResult<PropagatorSpec> {
    match name {
        "heat" | "fractional-heat" => Ok(PropagatorSpec::fractional_heat(alpha)?),
        "schrodinger" => Ok(PropagatorSpec::Schrodinger),
        other => Err(format!("unknown semigroup {other:?} (expected heat or schrodinger)").into()),
    }
}

#[derive(Serialize)]
struct EvolveDoc {
    manifest: RunManifest,
    equation: PropagatorSpec,
    config: EvolveConfig,
    times: Vec<f64>,
    node_norms: Vec<f64>,
    diagnostics: modspace::solver::SolveDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual: Option<f64>,
    final_mode0: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    final_state: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    final_state_digest: Option<String>,
}

pub fn evolve(ctx: &Ctx, args: &EvolveArgs) -> CliResult<()> {
    let path = require_field_path(&args.field, ctx)?;
    let field = io::read_field(&path)?;
    let dim = field.grid().dim();

    let name = ctx.resolve(args.equation.clone(), "equation", "heat".to_string())?;
    let alpha = ctx.resolve(args.alpha, "alpha", 1.0)?;
    let k = ctx.resolve(args.k, "k", 2)?;
    let t = ctx.resolve(args.t, "t", 1.0)?;
    let mode_name = ctx.resolve(args.mode.clone(), "mode", "picard-global".to_string())?;
    let s = ctx.resolve(args.s, "s", 0.0)?;
    let p = ctx.resolve_exponent(args.p, "p", 2.0)?;
    let q = ctx.resolve_exponent(args.q, "q", 2.0)?;
    let window = ctx.resolve(args.window, "window", Window::RaisedCosine)?;
    let linear = ctx.resolve(args.linear.then_some(true), "linear", false)?;
    let skip_residual = ctx.resolve(args.skip_residual.then_some(true), "skip-residual", false)?;
    let final_state_path: Option<PathBuf> =
        ctx.resolve_opt(args.final_state.clone(), "final-state")?;

    let spec = parse_semigroup(&name, alpha)?;
    let mode: SolveMode =
        serde_json::from_value(serde_json::Value::String(mode_name.clone()))
            .map_err(|_| format!("unknown mode {mode_name:?} (expected picard-global or etd-step)"))?;

    let mut cfg = EvolveConfig::new(k, t, dim)?;
    cfg.mode = mode;
    cfg.time_nodes = ctx.resolve(args.time_nodes, "time-nodes", cfg.time_nodes)?;
    cfg.quad_nodes = ctx.resolve(args.quad_nodes, "quad-nodes", cfg.quad_nodes)?;
    cfg.picard_tol = ctx.resolve(args.tol, "tol", cfg.picard_tol)?;
    cfg.picard_max_iter = ctx.resolve(args.max_iter, "max-iter", cfg.picard_max_iter)?;
    cfg.etd_order = ctx.resolve(args.etd_order, "etd-order", cfg.etd_order)?;
    cfg.dealias_factor = ctx.resolve(args.dealias, "dealias", cfg.dealias_factor)?;
    cfg.norm = ModulationParams::new(s, p, q, dim)?;
    cfg.window = window;
    cfg.linear_only = linear;
    cfg.validate()?;

    let trajectory = match cfg.mode {
        SolveMode::PicardGlobal => picard_solve(&field, &spec, &cfg)?,
        SolveMode::EtdStep => etd_solve(&field, &spec, &cfg)?,
    };
    let residual = if skip_residual || trajectory.diagnostics.blowup.is_some() {
        None
    } else {
        Some(duhamel_residual(&trajectory, &spec, &cfg)?)
    };

    let final_state = trajectory.final_state();
    let mode0 = final_state
        .fft()
        .coeff_at(&[0, 0, 0])
        .expect("mode 0 exists on every grid");
    let (final_path_str, final_digest) = match &final_state_path {
        Some(out_path) => {
            let text = io::field_to_string(final_state);
            std::fs::write(out_path, &text)
                .map_err(|e| format!("cannot write {}: {e}", out_path.display()))?;
            (
                Some(out_path.display().to_string()),
                Some(hex_digest(text.as_bytes())),
            )
        }
        None => (None, None),
    };

    let mut manifest = RunManifest::new(
        "evolve",
        ctx.seed,
        json!({
            "field": path.display().to_string(),
            "equation": name, "alpha": alpha, "k": k, "t": t,
            "mode": mode_name,
            "time-nodes": cfg.time_nodes, "quad-nodes": cfg.quad_nodes,
            "tol": cfg.picard_tol, "max-iter": cfg.picard_max_iter,
            "etd-order": cfg.etd_order, "dealias": cfg.dealias_factor,
            "s": s, "p": exp_json(p), "q": exp_json(q),
            "window": window_name(window),
            "linear": linear, "skip-residual": skip_residual,
            "final-state": final_path_str.clone(),
        }),
    );
    manifest.record_input(&path)?;

    match ctx.format.unwrap_or(OutFormat::Report) {
        OutFormat::Report => emit_json(
            ctx.out.as_ref(),
            &EvolveDoc {
                manifest,
                equation: spec,
                config: cfg,
                times: trajectory.times.clone(),
                node_norms: trajectory.diagnostics.final_norms.clone(),
                diagnostics: trajectory.diagnostics.clone(),
                residual,
                final_mode0: [mode0.re, mode0.im],
                final_state: final_path_str,
                final_state_digest: final_digest,
            },
        ),
        OutFormat::Csv => {
            let cells: Vec<Vec<String>> = trajectory
                .times
                .iter()
                .zip(&trajectory.diagnostics.final_norms)
                .map(|(&t, &norm)| vec![fmt_f64(t), fmt_f64(norm)])
                .collect();
            emit(ctx.out.as_ref(), &csv_text(&["t", "norm"], &cells))
        }
    }
}

// ---------------------------------------------------------------------------
// probe inflation
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct InflationDoc {
    manifest: RunManifest,
    report: InflationReport,
}

pub fn probe_inflation(ctx: &Ctx, args: &InflationArgs) -> CliResult<()> {
    let case_num = ctx.resolve(args.case, "case", 1u8)?;
    let case = match case_num {
        1 => InflationCase::One,
        2 => InflationCase::Two,
        other => return Err(format!("unknown case {other} (expected 1 or 2)").into()),
    };
    let n = ctx.resolve(args.n, "n", 1u32)?;
    let k = ctx.resolve(args.k, "k", 2)?;
    let alpha = ctx.resolve(args.alpha, "alpha", 1.0)?;
    let s = ctx.resolve(args.s, "s", -1.5)?;
    let q = ctx.resolve_exponent(args.q, "q", 2.0)?;

    let mut cfg = InflationConfig::new(case, n as usize, k, alpha, s, q)?;
    cfg.n_list = ctx.resolve(args.n_list.clone(), "n-list", cfg.n_list)?;
    cfg.sep = ctx.resolve(args.sep, "sep", cfg.sep)?;
    cfg.quad_nodes = ctx.resolve(args.quad_nodes, "quad-nodes", cfg.quad_nodes)?;
    cfg.window = ctx.resolve(args.window, "window", cfg.window)?;
    cfg.tol_input = ctx.resolve(args.tol_input, "tol-input", cfg.tol_input)?;
    cfg.tol_output = ctx.resolve(args.tol_output, "tol-output", cfg.tol_output)?;
    cfg.tol_exponent = ctx.resolve(args.tol_exponent, "tol-exponent", cfg.tol_exponent)?;
    cfg.validate()?;

    let report = inflation_probe(&cfg)?;
    let manifest = RunManifest::new(
        "probe inflation",
        ctx.seed,
        json!({
            "case": case_num, "n": n, "k": k, "alpha": alpha,
            "s": s, "q": exp_json(q),
            "n-list": cfg.n_list, "sep": cfg.sep, "quad-nodes": cfg.quad_nodes,
            "window": window_name(cfg.window),
            "tol-input": cfg.tol_input, "tol-output": cfg.tol_output,
            "tol-exponent": cfg.tol_exponent,
        }),
    );

    match ctx.format.unwrap_or(OutFormat::Report) {
        OutFormat::Report => emit_json(ctx.out.as_ref(), &InflationDoc { manifest, report }),
        OutFormat::Csv => {
            let cells: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|pt| {
                    vec![
                        pt.big_n.to_string(),
                        fmt_f64(pt.t),
                        pt.grid_m.to_string(),
                        fmt_f64(pt.input_norm),
                        fmt_f64(pt.output_total),
                        fmt_f64(pt.output_near),
                    ]
                })
                .collect();
            emit(
                ctx.out.as_ref(),
                &csv_text(
                    &["N", "t", "grid_m", "input_norm", "output_total", "output_near"],
                    &cells,
                ),
            )
        }
    }
}

// ---------------------------------------------------------------------------
// probe smoothing
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SmoothingDoc {
    manifest: RunManifest,
    report: SmoothingReport,
}

pub fn probe_smoothing(ctx: &Ctx, args: &SmoothingArgs) -> CliResult<()> {
    let name = ctx.resolve(args.equation.clone(), "equation", "heat".to_string())?;
    let alpha = ctx.resolve(args.alpha, "alpha", 1.0)?;
    let s1 = ctx.resolve(args.s1, "s1", 1.0)?;
    let s2 = ctx.resolve(args.s2, "s2", 0.0)?;
    let q = ctx.resolve_exponent(args.q, "q", 2.0)?;
    let n_min = ctx.resolve(args.n_min, "n-min", 2)?;
    let n_max = ctx.resolve(args.n_max, "n-max", 256)?;
    let t_min = ctx.resolve(args.t_min, "t-min", 1.0 / 128.0)?;
    let t_max = ctx.resolve(args.t_max, "t-max", 1.0 / 8.0)?;
    let t_count = ctx.resolve(args.t_count, "t-count", 12)?;

    if n_min < 1 || n_max < n_min {
        return Err(format!("need 1 <= n-min <= n-max, got {n_min} and {n_max}").into());
    }
    if t_count < 3 {
        return Err("t-count must be at least 3".into());
    }
    let spec = parse_semigroup(&name, alpha)?;
    let mut cfg = SmoothingConfig::new(spec, s1, s2, q)?;
    cfg.n_list = (n_min..=n_max).collect();
    cfg.t_list = log_spaced(t_count, t_min, t_max);
    cfg.window = ctx.resolve(args.window, "window", cfg.window)?;
    cfg.tol = ctx.resolve(args.tol, "tol", cfg.tol)?;
    cfg.validate()?;

    let report = smoothing_probe(&cfg)?;
    let manifest = RunManifest::new(
        "probe smoothing",
        ctx.seed,
        json!({
            "equation": name, "alpha": alpha, "s1": s1, "s2": s2, "q": exp_json(q),
            "n-min": n_min, "n-max": n_max,
            "t-min": t_min, "t-max": t_max, "t-count": t_count,
            "window": window_name(cfg.window), "tol": cfg.tol,
        }),
    );

    match ctx.format.unwrap_or(OutFormat::Report) {
        OutFormat::Report => emit_json(ctx.out.as_ref(), &SmoothingDoc { manifest, report }),
        OutFormat::Csv => {
            let cells: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|pt| vec![fmt_f64(pt.t), fmt_f64(pt.ratio), pt.argmax_n.to_string()])
                .collect();
            emit(ctx.out.as_ref(), &csv_text(&["t", "ratio", "argmax_n"], &cells))
        }
    }
}

// ---------------------------------------------------------------------------
// probe product
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ProductDoc {
    manifest: RunManifest,
    report: ProductReport,
}

pub fn probe_product(ctx: &Ctx, args: &ProductArgs) -> CliResult<()> {
    let law_name = ctx.resolve(args.law.clone(), "law", "factored".to_string())?;
    let s = ctx.resolve(args.s, "s", 0.0)?;
    let p = ctx.resolve_exponent(args.p, "p", 2.0)?;
    let k = ctx.resolve(args.k, "k", 2)?;

    let (law, q) = match law_name.as_str() {
        "factored" => {
            let q1 = ctx.resolve_exponent(args.q1, "q1", 1.0)?;
            let q2 = ctx.resolve_exponent(args.q2, "q2", 1.0)?;
            let q = ctx.resolve_exponent(args.q, "q", 1.0)?;
            (ProductLaw::Factored { q1, q2 }, q)
        }
        "power" => {
            let s1 = ctx.resolve(args.s1, "s1", 1.0)?;
            let q1 = ctx.resolve_exponent(args.q1, "q1", 1.0)?;
            let q = ctx.resolve_exponent(args.q, "q", 2.0)?;
            (ProductLaw::Power { s1, q1 }, q)
        }
        other => return Err(format!("unknown law {other:?} (expected factored or power)").into()),
    };

    let mut cfg = ProductConfig::new(law, s, p, q, k)?;
    cfg.ensemble_size = ctx.resolve(args.ensemble_size, "ensemble-size", cfg.ensemble_size)?;
    cfg.lambda_list = ctx.resolve(args.lambda_list.clone(), "lambda-list", cfg.lambda_list)?;
    cfg.window = ctx.resolve(args.window, "window", cfg.window)?;
    cfg.seed = ctx.seed;
    cfg.tol = ctx.resolve(args.tol, "tol", cfg.tol)?;
    cfg.validate()?;

    let report = product_probe(&cfg)?;
    let manifest = RunManifest::new(
        "probe product",
        ctx.seed,
        json!({
            "law": law_name, "s": s, "p": exp_json(p), "q": exp_json(q), "k": k,
            "law-params": serde_json::to_value(&cfg.law)?,
            "ensemble-size": cfg.ensemble_size, "lambda-list": cfg.lambda_list,
            "window": window_name(cfg.window), "tol": cfg.tol,
        }),
    );

    match ctx.format.unwrap_or(OutFormat::Report) {
        OutFormat::Report => emit_json(ctx.out.as_ref(), &ProductDoc { manifest, report }),
        OutFormat::Csv => {
            let cells: Vec<Vec<String>> = report
                .points
                .iter()
                .map(|pt| {
                    vec![
                        pt.lambda.to_string(),
                        fmt_f64(pt.max_ratio),
                        pt.argmax_member.to_string(),
                    ]
                })
                .collect();
            emit(
                ctx.out.as_ref(),
                &csv_text(&["lambda", "max_ratio", "argmax_member"], &cells),
            )
        }
    }
}

