//! Command drivers over the library.

use std::f64::consts::PI;
use std::time::Instant;

use cylfock::fock::{kernel, CylinderFunction, FockSeries, KernelMethod};
use cylfock::gabor::{frame_bounds, riesz_lower_bound, TruncationSpec};
use cylfock::interp::{
    growth_profile, interpolate, interpolation_report, GrowthGrid, ProductTruncation,
    Reconstruction,
};
use cylfock::numerics::quad::QuadratureSpec;
use cylfock::numerics::RngStream;
use cylfock::pointset::{
    admissible_band, density_bounds, explicit, make_lattice, separation_constant,
    two_sided_indexing, uniform_closeness,
};
use cylfock::theta::{theta_series, ThetaArgs};
use cylfock::{Complex64, FockParams, LogComplex, PointSet};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{Cell, CommandOutput, Plot, Table};
use crate::LabError;

fn echo<T: serde::Serialize>(cfg: &T) -> Value {
    serde_json::to_value(cfg).expect("config is serializable")
}

/// Builds the point set and replaces `points` in the echo by the resolved
/// descriptor.
fn points_of(v: &Value, input: &mut Value) -> Result<PointSet, LabError> {
    let d = resolve_points(v)?;
    input["points"] = serde_json::to_value(&d).expect("descriptor is serializable");
    d.build().map_err(LabError::from)
}

pub fn density(cfg: DensityConfig) -> Result<CommandOutput, LabError> {
    let mut input = echo(&cfg);
    let set = points_of(&cfg.points, &mut input)?;
    let (lo, hi) = density_bounds(&set, &cfg.r_list, cfg.w_samples)?;
    let mut warnings = set.warnings();
    let separation = match separation_constant(&set, cfg.metric) {
        Ok(s) => Some(s),
        Err(e) => {
            warnings.push(format!("separation: {e}"));
            None
        }
    };
    let q_star = match cfg.alpha {
        Some(a) => match uniform_closeness(&set, a) {
            Ok(c) => Some(c.q_star),
            Err(e) => {
                warnings.push(format!("uniform closeness: {e}"));
                None
            }
        },
        None => None,
    };
    let mut table = Table::new(vec![
        "r",
        "band_lo",
        "band_hi",
        "inf_count",
        "sup_count",
        "d_minus_r",
        "d_plus_r",
        "windows",
        "exhaustive",
    ]);
    let mut per_r = Vec::new();
    for row in &lo.per_r {
        let (a, b) = admissible_band(&set, row.r).expect("rows exist only for admissible heights");
        table.push(vec![
            row.r.into(),
            a.into(),
            b.into(),
            row.inf_count.into(),
            row.sup_count.into(),
            row.inf.into(),
            row.sup.into(),
            row.windows.into(),
            row.exhaustive.into(),
        ]);
        per_r.push(json!({
            "r": row.r, "band": [a, b], "inf_count": row.inf_count, "sup_count": row.sup_count,
            "d_minus_r": row.inf, "d_plus_r": row.sup, "windows": row.windows, "exhaustive": row.exhaustive,
        }));
    }
    let result = json!({
        "n_points": set.len(),
        "d_minus": lo.extrapolated,
        "d_plus": hi.extrapolated,
        "exact": lo.exact,
        "separation": separation,
        "q_star": q_star,
        "y_extent": set.y_extent().map(|(a, b)| [a, b]),
        "per_r": per_r,
    });
    let mut out = CommandOutput::new(input, result, table);
    out.plots = vec![
        Plot {
            name: "density_minus".into(),
            columns: ["r", "d_minus_r"],
            points: lo.per_r.iter().map(|r| (r.r, r.inf)).collect(),
        },
        Plot {
            name: "density_plus".into(),
            columns: ["r", "d_plus_r"],
            points: hi.per_r.iter().map(|r| (r.r, r.sup)).collect(),
        },
    ];
    out.warnings = warnings;
    Ok(out)
}

fn relative_change(values: &[f64]) -> Option<f64> {
    match values {
        [.., a, b] if *a != 0.0 => Some((b - a).abs() / a.abs()),
        _ => None,
    }
}

pub fn frame(cfg: FrameConfig) -> Result<CommandOutput, LabError> {
    if cfg.k_list.is_empty() {
        return Err(LabError::Config("K_list must not be empty".into()));
    }
    let mut input = echo(&cfg);
    let set = points_of(&cfg.points, &mut input)?;
    let mut table = Table::new(vec![
        "K", "margin", "dim", "A", "B", "a_raw", "floor", "warnings",
    ]);
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for &k in &cfg.k_list {
        let t = TruncationSpec::new(k, cfg.margin)?;
        let fb = frame_bounds(&set, cfg.nu, &t)?;
        table.push(vec![
            k.into(),
            cfg.margin.into(),
            t.dim().into(),
            fb.a.into(),
            fb.b.into(),
            fb.a_raw.into(),
            fb.floor.into(),
            fb.warnings.len().into(),
        ]);
        warnings.extend(fb.warnings.iter().map(|w| format!("K={k}: {w}")));
        rows.push(fb);
    }
    let a: Vec<f64> = rows.iter().map(|r| r.a).collect();
    let result = json!({
        "n_points": set.len(),
        "A": rows.last().map(|r| r.a),
        "B": rows.last().map(|r| r.b),
        "relative_change_A": relative_change(&a),
        "truncations": rows.iter().map(|r| json!({
            "K": r.trunc.k, "margin": r.trunc.margin, "A": r.a, "B": r.b, "a_raw": r.a_raw, "floor": r.floor,
        })).collect::<Vec<_>>(),
    });
    let mut out = CommandOutput::new(input, result, table);
    out.plots = vec![Plot {
        name: "frame_A".into(),
        columns: ["K", "A"],
        points: rows.iter().map(|r| (r.trunc.k as f64, r.a)).collect(),
    }];
    out.warnings = warnings;
    Ok(out)
}

/// Points with two-sided index `|k| <= K`.
fn central(set: &PointSet, k: usize) -> Result<PointSet, LabError> {
    let ix = two_sided_indexing(set)?;
    let pts: Vec<[f64; 2]> = set
        .points()
        .iter()
        .enumerate()
        .filter(|(i, _)| ix.index_of(*i).unsigned_abs() as usize <= k)
        .map(|(_, p)| [p.x, p.y])
        .collect();
    explicit(&pts).map_err(LabError::from)
}

pub fn riesz(cfg: RieszConfig) -> Result<CommandOutput, LabError> {
    if matches!(&cfg.k_list, Some(l) if l.is_empty()) {
        return Err(LabError::Config("K_list must not be empty".into()));
    }
    let mut input = echo(&cfg);
    let set = points_of(&cfg.points, &mut input)?;
    let mut table = Table::new(vec!["K", "n_points", "riesz_lower", "raw", "floor"]);
    let mut rows = Vec::new();
    let ks: Vec<Option<usize>> = match &cfg.k_list {
        Some(l) => l.iter().map(|&k| Some(k)).collect(),
        None => vec![None],
    };
    for k in ks {
        let sub = match k {
            Some(k) => central(&set, k)?,
            None => set.clone(),
        };
        let r = riesz_lower_bound(&sub, cfg.nu, cfg.tol)?;
        table.push(vec![
            k.map_or(Cell::S("all".into()), |k| Cell::U(k as u64)),
            r.n_points.into(),
            r.value.into(),
            r.raw.into(),
            r.floor.into(),
        ]);
        rows.push((k, r));
    }
    let v: Vec<f64> = rows.iter().map(|r| r.1.value).collect();
    let result = json!({
        "n_points": set.len(),
        "riesz_lower": rows.last().map(|r| r.1.value),
        "relative_change": relative_change(&v),
        "truncations": rows.iter().map(|(k, r)| json!({
            "K": k, "n_points": r.n_points, "riesz_lower": r.value, "raw": r.raw, "floor": r.floor,
        })).collect::<Vec<_>>(),
    });
    let mut out = CommandOutput::new(input, result, table);
    out.plots = vec![Plot {
        name: "riesz".into(),
        columns: ["n_points", "riesz_lower"],
        points: rows
            .iter()
            .map(|r| (r.1.n_points as f64, r.1.value))
            .collect(),
    }];
    Ok(out)
}

/// Frame-side lattice of spacing `beta` covering the truncation's extent.
pub fn sweep_frame_set(beta: f64, t: &TruncationSpec) -> Result<PointSet, LabError> {
    let (_, e) = t.required_extent();
    let n = (e / beta).ceil() as i64 + 1;
    make_lattice(0.0, beta, -n, n).map_err(LabError::from)
}

struct SweepRow {
    beta: f64,
    k: usize,
    n_points: usize,
    values: Result<(f64, f64, f64), String>,
    wall_ms: u128,
}

fn sweep_row(beta: f64, k: usize, cfg: &SweepConfig) -> SweepRow {
    let t0 = Instant::now();
    let mut n_points = 0;
    let values = (|| -> Result<(f64, f64, f64), LabError> {
        let t = TruncationSpec::new(k, cfg.margin)?;
        let fset = sweep_frame_set(beta, &t)?;
        n_points = fset.len();
        let fb = frame_bounds(&fset, cfg.nu, &t)?;
        let rset = make_lattice(0.0, 1.0 / beta, -(k as i64), k as i64)?;
        let r = riesz_lower_bound(&rset, cfg.nu, cfg.tol)?;
        Ok((fb.a, fb.b, r.value))
    })()
    .map_err(|e| e.to_string());
    SweepRow {
        beta,
        k,
        n_points,
        values,
        wall_ms: t0.elapsed().as_millis(),
    }
}

pub fn sweep(cfg: SweepConfig) -> Result<CommandOutput, LabError> {
    if cfg.k_list.is_empty() {
        return Err(LabError::Config("K_list must not be empty".into()));
    }
    if cfg.steps == 0 {
        return Err(LabError::Config("steps must be at least 1".into()));
    }
    if !(cfg.beta_min > 0.0 && cfg.beta_max >= cfg.beta_min && cfg.beta_max.is_finite()) {
        return Err(LabError::Config("need 0 < beta_min <= beta_max".into()));
    }
    let input = echo(&cfg);
    let betas: Vec<f64> = (0..cfg.steps)
        .map(|i| {
            if cfg.steps == 1 {
                cfg.beta_min
            } else {
                cfg.beta_min + (cfg.beta_max - cfg.beta_min) * i as f64 / (cfg.steps - 1) as f64
            }
        })
        .collect();
    let jobs: Vec<(f64, usize)> = betas
        .iter()
        .flat_map(|&b| cfg.k_list.iter().map(move |&k| (b, k)))
        .collect();
    // collected in job order whatever the completion order
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(b, k)| sweep_row(b, k, &cfg))
        .collect();
    let mut table = Table::new(vec![
        "beta",
        "density",
        "K",
        "A",
        "B",
        "riesz_lower",
        "n_points",
        "error",
    ]);
    let mut timing = Table::new(vec!["beta", "K", "wall_ms"]);
    let mut json_rows = Vec::new();
    let mut failed = 0;
    for r in &rows {
        let (a, b, rl, err) = match &r.values {
            Ok((a, b, rl)) => (Some(*a), Some(*b), Some(*rl), String::new()),
            Err(e) => {
                failed += 1;
                (None, None, None, e.clone())
            }
        };
        let f = |v: Option<f64>| v.map_or(Cell::S(String::new()), Cell::F);
        table.push(vec![
            r.beta.into(),
            (1.0 / r.beta).into(),
            r.k.into(),
            f(a),
            f(b),
            f(rl),
            r.n_points.into(),
            err.clone().into(),
        ]);
        timing.push(vec![
            r.beta.into(),
            r.k.into(),
            (r.wall_ms as u64 as usize).into(),
        ]);
        json_rows.push(json!({
            "beta": r.beta, "density": 1.0 / r.beta, "K": r.k, "A": a, "B": b,
            "riesz_lower": rl, "n_points": r.n_points,
            "error": if err.is_empty() { Value::Null } else { Value::String(err) },
        }));
    }
    let result = json!({ "rows": json_rows, "failed_rows": failed });
    let mut out = CommandOutput::new(input, result, table);
    for &k in &cfg.k_list {
        let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.k == k).collect();
        let pick = |sel: fn(&(f64, f64, f64)) -> f64| -> Vec<(f64, f64)> {
            mine.iter()
                .filter_map(|r| r.values.as_ref().ok().map(|v| (r.beta, sel(v))))
                .collect()
        };
        out.plots.push(Plot {
            name: format!("A_K{k}"),
            columns: ["beta", "A"],
            points: pick(|v| v.0),
        });
        out.plots.push(Plot {
            name: format!("riesz_K{k}"),
            columns: ["beta", "riesz_lower"],
            points: pick(|v| v.2),
        });
    }
    out.row_timing = Some(timing);
    out.partial = failed > 0;
    if failed > 0 {
        out.warnings
            .push(format!("{failed} of {} rows failed", rows.len()));
    }
    Ok(out)
}

fn unimodular(set: &PointSet, alpha: f64, seed: u64) -> Vec<LogComplex> {
    let mut r = RngStream::new(seed);
    set.points()
        .iter()
        .map(|p| {
            LogComplex::new(
                0.5 * alpha * p.to_complex().norm_sqr(),
                2.0 * PI * r.next_f64(),
            )
        })
        .collect()
}

pub fn interpolate_cmd(cfg: InterpolateConfig, seed: u64) -> Result<CommandOutput, LabError> {
    let mut input = echo(&cfg);
    let set = points_of(&cfg.points, &mut input)?;
    let p = FockParams::new(cfg.alpha, 0.0)?;
    let data: Vec<LogComplex> = match &cfg.data {
        DataSpec::Kind(DataKind::Zero) => vec![LogComplex::ZERO; set.len()],
        DataSpec::Kind(DataKind::Unimodular) => unimodular(&set, cfg.alpha, seed),
        DataSpec::Values(v) => {
            if v.values.len() != set.len() {
                return Err(LabError::Config(format!(
                    "{} data values for {} nodes",
                    v.values.len(),
                    set.len()
                )));
            }
            v.values
                .iter()
                .map(|c| LogComplex::from_complex(Complex64::new(c[0], c[1])))
                .collect()
        }
    };
    let spec = interpolate(&set, &data, &p, ProductTruncation::all())?;
    let band = match cfg.band {
        Some([lo, hi]) => Some((lo, hi)),
        None => set.y_extent().map(|(lo, hi)| (lo - 5.0, hi + 5.0)),
    };
    let quad = QuadratureSpec::new(1e-300, cfg.rel_tol, 20000)?;
    let report = interpolation_report(&spec, band, &quad)?;
    let mut table = Table::new(vec![
        "index",
        "x",
        "y",
        "log_abs_data",
        "phase_data",
        "residual",
    ]);
    let residuals: Vec<f64> = (0..spec.nodes.len())
        .into_par_iter()
        .map(|i| {
            let a = spec.data[i];
            let v = spec.series(spec.nodes.z[i]);
            if a.is_zero() {
                if v.is_zero() {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                a.relative_diff(v)
            }
        })
        .collect();
    for i in 0..spec.nodes.len() {
        let z = spec.nodes.z[i];
        table.push(vec![
            spec.nodes.index[i].into(),
            z.re.into(),
            z.im.into(),
            spec.data[i].log_mod().into(),
            spec.data[i].phase().into(),
            residuals[i].into(),
        ]);
    }
    let result = json!({
        "n_nodes": spec.nodes.len(),
        "max_node_residual": report.max_node_residual,
        "norm_ratio": report.norm_ratio,
        "log_norm_ratio": report.log_norm_ratio,
        "quadrature_rel_error": report.quadrature_rel_error,
        "band": [report.y_lo, report.y_hi],
    });
    let mut out = CommandOutput::new(input, result, table);
    if let Some((lo, hi)) = band {
        let n = 400;
        let pts: Vec<(f64, f64)> = (0..=n)
            .into_par_iter()
            .map(|j| {
                let y = lo + (hi - lo) * j as f64 / n as f64;
                (
                    y,
                    cylfock::fock::log_weighted_eval(&spec, Complex64::new(0.5, y)),
                )
            })
            .collect();
        out.plots.push(Plot {
            name: "interpolant".into(),
            columns: ["y", "log_weighted_abs_F_at_x_0.5"],
            points: pts,
        });
    }
    Ok(out)
}

pub fn reconstruct(cfg: ReconstructConfig, seed: u64) -> Result<CommandOutput, LabError> {
    let mut input = echo(&cfg);
    let set = points_of(&cfg.points, &mut input)?;
    let p = FockParams::new(cfg.alpha, 0.0)?;
    let src = FockSeries::new(
        p,
        cfg.modes
            .iter()
            .map(|(k, c)| (*k, Complex64::new(c[0], c[1])))
            .collect(),
    );
    let samples: Vec<LogComplex> = set
        .points()
        .iter()
        .map(|q| src.eval(q.to_complex()))
        .collect();
    let rec = Reconstruction::new(
        &set,
        &samples,
        cfg.alpha,
        cfg.beta,
        ProductTruncation::all(),
    )?;
    let mut rng = RngStream::new(seed);
    let probes: Vec<Complex64> = (0..cfg.n_probes)
        .map(|_| Complex64::new(rng.next_f64(), rng.uniform(-cfg.probe_y, cfg.probe_y)))
        .collect();
    let evals: Vec<Result<(LogComplex, LogComplex), LabError>> = probes
        .par_iter()
        .map(|&w| Ok((rec.eval(w)?, src.eval(w))))
        .collect();
    let mut table = Table::new(vec![
        "x",
        "y",
        "re",
        "im",
        "true_re",
        "true_im",
        "rel_error",
    ]);
    let mut worst: f64 = 0.0;
    let mut plot = Vec::new();
    for (w, e) in probes.iter().zip(evals) {
        let (v, t) = e?;
        let err = v.relative_diff(t);
        worst = worst.max(err);
        let (vc, tc) = (v.to_complex(), t.to_complex());
        table.push(vec![
            w.re.into(),
            w.im.into(),
            vc.re.into(),
            vc.im.into(),
            tc.re.into(),
            tc.im.into(),
            err.into(),
        ]);
        plot.push((w.im, err));
    }
    plot.sort_by(|a, b| a.0.total_cmp(&b.0));
    let result = json!({
        "n_nodes": rec.nodes.len(),
        "n_probes": probes.len(),
        "max_rel_error": worst,
    });
    let mut out = CommandOutput::new(input, result, table);
    out.plots.push(Plot {
        name: "reconstruction_error".into(),
        columns: ["y", "rel_error"],
        points: plot,
    });
    Ok(out)
}

pub fn growth(cfg: GrowthConfig) -> Result<CommandOutput, LabError> {
    let mut input = echo(&cfg);
    let set = points_of(&cfg.points, &mut input)?;
    let p = FockParams::new(cfg.alpha, 0.0)?;
    let g = growth_profile(
        &set,
        &p,
        &GrowthGrid {
            y_max: cfg.y_max,
            ny: cfg.ny,
            nx: cfg.nx,
        },
    )?;
    let mut table = Table::new(vec!["y", "log_max_weighted", "log_min_weighted_over_dist"]);
    for r in &g.rows {
        table.push(vec![r.0.into(), r.1.into(), r.2.into()]);
    }
    let fit = |f: &(f64, f64, f64)| json!({"slope": f.0, "intercept": f.1, "max_residual": f.2});
    let result = json!({
        "gamma_plus": g.gamma_plus,
        "gamma_minus": g.gamma_minus,
        "upper_fits": {"y_pos": fit(&g.upper_fits[0]), "y_neg": fit(&g.upper_fits[1])},
        "lower_fits": {"y_pos": fit(&g.lower_fits[0]), "y_neg": fit(&g.lower_fits[1])},
        "sup_weighted": g.sup_weighted,
    });
    let mut out = CommandOutput::new(input, result, table);
    out.plots = vec![
        Plot {
            name: "growth_max".into(),
            columns: ["y", "log_max_weighted"],
            points: g.rows.iter().map(|r| (r.0, r.1)).collect(),
        },
        Plot {
            name: "growth_min".into(),
            columns: ["y", "log_min_weighted_over_dist"],
            points: g.rows.iter().map(|r| (r.0, r.2)).collect(),
        },
    ];
    Ok(out)
}

pub fn kernel_check(cfg: KernelCheckConfig, seed: u64) -> Result<CommandOutput, LabError> {
    let input = echo(&cfg);
    let mut rng = RngStream::new(seed);
    let mut jobs = Vec::new();
    for &[alpha, nu] in &cfg.params {
        let p = FockParams::new(alpha, nu)?;
        for _ in 0..cfg.n_pairs {
            let z = Complex64::new(rng.next_f64(), rng.uniform(-cfg.y_max, cfg.y_max));
            let w = Complex64::new(rng.next_f64(), rng.uniform(-cfg.y_max, cfg.y_max));
            jobs.push((p, z, w));
        }
    }
    let vals: Vec<Result<Vec<LogComplex>, LabError>> = jobs
        .par_iter()
        .map(|(p, z, w)| {
            KernelMethod::ALL
                .iter()
                .map(|&m| kernel(*z, *w, p, m, cfg.tol).map_err(LabError::from))
                .collect()
        })
        .collect();
    let mut table = Table::new(vec![
        "alpha",
        "nu",
        "z_re",
        "z_im",
        "w_re",
        "w_im",
        "log_abs_K",
        "arg_K",
        "dev_theta_periodization",
        "dev_theta_basis",
        "dev_periodization_basis",
    ]);
    let mut worst: f64 = 0.0;
    let mut per_params: Vec<f64> = vec![0.0; cfg.params.len()];
    for (i, ((p, z, w), v)) in jobs.iter().zip(vals).enumerate() {
        let v = v?;
        let d = [
            v[0].relative_diff(v[1]),
            v[0].relative_diff(v[2]),
            v[1].relative_diff(v[2]),
        ];
        let m = d.iter().copied().fold(0.0, f64::max);
        worst = worst.max(m);
        let slot = i / cfg.n_pairs.max(1);
        per_params[slot] = per_params[slot].max(m);
        table.push(vec![
            p.alpha().into(),
            p.nu().into(),
            z.re.into(),
            z.im.into(),
            w.re.into(),
            w.im.into(),
            v[0].log_mod().into(),
            v[0].phase().into(),
            d[0].into(),
            d[1].into(),
            d[2].into(),
        ]);
    }
    let result = json!({
        "methods": KernelMethod::ALL.iter().map(|m| m.name()).collect::<Vec<_>>(),
        "n_pairs": jobs.len(),
        "max_pairwise_deviation": worst,
        "per_params": cfg.params.iter().zip(&per_params).map(|(pp, m)| json!({
            "alpha": pp[0], "nu": pp[1], "max_pairwise_deviation": m,
        })).collect::<Vec<_>>(),
    });
    Ok(CommandOutput::new(input, result, table))
}

pub fn theta_eval(cfg: ThetaConfig) -> Result<CommandOutput, LabError> {
    let input = echo(&cfg);
    let args = ThetaArgs::new(
        cfg.a,
        cfg.b,
        Complex64::new(cfg.z[0], cfg.z[1]),
        Complex64::new(cfg.tau[0], cfg.tau[1]),
    )?;
    let s = theta_series(&args, cfg.tol)?;
    let c = s.value.to_complex();
    let mut table = Table::new(vec![
        "re",
        "im",
        "log_abs",
        "arg",
        "k_min",
        "k_max",
        "tail_bound",
    ]);
    table.push(vec![
        c.re.into(),
        c.im.into(),
        s.value.log_mod().into(),
        s.value.phase().into(),
        s.k_min.into(),
        s.k_max.into(),
        s.tail_bound.into(),
    ]);
    let result = json!({
        "re": c.re, "im": c.im, "log_abs": s.value.log_mod(), "arg": s.value.phase(),
        "k_min": s.k_min, "k_max": s.k_max, "tail_bound": s.tail_bound,
    });
    Ok(CommandOutput::new(input, result, table))
}
