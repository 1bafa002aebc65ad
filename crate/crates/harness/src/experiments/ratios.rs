//! Fitted constants of the weighted and mixed-norm inequalities over seeded
//! families. Each experiment has an `evaluate_*` form taking a prebuilt
//! [`Bank`], so that several experiments can share one set of derivatives.

use super::{power_weight, record_ratio, sine_1d_spec, two_level_spec};
use crate::bank::{Bank, FieldBank};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::ratio::estimate_ratio;
use crate::report::{ExperimentReport, Relation};
use parabolic_core::analysis::{
    distribution_weighted, lambda_levels, mixed_norm, muckenhoupt_constant, sharp_maximal, space_weight_values, spacetime_weight_values,
    time_weight_values, BallSampler, InnerNorm, MixedNormSpec, WeightDomain, WeightSpec,
};
use parabolic_core::SampledField;
use serde_json::{json, Value};

fn common(id: &str, weights: Value, norms: Value) -> Value {
    json!({
        "experiment": id,
        "fields": [sine_1d_spec(), two_level_spec(1)],
        "grid": {"dim": 1, "t": [-2.0, 2.0], "nt": 65, "x": [-4.0, 4.0], "nx": 64},
        "epsilon_multiples": [2.0],
        "weights": weights,
        "norms": norms,
        "radii": [0.25, 0.5, 1.0],
        "samples": {"levels": 16, "points_t": 7, "points_x": 9, "ball_centers": 9},
    })
}

pub fn weighted_sobolev_defaults() -> Value {
    common(
        "weighted-sobolev",
        json!({"strong": power_weight("spacetime", 1, 1.0), "weak": power_weight("spacetime", 1, -1.0)}),
        json!({"p": 2.0}),
    )
}

pub fn parabolic_bmo_defaults() -> Value {
    common("parabolic-bmo", json!({"w": power_weight("spacetime", 1, 1.0)}), json!({}))
}

pub fn mixed_sobolev_defaults() -> Value {
    common(
        "mixed-sobolev",
        json!({
            "nu": power_weight("time", 1, 0.5),
            "omega": power_weight("space", 1, 0.5),
            "weak_nu": power_weight("time", 1, -0.5),
        }),
        json!({"q": 3.0, "p": 2.0}),
    )
}

pub fn mixed_bmo_defaults() -> Value {
    common(
        "mixed-bmo",
        json!({"nu": power_weight("time", 1, 0.5), "omega": power_weight("space", 1, 0.5)}),
        json!({"p": 2.0}),
    )
}

pub fn mixed_holder_defaults() -> Value {
    common(
        "mixed-holder",
        json!({"nu": power_weight("time", 1, 0.5), "weak_nu": power_weight("time", 1, -0.5)}),
        json!({"q": 2.0, "alpha": 0.5}),
    )
}

fn sampler(w: &WeightSpec, cfg: &ExperimentConfig) -> Result<BallSampler> {
    Ok(BallSampler::symmetric(w.coords(), 2.0, cfg.sample("ball_centers")?, 0.05, cfg.seed))
}

/// Records the Muckenhoupt constant of `w` in `A_p` as a finite check.
fn record_class(report: &mut ExperimentReport, cfg: &ExperimentConfig, name: &str, w: &WeightSpec, p: f64) -> Result<()> {
    let c = muckenhoupt_constant(w, p, &sampler(w, cfg)?)?.constant;
    report.check(format!("weights.{name}.a{p}"), c, Relation::AtMost, f64::MAX);
    Ok(())
}

/// `sup_λ λ·measure(λ)` over the level grid below `top`.
fn weak_sup<F: Fn(f64) -> Result<f64>>(top: f64, levels: usize, measure: F) -> Result<f64> {
    if !(top > 0.0) {
        return Ok(0.0);
    }
    let mut best = 0.0f64;
    for l in lambda_levels(top, levels) {
        best = best.max(l * measure(l)?);
    }
    Ok(best)
}

fn slice_norms(g: &SampledField, inner: &InnerNorm) -> Result<Vec<f64>> {
    let lat = &g.grid.space;
    let omega = match inner {
        InnerNorm::LpOmega { omega, .. } => space_weight_values(lat, omega),
        _ => vec![1.0; lat.len()],
    };
    let cell = lat.cell_volume();
    (0..g.grid.time.count)
        .map(|k| {
            let s = g.slice(k);
            Ok(match inner {
                InnerNorm::Abs => s.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                InnerNorm::LpOmega { p, .. } => (s.iter().zip(&omega).map(|(v, w)| v.abs().powf(*p) * w).sum::<f64>() * cell).powf(1.0 / p),
                InnerNorm::Calpha { alpha } => parabolic_core::analysis::holder_seminorm(&g.spatial(k), *alpha)?,
            })
        })
        .collect()
}

/// `max_t ν(t)·‖g(t)‖_F`.
fn weighted_slice_sup(g: &SampledField, nu: &WeightSpec, inner: &InnerNorm) -> Result<f64> {
    let nu_v = time_weight_values(&g.grid.time, nu);
    Ok(slice_norms(g, inner)?.iter().zip(&nu_v).fold(0.0f64, |m, (a, b)| m.max(a * b)))
}

fn for_fields<F>(bank: &Bank, report: &mut ExperimentReport, mut body: F) -> Result<()>
where
    F: FnMut(&str, &FieldBank, &mut ExperimentReport) -> Result<()>,
{
    for (fi, fb) in bank.fields.iter().enumerate() {
        body(&format!("f{fi}"), fb, report)?;
    }
    Ok(())
}

pub fn weighted_sobolev(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    evaluate_weighted_sobolev(cfg, &Bank::build(cfg)?, report)
}

pub fn evaluate_weighted_sobolev(cfg: &ExperimentConfig, bank: &Bank, report: &mut ExperimentReport) -> Result<()> {
    let p = cfg.norm("p")?;
    let strong = cfg.weight("strong")?.clone();
    let weak = cfg.weight("weak")?.clone();
    let levels = cfg.sample("levels")?;
    record_class(report, cfg, "strong", &strong, p)?;
    record_class(report, cfg, "weak", &weak, 1.0)?;
    for_fields(bank, report, |tag, fb, report| {
        let norm = |g: &SampledField, w: &[f64], p: f64| -> f64 {
            let cell = g.grid.space_time_volume();
            (g.values.iter().zip(w).map(|(v, w)| v.abs().powf(p) * w).sum::<f64>() * cell).powf(1.0 / p)
        };
        let grid = &fb.members[0].f.grid;
        let ws = spacetime_weight_values(grid, &strong)?;
        let ww = spacetime_weight_values(grid, &weak)?;
        let est = estimate_ratio(&fb.members, |_, m| Ok(m.derivatives().map(|d| norm(d, &ws, p)).sum()), |_, m| Ok(norm(&m.f, &ws, p)))?;
        record_ratio(report, &format!("ratio.{tag}.strong"), &est);
        let est = estimate_ratio(
            &fb.members,
            |_, m| {
                let mut total = 0.0;
                for d in m.derivatives() {
                    total += weak_sup(d.max_abs(), levels, |l| Ok(distribution_weighted(d, l, &weak, &InnerNorm::Abs)?))?;
                }
                Ok(total)
            },
            |_, m| Ok(norm(&m.f, &ww, 1.0)),
        )?;
        record_ratio(report, &format!("ratio.{tag}.weak"), &est);
        Ok(())
    })
}

/// Sample points on a sublattice of `[−1.5, 1.5] × [−2, 2]ⁿ`.
fn sample_points(cfg: &ExperimentConfig, dim: usize) -> Result<Vec<Vec<f64>>> {
    let nt = cfg.sample("points_t")?.max(1);
    let nx = cfg.sample("points_x")?.max(1);
    let lin = |k: usize, count: usize, half: f64| if count == 1 { 0.0 } else { -half + 2.0 * half * k as f64 / (count - 1) as f64 };
    let mut out = Vec::new();
    for a in 0..nt {
        let t = lin(a, nt, 1.5);
        for flat in 0..nx.pow(dim as u32) {
            let mut rem = flat;
            let mut p = vec![t];
            for _ in 0..dim {
                p.push(lin(rem % nx, nx, 2.0));
                rem /= nx;
            }
            out.push(p);
        }
    }
    Ok(out)
}

pub fn parabolic_bmo(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    evaluate_parabolic_bmo(cfg, &Bank::build(cfg)?, report)
}

pub fn evaluate_parabolic_bmo(cfg: &ExperimentConfig, bank: &Bank, report: &mut ExperimentReport) -> Result<()> {
    let w = cfg.weight("w")?.clone();
    record_class(report, cfg, "w_reciprocal", &w.reciprocal(), 1.0)?;
    for_fields(bank, report, |tag, fb, report| {
        let points = sample_points(cfg, fb.field.dim())?;
        let weights: Vec<f64> = points.iter().map(|p| w.value(p)).collect();
        let grid = &fb.members[0].f.grid;
        let wf = spacetime_weight_values(grid, &w)?;
        let est = estimate_ratio(
            &fb.members,
            |_, m| {
                let mut total = 0.0;
                for d in m.derivatives() {
                    let mut best = 0.0f64;
                    for (p, wp) in points.iter().zip(&weights) {
                        best = best.max(wp * sharp_maximal(d, p, &InnerNorm::Abs, &cfg.radii)?);
                    }
                    total += best;
                }
                Ok(total)
            },
            |_, m| Ok(m.f.values.iter().zip(&wf).fold(0.0f64, |a, (v, w)| a.max(v.abs() * w))),
        )?;
        record_ratio(report, &format!("ratio.{tag}.bmo"), &est);
        Ok(())
    })
}

pub fn mixed_sobolev(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    evaluate_mixed_sobolev(cfg, &Bank::build(cfg)?, report)
}

pub fn evaluate_mixed_sobolev(cfg: &ExperimentConfig, bank: &Bank, report: &mut ExperimentReport) -> Result<()> {
    let (q, p) = (cfg.norm("q")?, cfg.norm("p")?);
    let nu = cfg.weight("nu")?.clone();
    let omega = cfg.weight("omega")?.clone();
    let weak_nu = cfg.weight("weak_nu")?.clone();
    let levels = cfg.sample("levels")?;
    record_class(report, cfg, "nu", &nu, q)?;
    record_class(report, cfg, "omega", &omega, p)?;
    record_class(report, cfg, "weak_nu", &weak_nu, 1.0)?;
    let strong = MixedNormSpec { q, p, nu, omega: omega.clone(), alpha: None };
    let weak = MixedNormSpec { q: 1.0, nu: weak_nu.clone(), ..strong.clone() };
    let inner = InnerNorm::LpOmega { p, omega };
    for_fields(bank, report, |tag, fb, report| {
        let est = estimate_ratio(
            &fb.members,
            |_, m| m.derivatives().map(|d| Ok(mixed_norm(d, &strong)?)).sum(),
            |_, m| Ok(mixed_norm(&m.f, &strong)?),
        )?;
        record_ratio(report, &format!("ratio.{tag}.strong"), &est);
        let est = estimate_ratio(
            &fb.members,
            |_, m| {
                let mut total = 0.0;
                for d in m.derivatives() {
                    let top = slice_norms(d, &inner)?.into_iter().fold(0.0f64, f64::max);
                    total += weak_sup(top, levels, |l| Ok(distribution_weighted(d, l, &weak_nu, &inner)?))?;
                }
                Ok(total)
            },
            |_, m| Ok(mixed_norm(&m.f, &weak)?),
        )?;
        record_ratio(report, &format!("ratio.{tag}.weak"), &est);
        Ok(())
    })
}

fn time_points(grid: &parabolic_core::GridSpec, dim: usize, half: f64, stride: usize) -> Vec<Vec<f64>> {
    (0..grid.time.count)
        .step_by(stride.max(1))
        .map(|k| grid.time.node(k))
        .filter(|t| t.abs() <= half + 1e-12)
        .map(|t| {
            let mut p = vec![t];
            p.extend(std::iter::repeat_n(0.0, dim));
            p
        })
        .collect()
}

pub fn mixed_bmo(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    evaluate_mixed_bmo(cfg, &Bank::build(cfg)?, report)
}

pub fn evaluate_mixed_bmo(cfg: &ExperimentConfig, bank: &Bank, report: &mut ExperimentReport) -> Result<()> {
    let p = cfg.norm("p")?;
    let nu = cfg.weight("nu")?.clone();
    let omega = cfg.weight("omega")?.clone();
    record_class(report, cfg, "omega", &omega, p)?;
    let inner = InnerNorm::LpOmega { p, omega };
    for_fields(bank, report, |tag, fb, report| {
        let grid = &fb.members[0].f.grid;
        let points = time_points(grid, fb.field.dim(), 1.5, 2);
        let est = estimate_ratio(
            &fb.members,
            |_, m| {
                let mut total = 0.0;
                for d in m.derivatives() {
                    let mut best = 0.0f64;
                    for pt in &points {
                        best = best.max(nu.value(&pt[..1]) * sharp_maximal(d, pt, &inner, &cfg.radii)?);
                    }
                    total += best;
                }
                Ok(total)
            },
            |_, m| weighted_slice_sup(&m.f, &nu, &inner),
        )?;
        record_ratio(report, &format!("ratio.{tag}.bmo"), &est);
        Ok(())
    })
}

pub fn mixed_holder(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    evaluate_mixed_holder(cfg, &Bank::build(cfg)?, report)
}

pub fn evaluate_mixed_holder(cfg: &ExperimentConfig, bank: &Bank, report: &mut ExperimentReport) -> Result<()> {
    let (q, alpha) = (cfg.norm("q")?, cfg.norm("alpha")?);
    let nu = cfg.weight("nu")?.clone();
    let weak_nu = cfg.weight("weak_nu")?.clone();
    let levels = cfg.sample("levels")?;
    record_class(report, cfg, "nu", &nu, q)?;
    record_class(report, cfg, "weak_nu", &weak_nu, 1.0)?;
    let dim = bank.fields.first().map(|f| f.field.dim()).unwrap_or(1);
    let unit = WeightSpec::unit(WeightDomain::Space, dim);
    let strong = MixedNormSpec { q, p: 1.0, nu, omega: unit, alpha: Some(alpha) };
    let weak = MixedNormSpec { q: 1.0, nu: weak_nu.clone(), ..strong.clone() };
    let inner = InnerNorm::Calpha { alpha };
    let unit_time = WeightSpec::unit(WeightDomain::Time, dim);
    for_fields(bank, report, |tag, fb, report| {
        let est = estimate_ratio(
            &fb.members,
            |_, m| m.derivatives().map(|d| Ok(mixed_norm(d, &strong)?)).sum(),
            |_, m| Ok(mixed_norm(&m.f, &strong)?),
        )?;
        record_ratio(report, &format!("ratio.{tag}.strong"), &est);
        let est = estimate_ratio(
            &fb.members,
            |_, m| {
                let mut total = 0.0;
                for d in m.derivatives() {
                    let top = slice_norms(d, &inner)?.into_iter().fold(0.0f64, f64::max);
                    total += weak_sup(top, levels, |l| Ok(distribution_weighted(d, l, &weak_nu, &inner)?))?;
                }
                Ok(total)
            },
            |_, m| Ok(mixed_norm(&m.f, &weak)?),
        )?;
        record_ratio(report, &format!("ratio.{tag}.weak"), &est);
        let est = estimate_ratio(
            &fb.members,
            |_, m| m.second.iter().map(|d| weighted_slice_sup(d, &unit_time, &inner)).sum::<Result<f64>>(),
            |_, m| weighted_slice_sup(&m.f, &unit_time, &inner),
        )?;
        record_ratio(report, &format!("ratio.{tag}.riesz_holder"), &est);
        Ok(())
    })
}
