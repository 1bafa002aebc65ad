//! Gaussian-datum oracles for the Cauchy problem and the comparison of the two
//! truncations.

use super::{sine_1d_spec, two_level_spec};
use crate::config::{ExperimentConfig, FamilyConfig};
use crate::error::{HarnessError, Result};
use crate::family::bump_family;
use crate::report::{ExperimentReport, Relation, Table};
use parabolic_core::operators::{cauchy_second, cauchy_time, comparison_difference, comparison_maximal_check, solve_cauchy, TruncationSpec};
use parabolic_core::{CoefficientField, SampledField, SpatialField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

pub fn defaults() -> Value {
    json!({
        "experiment": "cauchy",
        "fields": [sine_1d_spec(), two_level_spec(1)],
        "grid": {"dim": 1, "t": [-2.0, 2.0], "nt": 65, "x": [-4.0, 4.0], "nx": 64},
        "grids": {"cauchy": {"dim": 1, "t": [0.0, 1.0], "nt": 11, "x": [-8.0, 8.0], "nx": 128, "padding": 256}},
        "epsilon_multiples": [1.0],
        "family": {"size": 8, "max_bumps": 2, "time_center": [-1.0, 0.5], "time_width": [0.5, 0.9],
                   "space_center": [-1.0, 1.0], "space_width": [1.2, 1.8], "amplitude": [0.5, 1.5]},
        "radii": [0.25, 0.5, 1.0, 2.0],
        "samples": {"pairs": 1000, "maximal_points": 16},
        "tolerances": {"gaussian": 1e-5, "initial_trace": 1e-10, "contraction_slope": 5.0, "epsilon_max": 0.5},
    })
}

/// Cauchy data `g = e^{−|x|²}` with `f = 0`; for `a(t)` scalar multiples of the
/// identity, `v = e^{−t} s^{−n/2} e^{−|x|²/s}` with `s = 1 + 4∫₀ᵗa`.
fn gaussian(field: &CoefficientField, t: f64, x: &[f64]) -> Result<(f64, Vec<Vec<f64>>, f64)> {
    let n = x.len();
    let scalar = if t > 0.0 { field.integral(0.0, t)?[(0, 0)] } else { 0.0 };
    let s = 1.0 + 4.0 * scalar;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let v = (-t).exp() * s.powf(-0.5 * n as f64) * (-r2 / s).exp();
    let hess: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| v * (4.0 * x[i] * x[j] / (s * s) - if i == j { 2.0 / s } else { 0.0 })).collect())
        .collect();
    let a = field.eval(t)[(0, 0)];
    let lap: f64 = (0..n).map(|i| hess[i][i]).sum();
    Ok((v, hess, a * lap - v))
}

fn is_scalar_field(field: &CoefficientField, t: &[f64]) -> bool {
    t.iter().all(|&s| {
        let a = field.eval(s);
        let n = a.nrows();
        (0..n).all(|i| (0..n).all(|j| if i == j { (a[(i, j)] - a[(0, 0)]).abs() < 1e-14 } else { a[(i, j)].abs() < 1e-14 }))
    })
}

pub fn run(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    for (fi, spec) in cfg.fields.iter().enumerate() {
        let field = spec.build()?;
        let tag = format!("f{fi}");
        gaussian_oracle(cfg, &field, &tag, report)?;
        comparison(cfg, &field, &tag, report)?;
    }
    Ok(())
}

fn gaussian_oracle(cfg: &ExperimentConfig, field: &CoefficientField, tag: &str, report: &mut ExperimentReport) -> Result<()> {
    let grid = cfg.secondary_grid("cauchy")?.build(field)?;
    if grid.time.lo != 0.0 {
        return Err(HarnessError::Config("the Cauchy grid starts at t = 0".into()));
    }
    let times: Vec<f64> = (0..grid.time.count).map(|k| grid.time.node(k)).collect();
    if !is_scalar_field(field, &times) {
        return Err(HarnessError::Config("the Gaussian oracle needs scalar coefficients".into()));
    }
    let n = field.dim();
    let f = SampledField::zeros(grid.clone());
    let g = SpatialField::from_fn(grid.space.clone(), |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
    let trunc = TruncationSpec::sigma(cfg.epsilon_multiples.first().copied().unwrap_or(1.0) * grid.h_x());
    let v = solve_cauchy(field, &f, &g)?;
    report.dump(format!("{tag}_gaussian_solution"), v.clone(), false);
    let time = cauchy_time(field, &f, &g, &trunc)?;
    let seconds = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| Ok(((i, j), cauchy_second(field, &f, &g, &trunc, i, j)?)))
        .collect::<Result<Vec<_>>>()?;
    let m = grid.space.len();
    let (mut ev, mut es, mut et) = (0.0f64, 0.0f64, 0.0f64);
    for (k, &t) in times.iter().enumerate() {
        for q in 0..m {
            let x = grid.space.coords(q);
            let (exact, hess, dt) = gaussian(field, t, &x)?;
            let idx = k * m + q;
            ev = ev.max((v.values[idx] - exact).abs());
            et = et.max((time.values[idx] - dt).abs());
            for ((i, j), s) in &seconds {
                es = es.max((s.values[idx] - hess[*i][*j]).abs());
            }
        }
    }
    let tol = cfg.tolerance("gaussian")?;
    report.check(format!("gaussian.{tag}.solution"), ev, Relation::AtMost, tol);
    report.check(format!("gaussian.{tag}.second"), es, Relation::AtMost, tol);
    report.check(format!("gaussian.{tag}.time"), et, Relation::AtMost, tol);
    let trace = v.slice(0).iter().zip(&g.values).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    report.check(format!("gaussian.{tag}.initial_trace"), trace, Relation::AtMost, cfg.tolerance("initial_trace")?);

    // ‖v‖_∞ ≤ ‖g‖_∞ + ‖f‖_∞ with a forcing from the family
    let window = FamilyConfig { size: 4, time_center: [0.4, 0.6], time_width: [0.3, 0.35], ..cfg.family.clone() };
    let family = bump_family(&grid, &window, cfg.seed)?;
    let slope = cfg.tolerance("contraction_slope")?;
    let mut worst = 0.0f64;
    for member in &family {
        let v = solve_cauchy(field, member, &g)?;
        worst = worst.max(v.max_abs() / (g.max_abs() + member.max_abs()));
    }
    report.check(format!("contraction.{tag}.cauchy"), worst, Relation::AtMost, 1.0 + slope * grid.h_x());
    Ok(())
}

fn comparison(cfg: &ExperimentConfig, field: &CoefficientField, tag: &str, report: &mut ExperimentReport) -> Result<()> {
    let grid = cfg.grid.build(field)?;
    let family = bump_family(&grid, &cfg.family, cfg.seed)?;
    let n = field.dim();
    let h = grid.h_x();
    let eps_max = cfg.tolerance("epsilon_max")?;
    let pairs = cfg.sample("pairs")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xC0FF_EE00);
    let mut worst = 0.0f64;
    let mut dominated = 0usize;
    let mut table = Table::new(format!("{tag}_comparison"), &["t", "epsilon", "difference", "majorant"]);
    for k in 0..pairs {
        let f = &family[k % family.len()];
        let mut point = vec![rng.random_range(-1.5..1.5)];
        point.extend((0..n).map(|_| rng.random_range(-2.0..2.0)));
        let eps = (h.ln() + rng.random_range(0.0..1.0) * (eps_max / h).ln()).exp();
        let c = comparison_difference(field, f, eps, &point)?;
        if c.dominated() {
            dominated += 1;
        }
        if c.majorant > 0.0 {
            worst = worst.max(c.difference / c.majorant);
        } else if c.difference > 0.0 {
            worst = f64::INFINITY;
        }
        if k < 64 {
            table.push(vec![point[0], eps, c.difference, c.majorant]);
        }
    }
    report.check(format!("comparison.{tag}.worst_ratio"), worst, Relation::AtMost, 1.0);
    report.check(format!("comparison.{tag}.dominated_fraction"), dominated as f64 / pairs as f64, Relation::AtLeast, 1.0);
    report.tables.push(table);

    let points = cfg.sample("maximal_points")?;
    let eps_list: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|m| m * h).filter(|e| *e <= eps_max).collect();
    let mut held = 0usize;
    for k in 0..points {
        let f = &family[k % family.len()];
        let mut point = vec![rng.random_range(-1.5..1.5)];
        point.extend((0..n).map(|_| rng.random_range(-2.0..2.0)));
        if comparison_maximal_check(field, f, &eps_list, &point, &cfg.radii)?.holds() {
            held += 1;
        }
    }
    report.check(format!("comparison.{tag}.maximal_fraction"), held as f64 / points.max(1) as f64, Relation::AtLeast, 1.0);
    Ok(())
}
