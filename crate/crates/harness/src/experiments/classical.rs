//! Manufactured solutions on a refinement ladder, the discrete contraction and
//! convergence of the truncated representation formulas.

use super::{interior_error, sine_1d_spec};
use crate::config::{ExperimentConfig, GridConfig};
use crate::error::{HarnessError, Result};
use crate::family::bump_family;
use crate::report::{fitted_rate, ExperimentReport, Relation, Table};
use parabolic_core::operators::{
    manufactured_forcing, manufactured_second, manufactured_solution, manufactured_time_derivative, pde_residual, riesz_second,
    solve_cauchy, solve_full, time_derivative_op, TruncationSpec,
};
use parabolic_core::{CoefficientField, SampledField, SpatialField};
use serde_json::{json, Value};

const INTERIOR_T: (f64, f64) = (-1.0, 1.0);
const INTERIOR_RADIUS: f64 = 2.0;

pub fn defaults() -> Value {
    json!({
        "experiment": "classical",
        "fields": [sine_1d_spec()],
        "grid": {"dim": 1, "t": [-4.0, 4.0], "nt": 129, "x": [-4.0, 4.0], "nx": 128},
        "grids": {"ladder": {"dim": 1, "t": [-5.0, 1.5], "nt": 53, "x": [-6.0, 6.0], "nx": 96}},
        "resolutions": [8, 16, 32],
        "epsilon_multiples": [8.0, 4.0, 2.0],
        "family": {"size": 8, "max_bumps": 2, "time_center": [-1.0, 0.5], "time_width": [0.5, 0.9],
                   "space_center": [-1.0, 1.0], "space_width": [1.2, 1.8], "amplitude": [0.5, 1.5]},
        "tolerances": {"rate_min": 1.0, "contraction_slope": 5.0, "residual": 5e-3, "richardson": 5e-3},
    })
}

/// The ladder window at `r` cells per unit length.
fn ladder_grid(base: &GridConfig, r: usize, t: [f64; 2]) -> GridConfig {
    let r = r as f64;
    GridConfig {
        t,
        nt: ((t[1] - t[0]) * r).round() as usize + 1,
        nx: ((base.x[1] - base.x[0]) * r).round() as usize,
        padding: None,
        ..base.clone()
    }
}

pub fn run(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    if cfg.resolutions.len() < 2 {
        return Err(HarnessError::Config("the ladder needs at least two resolutions".into()));
    }
    for (fi, spec) in cfg.fields.iter().enumerate() {
        let field = spec.build()?;
        let tag = format!("f{fi}");
        ladder(cfg, &field, &tag, report)?;
        representation(cfg, &field, &tag, report)?;
    }
    Ok(())
}

pub fn ladder(cfg: &ExperimentConfig, field: &CoefficientField, tag: &str, report: &mut ExperimentReport) -> Result<()> {
    let base = cfg.secondary_grid("ladder")?;
    let rate_min = cfg.tolerance("rate_min")?;
    let slope = cfg.tolerance("contraction_slope")?;
    let mut table = Table::new(format!("{tag}_solution_ladder"), &["h", "epsilon", "full_error", "cauchy_error", "residual"]);
    let (mut hs, mut full, mut cauchy) = (Vec::new(), Vec::new(), Vec::new());
    let last = *cfg.resolutions.last().expect("nonempty");
    for &r in &cfg.resolutions {
        let gc = ladder_grid(base, r, base.t);
        let grid = gc.build(field)?;
        let h = grid.h_x();
        let f = SampledField::from_fn(grid.clone(), |t, x| manufactured_forcing(field, t, x));
        let u = solve_full(field, &f)?;
        let e_full = interior_error(&u, manufactured_solution, INTERIOR_T, INTERIOR_RADIUS);
        let res = pde_residual(field, &u, &f)?;
        let res_max = interior_error(&res, |_, _| 0.0, INTERIOR_T, INTERIOR_RADIUS);

        let cgc = ladder_grid(base, r, [0.0, base.t[1]]);
        let cgrid = cgc.build(field)?;
        let fc = SampledField::from_fn(cgrid.clone(), |t, x| manufactured_forcing(field, t, x));
        let g = SpatialField::from_fn(cgrid.space.clone(), |x| manufactured_solution(0.0, x));
        let v = solve_cauchy(field, &fc, &g)?;
        let e_cauchy = interior_error(&v, manufactured_solution, (0.0, INTERIOR_T.1), INTERIOR_RADIUS);

        table.push(vec![h, 2.0 * h, e_full, e_cauchy, res_max]);
        hs.push(h);
        full.push(e_full);
        cauchy.push(e_cauchy);
        if r == last {
            report.check(format!("solution.{tag}.equation_residual"), res_max, Relation::AtMost, cfg.tolerance("residual")?);
            report.dump(format!("{tag}_solution"), u.clone(), false);
        }

        let family = bump_family(&grid, &cfg.family, cfg.seed)?;
        let mut worst = f64::NEG_INFINITY;
        for member in &family {
            let u = solve_full(field, member)?;
            for p in [1.0, 2.0, f64::INFINITY] {
                worst = worst.max(u.lp_norm(p) / member.lp_norm(p));
            }
        }
        report.check(format!("contraction.{tag}.h{r}"), worst, Relation::AtMost, 1.0 + slope * h);
    }
    let r_full = fitted_rate(&hs, &full);
    let r_cauchy = fitted_rate(&hs, &cauchy);
    report.check(format!("solution.{tag}.full_rate"), r_full, Relation::AtLeast, rate_min);
    report.check(format!("solution.{tag}.cauchy_rate"), r_cauchy, Relation::AtLeast, rate_min);
    report.check_flag(format!("solution.{tag}.full_decreasing"), full.windows(2).all(|w| w[1] < w[0]));
    report.check_flag(format!("solution.{tag}.cauchy_decreasing"), cauchy.windows(2).all(|w| w[1] < w[0]));
    report.constant(format!("{tag}.full_rate"), r_full);
    report.constant(format!("{tag}.cauchy_rate"), r_cauchy);
    report.tables.push(table);
    Ok(())
}

pub fn representation(cfg: &ExperimentConfig, field: &CoefficientField, tag: &str, report: &mut ExperimentReport) -> Result<()> {
    if cfg.epsilon_multiples.len() < 2 {
        return Err(HarnessError::Config("the ε ladder needs at least two entries".into()));
    }
    let grid = cfg.grid.build(field)?;
    let h = grid.h_x();
    let f = SampledField::from_fn(grid.clone(), |t, x| manufactured_forcing(field, t, x));
    let n = field.dim();
    let mut table = Table::new(format!("{tag}_representation"), &["epsilon", "second_error", "time_error", "second_richardson", "time_richardson"]);
    let mut prev: Option<(Vec<SampledField>, SampledField, f64)> = None;
    let (mut second_err, mut time_err) = (Vec::new(), Vec::new());
    let mut last_extrapolated = (f64::NAN, f64::NAN);
    for &m in &cfg.epsilon_multiples {
        let eps = m * h;
        let trunc = TruncationSpec::omega(eps);
        let mut seconds = Vec::new();
        let mut e2 = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let r = riesz_second(field, &f, &trunc, i, j)?;
                e2 = e2.max(interior_error(&r, |t, x| manufactured_second(t, x, i, j), INTERIOR_T, INTERIOR_RADIUS));
                seconds.push(r);
            }
        }
        let d = time_derivative_op(field, &f, &trunc)?;
        let et = interior_error(&d, manufactured_time_derivative, INTERIOR_T, INTERIOR_RADIUS);
        let (mut x2, mut xt) = (f64::NAN, f64::NAN);
        if let Some((ps, pd, peps)) = &prev {
            // error ∝ ε²
            let q = (peps / eps).powi(2);
            let extrapolate = |a: &SampledField, b: &SampledField| {
                let mut out = a.clone();
                for (o, (x, y)) in out.values.iter_mut().zip(a.values.iter().zip(&b.values)) {
                    *o = (q * x - y) / (q - 1.0);
                }
                out
            };
            x2 = 0.0;
            let mut k = 0;
            for i in 0..n {
                for j in i..n {
                    let e = extrapolate(&seconds[k], &ps[k]);
                    x2 = x2.max(interior_error(&e, |t, x| manufactured_second(t, x, i, j), INTERIOR_T, INTERIOR_RADIUS));
                    k += 1;
                }
            }
            xt = interior_error(&extrapolate(&d, pd), manufactured_time_derivative, INTERIOR_T, INTERIOR_RADIUS);
            last_extrapolated = (x2, xt);
        }
        table.push(vec![eps, e2, et, x2, xt]);
        second_err.push(e2);
        time_err.push(et);
        prev = Some((seconds, d, eps));
    }
    let monotone = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);
    report.check_flag(format!("representation.{tag}.second_monotone"), monotone(&second_err));
    report.check_flag(format!("representation.{tag}.time_monotone"), monotone(&time_err));
    let tol = cfg.tolerance("richardson")?;
    report.check(format!("representation.{tag}.second_richardson"), last_extrapolated.0, Relation::AtMost, tol);
    report.check(format!("representation.{tag}.time_richardson"), last_extrapolated.1, Relation::AtMost, tol);
    report.tables.push(table);
    Ok(())
}
