//! Experiment bodies. Check names carry a group prefix (`kernel.`, `cz.`,
//! `solution.` …) so that callers can select related verdicts.

pub mod cauchy;
pub mod classical;
pub mod kernel_audit;
pub mod ratios;

use crate::ratio::RatioEstimate;
use crate::report::{ExperimentReport, Relation, Table};
use parabolic_core::SampledField;
use serde_json::{json, Value};

/// `a(t) = 1 + ½ sin t`, `Λ = ½`.
pub fn sine_1d_spec() -> Value {
    json!({"kind": "smooth-periodic", "dim": 1, "base": [1.0], "modulation": [0.5], "lambda": 0.5})
}

/// `2I` before `t = 0`, `I/2` after, `Λ = ½`.
pub fn two_level_spec(dim: usize) -> Value {
    let eye = |s: f64| -> Vec<f64> { (0..dim * dim).map(|k| if k % (dim + 1) == 0 { s } else { 0.0 }).collect() };
    json!({
        "kind": "piecewise-constant",
        "dim": dim,
        "lambda": 0.5,
        "initial": eye(2.0),
        "breakpoints": [{"t": 0.0, "entries": eye(0.5)}],
    })
}

pub fn power_weight(domain: &str, dim: usize, gamma: f64) -> Value {
    json!({"domain": domain, "dim": dim, "form": "power", "gamma": gamma})
}

/// `max |g − exact|` over nodes with `t ∈ [t0, t1]` and `|x|_∞ ≤ radius`.
pub fn interior_error<F: Fn(f64, &[f64]) -> f64>(g: &SampledField, exact: F, t: (f64, f64), radius: f64) -> f64 {
    let grid = &g.grid;
    let m = grid.space.len();
    let mut err = 0.0f64;
    for k in 0..grid.time.count {
        let tk = grid.time.node(k);
        if tk < t.0 - 1e-12 || tk > t.1 + 1e-12 {
            continue;
        }
        for q in 0..m {
            let x = grid.space.coords(q);
            if x.iter().any(|v| v.abs() > radius + 1e-12) {
                continue;
            }
            err = err.max((g.values[k * m + q] - exact(tk, &x)).abs());
        }
    }
    err
}

/// Checks `<name>.finite` and `<name>.stability` and a table of ratios.
pub fn record_ratio(report: &mut ExperimentReport, name: &str, est: &RatioEstimate) {
    report.check(format!("{name}.constant"), est.constant, Relation::AtMost, f64::MAX);
    report.check(format!("{name}.stability"), est.stability, Relation::AtMost, crate::ratio::STABILITY_LIMIT);
    report.constant(name.to_string(), est.constant);
    let mut table = Table::new(name.replace('.', "_"), &["member", "ratio"]);
    for (i, r) in est.ratios.iter().enumerate() {
        table.push(vec![i as f64, *r]);
    }
    report.tables.push(table);
}
