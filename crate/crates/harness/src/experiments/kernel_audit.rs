//! Kernel identities, multiplication terms, the semigroup property,
//! Calderón–Zygmund constants and the weight machinery.

use super::{power_weight, sine_1d_spec, two_level_spec};
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::family::profile;
use crate::report::{fitted_rate, ExperimentReport, Relation, Table};
use parabolic_core::analysis::{muckenhoupt_constant, reverse_holder_bracket, BallSampler, WeightForm, WeightSpec};
use parabolic_core::coeffs::FieldKind;
use parabolic_core::corrections::{corrections, limit_consistency, trace_identity_residual, CorrectionQuad};
use parabolic_core::kernel::{
    adjoint_pde_residual, kernel_bound_check, kernel_eval, kernel_jet, kernel_mass, KernelPoint, HERMITE_ORDER,
};
use parabolic_core::operators::{cz_kernel_checks, kernel_cancellation};
use parabolic_core::{kernel, Axis, CoefficientField, Error as CoreError, GridSpec, Lattice, SampledField, Smoothness};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

/// `erf(1/2)`.
pub const ERF_HALF: f64 = 0.520_499_877_813_046_5;

pub fn defaults() -> Value {
    json!({
        "experiment": "kernel-audit",
        "fields": [
            {"kind": "identity", "dim": 1},
            {"kind": "identity", "dim": 2},
            {"kind": "constant", "dim": 2, "entries": [1.5, 0.3, 0.3, 0.8], "lambda": 0.5},
            sine_1d_spec(),
            {"kind": "smooth-periodic", "dim": 2, "base": [1.0, 0.0, 0.0, 1.0], "modulation": [0.5, 0.2, 0.2, -0.3],
             "frequency": 1.0, "phase": 0.3, "lambda": 0.4},
            two_level_spec(1),
            two_level_spec(2),
            {"kind": "random-piecewise", "dim": 2, "lambda": 0.4, "seed": 3, "density": 1.0, "horizon": 8.0},
        ],
        "grid": {"dim": 1, "t": [-1.0, 1.0], "nt": 9, "x": [-8.0, 8.0], "nx": 256, "padding": 0},
        "grids": {
            "semigroup_n1": {"dim": 1, "t": [-1.0, 1.0], "nt": 9, "x": [-8.0, 8.0], "nx": 256, "padding": 0},
            "semigroup_n2": {"dim": 2, "t": [-1.0, 1.0], "nt": 9, "x": [-8.0, 8.0], "nx": 128, "padding": 0},
        },
        "weights": {
            "spacetime_a2": power_weight("spacetime", 1, 1.0),
            "spacetime_a1": power_weight("spacetime", 1, -1.0),
            "space_a2": power_weight("space", 1, 0.5),
            "space_a1": power_weight("space", 1, -0.5),
            "time_a2": power_weight("time", 1, 0.5),
            "time_a1": power_weight("time", 1, -0.5),
        },
        "samples": {"mass": 100, "adjoint": 100, "jets": 1000, "cancellation": 100, "trace": 100,
                    "bounds": 2000, "cz_pairs": 1000, "ball_centers": 9, "sweep": 5, "bisection": 12},
        "tolerances": {"mass": 1e-10, "adjoint": 1e-10, "jet": 1e-6, "cancellation": 1e-10, "correction": 1e-8,
                       "trace": 2e-8, "semigroup": 1e-5, "semigroup_rate": 1.8, "semigroup_floor": 1e-13,
                       "cz_stability": 0.1, "blow_up": 2.0},
    })
}

fn smooth(field: &CoefficientField) -> bool {
    matches!(field.kind(), FieldKind::Constant | FieldKind::SmoothPeriodic)
}

struct Sample {
    t: f64,
    tau: f64,
    x: Vec<f64>,
}

/// `t ∈ [−3, 3]`, `τ` log-uniform in `[0.05, 4]`, `x ~ N(0, τ I)`.
fn sample(rng: &mut ChaCha8Rng, n: usize) -> Sample {
    let t = rng.random_range(-3.0..3.0);
    let tau = rng.random_range(0.05f64.ln()..4f64.ln()).exp();
    let x = (0..n).map(|_| tau.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
    Sample { t, tau, x }
}

pub fn run(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let fields = cfg.built_fields()?;
    identities(cfg, &fields, report)?;
    multiplication_terms(cfg, &fields, report)?;
    semigroup(cfg, &fields, report)?;
    calderon_zygmund(cfg, &fields, report)?;
    weights(cfg, report)?;
    kernel_slices(&fields, report)?;
    Ok(())
}

/// Kernel slices `p(0,τ,·)` at `τ = 1/2`, dumped with CSV copies; the time
/// column holds `τ`.
pub fn kernel_slices(fields: &[CoefficientField], report: &mut ExperimentReport) -> Result<()> {
    let tau = 0.5;
    for (fi, field) in fields.iter().enumerate() {
        let lattice = Lattice::cube(field.dim(), -8.0, 8.0, if field.dim() == 1 { 256 } else { 128 });
        let values = kernel::kernel_slice(field, 0.0, tau, &lattice)?;
        let grid = GridSpec::new(Axis { lo: tau, step: 1.0, count: 1 }, lattice, 0)?;
        let slice = SampledField { grid, values, smoothness: Smoothness::Smooth, compact_support: false };
        report.dump(format!("f{fi}_kernel_slice"), slice, true);
    }
    Ok(())
}

/// Five-point central difference of `g` at `0` with step `h`.
fn d5<F: Fn(f64) -> Result<f64>>(g: F, h: f64) -> Result<f64> {
    Ok((g(-2.0 * h)? - 8.0 * g(-h)? + 8.0 * g(h)? - g(2.0 * h)?) / (12.0 * h))
}

/// Relative jet error against finite differences: gradient, Hessian, `∂ₜ`
/// and `∂_τ`, each scaled by its natural size.
fn jet_error(field: &CoefficientField, s: &Sample) -> Result<f64> {
    let n = field.dim();
    let jet = kernel_jet(field, &KernelPoint::new(s.t, s.tau, &s.x), false)?;
    let p = |t: f64, tau: f64, x: &[f64]| -> Result<f64> { Ok(kernel_eval(field, &KernelPoint::new(t, tau, x))?) };
    let hx = 1e-3 * s.tau.sqrt();
    let shifted = |i: usize, d: f64| -> Vec<f64> {
        let mut y = s.x.clone();
        y[i] += d;
        y
    };
    let mut worst = 0.0f64;
    let mut grad_fd = vec![0.0; n];
    for (i, g) in grad_fd.iter_mut().enumerate() {
        *g = d5(|d| p(s.t, s.tau, &shifted(i, d)), hx)?;
    }
    let gmax = jet.grad.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let gscale = gmax + jet.p / s.tau.sqrt();
    for (a, b) in jet.grad.iter().zip(&grad_fd) {
        worst = worst.max((a - b).abs() / gscale);
    }
    let hscale = jet.hess.iter().fold(0.0f64, |m, v| m.max(v.abs())) + jet.p / s.tau;
    for j in 0..n {
        let col: Vec<f64> = (0..n)
            .map(|i| {
                d5(
                    |d| {
                        let g = kernel_jet(field, &KernelPoint::new(s.t, s.tau, &shifted(j, d)), false)?;
                        Ok(g.grad[i])
                    },
                    hx,
                )
            })
            .collect::<Result<_>>()?;
        for (i, v) in col.iter().enumerate() {
            worst = worst.max((jet.hess[(i, j)] - v).abs() / hscale);
        }
    }
    let dt = d5(|d| p(s.t + d, s.tau, &s.x), 1e-3)?;
    worst = worst.max((jet.dt - dt).abs() / (jet.dt.abs() + jet.p));
    let dtau = d5(|d| p(s.t, s.tau + d, &s.x), 1e-3 * s.tau)?;
    worst = worst.max((jet.dtau - dtau).abs() / (jet.dtau.abs() + jet.p / s.tau));
    Ok(worst)
}

pub fn identities(cfg: &ExperimentConfig, fields: &[CoefficientField], report: &mut ExperimentReport) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let smooth_fields: Vec<&CoefficientField> = fields.iter().filter(|f| smooth(f)).collect();
    if smooth_fields.is_empty() {
        return Err(HarnessError::Config("the kernel audit needs at least one smooth field".into()));
    }

    let mut mass = 0.0f64;
    let mut cancel = 0.0f64;
    for field in fields {
        for _ in 0..cfg.sample("mass")? {
            let s = sample(&mut rng, field.dim());
            mass = mass.max((kernel_mass(field, s.t, s.tau, HERMITE_ORDER)? - (-s.tau).exp()).abs());
        }
        for _ in 0..cfg.sample("cancellation")? {
            let s = sample(&mut rng, field.dim());
            let n = field.dim();
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            cancel = cancel.max(kernel_cancellation(field, s.t, s.tau, i, j)?.abs());
        }
    }
    report.check("kernel.mass", mass, Relation::AtMost, cfg.tolerance("mass")?);
    report.check("kernel.cancellation", cancel, Relation::AtMost, cfg.tolerance("cancellation")?);

    let mut adjoint = 0.0f64;
    for field in &smooth_fields {
        for _ in 0..cfg.sample("adjoint")? {
            let s = sample(&mut rng, field.dim());
            adjoint = adjoint.max(adjoint_pde_residual(field, &KernelPoint::new(s.t, s.tau, &s.x))?.abs());
        }
    }
    report.check("kernel.adjoint", adjoint, Relation::AtMost, cfg.tolerance("adjoint")?);

    let mut jets = 0.0f64;
    for k in 0..cfg.sample("jets")? {
        let field = smooth_fields[k % smooth_fields.len()];
        let s = sample(&mut rng, field.dim());
        jets = jets.max(jet_error(field, &s)?);
    }
    report.check("kernel.jet", jets, Relation::AtMost, cfg.tolerance("jet")?);

    let mut table = Table::new("kernel_bounds", &["field", "c", "tau_power", "damping", "constant"]);
    for (fi, field) in fields.iter().enumerate() {
        let b = kernel_bound_check(field, cfg.sample("bounds")?, cfg.seed)?;
        report.check(format!("kernel.bounds.f{fi}.nonpositive_tau"), b.nonpositive_tau_violations as f64, Relation::AtMost, 0.0);
        for fit in &b.fits {
            report.check(format!("kernel.bounds.f{fi}.{}", fit.name), fit.constant, Relation::AtMost, f64::MAX);
            table.push(vec![fi as f64, fit.c, fit.tau_power, fit.damping, fit.constant]);
        }
    }
    report.tables.push(table);

    let audit = kernel::symbol_normalization_audit(&fields[0], 0.3, 0.7)?;
    report.check_flag("kernel.symbol_normalization", audit.iter().any(|c| c.consistent));
    Ok(())
}

pub fn multiplication_terms(cfg: &ExperimentConfig, fields: &[CoefficientField], report: &mut ExperimentReport) -> Result<()> {
    let one = CoefficientField::identity(1);
    let v = corrections(&one, 0.0, &CorrectionQuad::default())?;
    let tol = cfg.tolerance("correction")?;
    report.check("corrections.identity_j", (v.j - ERF_HALF).abs(), Relation::AtMost, tol);
    report.check("corrections.identity_i", (v.i[(0, 0)] - (1.0 - ERF_HALF)).abs(), Relation::AtMost, tol);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7ACE);
    let trace_tol = cfg.tolerance("trace")?;
    for (fi, field) in fields.iter().enumerate() {
        let mut worst = 0.0f64;
        for _ in 0..cfg.sample("trace")? {
            worst = worst.max(trace_identity_residual(field, rng.random_range(-3.0..3.0))?);
        }
        report.check(format!("corrections.f{fi}.trace"), worst, Relation::AtMost, trace_tol);
    }

    let rows = limit_consistency(&one, 0.0, &[0.4, 0.2, 0.1])?;
    let mut table = Table::new("correction_limit", &["epsilon", "error"]);
    for r in &rows {
        table.push(vec![r.epsilon, r.error]);
    }
    report.check_flag("corrections.limit_decreasing", rows.windows(2).all(|w| w[1].error < w[0].error));
    report.tables.push(table);
    Ok(())
}

pub fn semigroup(cfg: &ExperimentConfig, fields: &[CoefficientField], report: &mut ExperimentReport) -> Result<()> {
    let tol = cfg.tolerance("semigroup")?;
    let floor = cfg.tolerance("semigroup_floor")?;
    let rate_min = cfg.tolerance("semigroup_rate")?;
    let mut table = Table::new("semigroup", &["field", "h", "residual"]);
    for (fi, field) in fields.iter().enumerate() {
        let Some(gc) = cfg.grids.get(&format!("semigroup_n{}", field.dim())) else { continue };
        if field.kind() != FieldKind::PiecewiseConstant && field.kind() != FieldKind::SmoothPeriodic {
            continue;
        }
        let mut hs = Vec::new();
        let mut res = Vec::new();
        for refine in [1usize, 2] {
            let mut g = gc.clone();
            g.nx *= refine;
            let grid = g.build(field)?;
            let f = SampledField::from_fn(grid.clone(), |t, x| {
                (1.0 + 0.5 * t) * profile(x.iter().map(|v| v * v).sum::<f64>() / 9.0)
            });
            let r = kernel::semigroup_residual_field(field, &f, 0.5, 0.1, 0.4)?.into_iter().fold(0.0f64, f64::max);
            table.push(vec![fi as f64, grid.h_x(), r]);
            hs.push(grid.h_x());
            res.push(r);
        }
        let worst = res.iter().copied().fold(0.0f64, f64::max);
        report.check(format!("semigroup.f{fi}.residual"), worst, Relation::AtMost, tol);
        let rate = fitted_rate(&hs, &res);
        // residuals at rounding level carry no rate
        let at_floor = res.iter().all(|r| *r <= floor);
        report.constant(format!("semigroup.f{fi}.rate"), rate);
        report.check_flag(format!("semigroup.f{fi}.rate_or_floor"), at_floor || rate >= rate_min);
    }
    report.tables.push(table);
    Ok(())
}

pub fn calderon_zygmund(cfg: &ExperimentConfig, fields: &[CoefficientField], report: &mut ExperimentReport) -> Result<()> {
    let pairs = cfg.sample("cz_pairs")?;
    let tol = cfg.tolerance("cz_stability")?;
    let mut table = Table::new("cz", &["field", "pairs", "size", "smoothness", "operator", "operator_derivative"]);
    for (fi, field) in fields.iter().enumerate() {
        let a = cz_kernel_checks(field, pairs, cfg.seed)?;
        let b = cz_kernel_checks(field, 2 * pairs, cfg.seed.wrapping_add(1))?;
        for r in [&a, &b] {
            table.push(vec![fi as f64, r.accepted as f64, r.size_constant, r.smoothness_constant, r.operator_bound, r.operator_derivative_bound]);
        }
        report.check(format!("cz.f{fi}.size_drift"), (b.size_constant / a.size_constant - 1.0).abs(), Relation::AtMost, tol);
        report.check(format!("cz.f{fi}.smoothness_drift"), (b.smoothness_constant / a.smoothness_constant - 1.0).abs(), Relation::AtMost, tol);
        report.check(format!("cz.f{fi}.operator_bound"), a.operator_bound.max(b.operator_bound), Relation::AtMost, f64::MAX);
        report.check(
            format!("cz.f{fi}.operator_derivative_bound"),
            a.operator_derivative_bound.max(b.operator_derivative_bound),
            Relation::AtMost,
            f64::MAX,
        );
        report.constant(format!("cz.f{fi}.size"), b.size_constant);
        report.constant(format!("cz.f{fi}.smoothness"), b.smoothness_constant);
    }
    report.tables.push(table);
    Ok(())
}

fn gamma(w: &WeightSpec) -> Result<f64> {
    match w.form {
        WeightForm::Power { gamma } => Ok(gamma),
        _ => Err(HarnessError::Config("weight probes take power weights".into())),
    }
}

/// `Some(constant)`, or `None` when the class test diverges.
fn class_constant(w: &WeightSpec, p: f64, sampler: &BallSampler) -> Result<Option<f64>> {
    match muckenhoupt_constant(w, p, sampler) {
        Ok(r) if r.constant.is_finite() => Ok(Some(r.constant)),
        Ok(_) | Err(CoreError::NonIntegrableWeight(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

pub fn weights(cfg: &ExperimentConfig, report: &mut ExperimentReport) -> Result<()> {
    let centers = cfg.sample("ball_centers")?;
    let steps = cfg.sample("sweep")?;
    let blow_up = cfg.tolerance("blow_up")?;
    let mut sweep_table = Table::new("weight_sweep", &["entry", "gamma", "constant"]);
    let mut rh_table = Table::new("reverse_holder", &["entry", "finite", "divergent", "critical"]);
    for (ei, (name, w)) in cfg.weights.iter().enumerate() {
        let g = gamma(w)?;
        let d = w.homogeneous_dim();
        let sampler = BallSampler::symmetric(w.coords(), 2.0, centers, 0.01, cfg.seed);
        // A₁ entries have γ ≤ 0, the rest are tested in A₂
        let p = if g <= 0.0 { 1.0 } else { 2.0 };
        let c = class_constant(w, p, &sampler)?;
        report.check(format!("weights.{name}.in_class"), c.unwrap_or(f64::INFINITY), Relation::AtMost, f64::MAX);

        // sweep toward the end of the class on the side of γ
        let threshold = if p == 1.0 { -d } else { d * (p - 1.0) };
        let gap = threshold - g;
        let mut values = Vec::new();
        for k in 0..steps {
            let gk = threshold - gap * 0.5f64.powi(k as i32 + 1);
            let wk = WeightSpec { form: WeightForm::Power { gamma: gk }, ..w.clone() };
            let v = class_constant(&wk, p, &sampler)?.unwrap_or(f64::INFINITY);
            sweep_table.push(vec![ei as f64, gk, v]);
            values.push(v);
        }
        let beyond = WeightSpec { form: WeightForm::Power { gamma: threshold }, ..w.clone() };
        let diverged = class_constant(&beyond, p, &sampler)?.is_none();
        let monotone = values.windows(2).all(|v| v[1] > v[0]) && values.iter().all(|v| v.is_finite());
        report.check_flag(format!("weights.{name}.sweep_monotone"), monotone);
        report.check(format!("weights.{name}.sweep_growth"), values[values.len() - 1] / values[0], Relation::AtLeast, blow_up);
        report.check_flag(format!("weights.{name}.out_of_class"), diverged);

        if p == 1.0 && g < 0.0 {
            let critical = d / -g;
            let b = reverse_holder_bracket(&w.reciprocal(), &sampler, 2.0 * critical + 1.0, cfg.sample("bisection")?)?;
            rh_table.push(vec![ei as f64, b.finite, b.divergent, critical]);
            report.check(format!("weights.{name}.reverse_holder_exponent"), b.finite, Relation::AtLeast, 1.0 + 1e-3);
            report.check_flag(
                format!("weights.{name}.reverse_holder_bracket"),
                b.divergent.is_finite() && b.finite <= critical && critical <= b.divergent,
            );
        }
    }
    report.tables.push(sweep_table);
    report.tables.push(rh_table);
    Ok(())
}
