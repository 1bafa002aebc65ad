//! Registered experiments, their statements and their default configurations.

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::experiments;
use crate::report::ExperimentReport;
use serde_json::Value;
use std::time::Instant;

pub type Runner = fn(&ExperimentConfig, &mut ExperimentReport) -> Result<()>;

pub struct Entry {
    pub id: &'static str,
    pub statements: &'static [&'static str],
    pub defaults: fn() -> Value,
    pub run: Runner,
}

pub const REGISTRY: &[Entry] = &[
    Entry {
        id: "classical",
        statements: &[
            "unique solvability of the full-space equation with contraction ‖u‖_p ≤ ‖f‖_p",
            "representation of ∂ᵢⱼu and ∂ₜu by truncated kernel integrals plus multiplication terms",
        ],
        defaults: experiments::classical::defaults,
        run: experiments::classical::run,
    },
    Entry {
        id: "weighted-sobolev",
        statements: &[
            "weighted parabolic Sobolev estimate ‖∂ᵢⱼu‖_{L^p(w)} + ‖∂ₜu‖_{L^p(w)} ≤ C‖f‖_{L^p(w)} for w ∈ A_p",
            "weak type (1,1) estimate λ·w({|∂ᵢⱼu| > λ}) ≤ C‖f‖_{L¹(w)} for w ∈ A₁",
        ],
        defaults: experiments::ratios::weighted_sobolev_defaults,
        run: experiments::ratios::weighted_sobolev,
    },
    Entry {
        id: "parabolic-bmo",
        statements: &["weighted BMO estimate ‖w·M^#(∂ᵢⱼu)‖_∞ ≤ C‖w f‖_∞ for w⁻¹ ∈ A₁"],
        defaults: experiments::ratios::parabolic_bmo_defaults,
        run: experiments::ratios::parabolic_bmo,
    },
    Entry {
        id: "mixed-sobolev",
        statements: &[
            "mixed-norm estimate ‖∂ᵢⱼu‖_{L^q(ν;L^p(ω))} ≤ C‖f‖_{L^q(ν;L^p(ω))} for ν ∈ A_q, ω ∈ A_p",
            "weak type estimate in time λ·ν({t : ‖∂ᵢⱼu(t)‖_{L^p(ω)} > λ}) ≤ C‖f‖_{L¹(ν;L^p(ω))} for ν ∈ A₁",
        ],
        defaults: experiments::ratios::mixed_sobolev_defaults,
        run: experiments::ratios::mixed_sobolev,
    },
    Entry {
        id: "mixed-bmo",
        statements: &["mixed BMO estimate ‖ν·M^#_{L^p(ω)}(∂ᵢⱼu)‖_∞ ≤ C‖ν‖f‖_{L^p(ω)}‖_∞"],
        defaults: experiments::ratios::mixed_bmo_defaults,
        run: experiments::ratios::mixed_bmo,
    },
    Entry {
        id: "mixed-holder",
        statements: &[
            "Hölder-valued estimate ‖∂ᵢⱼu‖_{L^q(ν;C^α)} ≤ C‖f‖_{L^q(ν;C^α)} for ν ∈ A_q",
            "weak type estimate λ·ν({t : [∂ᵢⱼu(t)]_α > λ}) ≤ C‖f‖_{L¹(ν;C^α)} for ν ∈ A₁",
            "boundedness ‖R_ij f‖ ≤ C‖f‖ in L^∞(C^α)",
        ],
        defaults: experiments::ratios::mixed_holder_defaults,
        run: experiments::ratios::mixed_holder,
    },
    Entry {
        id: "cauchy",
        statements: &[
            "solvability of the Cauchy problem with ‖v‖ ≤ ‖f‖ + ‖g‖",
            "representation of ∂ᵢⱼv and ∂ₜv for the Cauchy problem",
            "domination of the difference of the two truncations by a parabolic majorant and the maximal function",
        ],
        defaults: experiments::cauchy::defaults,
        run: experiments::cauchy::run,
    },
    Entry {
        id: "kernel-audit",
        statements: &[
            "Gaussian bounds, mass and adjoint equation of the fundamental solution",
            "semigroup property of the solution operators",
            "Calderón–Zygmund size and smoothness of ∂ᵢⱼp",
            "cancellation ∫∂ᵢⱼp dy = 0 and the trace identity J + aⁱʲI_ij = 1",
            "Muckenhoupt classes of power weights and reverse Hölder exponents",
        ],
        defaults: experiments::kernel_audit::defaults,
        run: experiments::kernel_audit::run,
    },
];

pub fn find(id: &str) -> Option<&'static Entry> {
    REGISTRY.iter().find(|e| e.id == id)
}

pub fn default_value(id: &str) -> Result<Value> {
    let entry = find(id).ok_or_else(|| HarnessError::Config(format!("unknown experiment `{id}`")))?;
    Ok((entry.defaults)())
}

/// Runs the registered experiment. Module errors end the run early and are
/// recorded in the report, which then fails.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let entry = find(&cfg.experiment).ok_or_else(|| HarnessError::Config(format!("unknown experiment `{}`", cfg.experiment)))?;
    let mut report = ExperimentReport::new(entry.id, entry.statements, cfg.to_value());
    let start = Instant::now();
    if let Err(e) = (entry.run)(cfg, &mut report) {
        if matches!(e, HarnessError::Config(_)) {
            return Err(e);
        }
        report.error = Some(e.to_string());
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}
