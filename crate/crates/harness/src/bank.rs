//! Derivative fields of a seeded family, computed once per coefficient field
//! and shared by the ratio experiments.

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::family::bump_family;
use parabolic_core::operators::{riesz_second, time_derivative_op, TruncationSpec};
use parabolic_core::{CoefficientField, FieldSpec, SampledField};

#[derive(Debug, Clone)]
pub struct Member {
    pub f: SampledField,
    /// `∂ᵢⱼu` for `i ≤ j` in row order.
    pub second: Vec<SampledField>,
    pub time: SampledField,
}

impl Member {
    /// `∂ᵢⱼu` followed by `∂ₜu`.
    pub fn derivatives(&self) -> impl Iterator<Item = &SampledField> {
        self.second.iter().chain(std::iter::once(&self.time))
    }
}

#[derive(Debug, Clone)]
pub struct FieldBank {
    pub spec: FieldSpec,
    pub field: CoefficientField,
    pub epsilon: f64,
    pub members: Vec<Member>,
}

#[derive(Debug, Clone)]
pub struct Bank {
    pub fields: Vec<FieldBank>,
}

/// Index pairs `i ≤ j`.
pub fn upper_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect()
}

impl Bank {
    /// One family per field with `ε = epsilon_multiples[0]·h` and `Ω`
    /// truncation.
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let multiple = *cfg
            .epsilon_multiples
            .first()
            .ok_or_else(|| HarnessError::Config("ratio experiments need one epsilon multiple".into()))?;
        let mut fields = Vec::new();
        for spec in &cfg.fields {
            let field = spec.build()?;
            let grid = cfg.grid.build(&field)?;
            let epsilon = multiple * grid.h_x();
            let trunc = TruncationSpec::omega(epsilon);
            let family = bump_family(&grid, &cfg.family, cfg.seed)?;
            let members = family
                .into_iter()
                .map(|f| {
                    let second = upper_pairs(field.dim())
                        .into_iter()
                        .map(|(i, j)| riesz_second(&field, &f, &trunc, i, j))
                        .collect::<parabolic_core::Result<Vec<_>>>()?;
                    let time = time_derivative_op(&field, &f, &trunc)?;
                    Ok(Member { f, second, time })
                })
                .collect::<Result<Vec<_>>>()?;
            fields.push(FieldBank { spec: spec.clone(), field, epsilon, members });
        }
        Ok(Self { fields })
    }
}
