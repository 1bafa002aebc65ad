//! Time-dependent coefficient matrices `a(t)` and their averages
//! `A_{t,τ} = ∫_{t−τ}^t a(r) dr`, `B_{t,τ} = A_{t,τ}⁻¹`.

use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

/// Absolute tolerance for quadrature of smooth fields.
pub const SMOOTH_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Constant,
    SmoothPeriodic,
    PiecewiseConstant,
    RandomPiecewise,
}

#[derive(Debug, Clone)]
enum Law {
    Constant(DMatrix<f64>),
    Smooth {
        base: DMatrix<f64>,
        modulation: DMatrix<f64>,
        frequency: f64,
        phase: f64,
    },
    Piecewise {
        // matrices[k] holds on [breakpoints[k-1], breakpoints[k])
        breakpoints: Vec<f64>,
        matrices: Vec<DMatrix<f64>>,
    },
}

/// The map `t ↦ a(t)`.
#[derive(Debug, Clone)]
pub struct CoefficientField {
    dim: usize,
    lambda: f64,
    kind: FieldKind,
    law: Law,
}

/// `A_{t,τ}` with everything the kernel needs from it.
#[derive(Debug, Clone)]
pub struct AveragedPair {
    pub t: f64,
    pub tau: f64,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub det_b: f64,
    pub chol_b: DMatrix<f64>,
    /// Lower Cholesky factor of `A`; `⟨Bx,x⟩ = |L_A⁻¹x|²`.
    pub chol_a: DMatrix<f64>,
}

impl AveragedPair {
    /// `⟨B x, x⟩` through a triangular solve with the factor of `A`.
    pub fn b_quad(&self, x: &[f64]) -> f64 {
        linalg::lower_solve(&self.chol_a, x).iter().map(|v| v * v).sum()
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }
}

impl CoefficientField {
    pub fn identity(dim: usize) -> Self {
        Self::constant(DMatrix::identity(dim, dim), 1.0).expect("identity is elliptic")
    }

    pub fn constant(matrix: DMatrix<f64>, lambda: f64) -> Result<Self> {
        let field = Self {
            dim: matrix.nrows(),
            lambda,
            kind: FieldKind::Constant,
            law: Law::Constant(matrix),
        };
        field.validate()?;
        Ok(field)
    }

    /// `a(t) = base + sin(frequency·t + phase)·modulation`.
    pub fn smooth_periodic(
        base: DMatrix<f64>,
        modulation: DMatrix<f64>,
        frequency: f64,
        phase: f64,
        lambda: f64,
    ) -> Result<Self> {
        if frequency <= 0.0 {
            return Err(Error::InvalidField("frequency must be positive".into()));
        }
        let field = Self {
            dim: base.nrows(),
            lambda,
            kind: FieldKind::SmoothPeriodic,
            law: Law::Smooth { base, modulation, frequency, phase },
        };
        field.validate()?;
        Ok(field)
    }

    /// `a(t) = 1 + ½ sin t` in one dimension, `Λ = ½`.
    pub fn sine_1d() -> Self {
        Self::smooth_periodic(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 0.5),
            1.0,
            0.0,
            0.5,
        )
        .expect("catalogue field")
    }

    /// A rotating anisotropic field in two dimensions, `Λ = 0.4`.
    pub fn sine_2d() -> Self {
        Self::smooth_periodic(
            DMatrix::identity(2, 2),
            DMatrix::from_row_slice(2, 2, &[0.5, 0.2, 0.2, -0.3]),
            1.0,
            0.3,
            0.4,
        )
        .expect("catalogue field")
    }

    /// `matrices[0]` before the first breakpoint, `matrices[k]` from
    /// `breakpoints[k-1]` on.
    pub fn piecewise(breakpoints: Vec<f64>, matrices: Vec<DMatrix<f64>>, lambda: f64) -> Result<Self> {
        if matrices.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidField(format!(
                "{} breakpoints need {} matrices, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                matrices.len()
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidField("breakpoints must be strictly increasing".into()));
        }
        let field = Self {
            dim: matrices[0].nrows(),
            lambda,
            kind: FieldKind::PiecewiseConstant,
            law: Law::Piecewise { breakpoints, matrices },
        };
        field.validate()?;
        Ok(field)
    }

    /// `2I` for `t < 0`, `I/2` for `t ≥ 0`, `Λ = ½`.
    pub fn two_level(dim: usize) -> Self {
        let id = DMatrix::<f64>::identity(dim, dim);
        Self::piecewise(vec![0.0], vec![&id * 2.0, &id * 0.5], 0.5).expect("catalogue field")
    }

    /// Seeded random field: breakpoints with exponential gaps of mean
    /// `1/density` on `[-horizon, horizon]`, each piece `Q diag(λ) Qᵀ` with
    /// `Q` a random rotation and `λ` uniform in `[Λ, 1/Λ]`.
    pub fn random_piecewise(dim: usize, lambda: f64, seed: u64, density: f64, horizon: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidField(format!("lambda {lambda} outside (0, 1]")));
        }
        if density <= 0.0 || horizon <= 0.0 {
            return Err(Error::InvalidField("density and horizon must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gaps = Exp::new(density).map_err(|e| Error::InvalidField(e.to_string()))?;
        let mut breakpoints = Vec::new();
        let mut t = -horizon + gaps.sample(&mut rng);
        while t < horizon {
            breakpoints.push(t);
            t += gaps.sample(&mut rng);
        }
        let matrices = (0..=breakpoints.len())
            .map(|_| random_spd(dim, lambda, &mut rng))
            .collect();
        let mut field = Self::piecewise(breakpoints, matrices, lambda)?;
        field.kind = FieldKind::RandomPiecewise;
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    /// Breakpoints of a piecewise field, empty otherwise.
    pub fn breakpoints(&self) -> &[f64] {
        match &self.law {
            Law::Piecewise { breakpoints, .. } => breakpoints,
            _ => &[],
        }
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        match &self.law {
            Law::Constant(m) => m.clone(),
            Law::Smooth { base, modulation, frequency, phase } => {
                base + modulation * (frequency * t + phase).sin()
            }
            Law::Piecewise { breakpoints, matrices } => {
                let k = breakpoints.partition_point(|&b| b <= t);
                matrices[k].clone()
            }
        }
    }

    /// `∫_{lo}^{hi} a(r) dr`.
    pub fn integral(&self, lo: f64, hi: f64) -> Result<DMatrix<f64>> {
        let n = self.dim;
        match &self.law {
            Law::Constant(m) => Ok(m * (hi - lo)),
            Law::Smooth { base, modulation, frequency, phase } => {
                let entries = quadrature::adaptive_vec(
                    |r, out| {
                        let s = (frequency * r + phase).sin();
                        for i in 0..n {
                            for j in 0..n {
                                out[i * n + j] = base[(i, j)] + s * modulation[(i, j)];
                            }
                        }
                    },
                    n * n,
                    lo,
                    hi,
                    SMOOTH_TOLERANCE,
                )?;
                Ok(DMatrix::from_row_slice(n, n, &entries))
            }
            Law::Piecewise { breakpoints, matrices } => {
                let mut acc = DMatrix::zeros(n, n);
                let mut k = breakpoints.partition_point(|&b| b <= lo);
                let mut start = lo;
                while start < hi {
                    let end = breakpoints.get(k).map_or(hi, |&b| b.min(hi));
                    acc += &matrices[k] * (end - start);
                    start = end;
                    k += 1;
                }
                Ok(acc)
            }
        }
    }

    /// `A_{t,τ}`, its inverse and Cholesky factors.
    pub fn averaged(&self, t: f64, tau: f64) -> Result<AveragedPair> {
        if !(tau > 0.0) {
            return Err(Error::NonPositiveTau(tau));
        }
        let a = linalg::symmetrize(&self.integral(t - tau, t)?);
        let chol_a = linalg::cholesky(&a)?;
        let b = linalg::inverse_from_cholesky(&chol_a);
        let det_a: f64 = (0..self.dim).map(|i| chol_a[(i, i)] * chol_a[(i, i)]).product();
        let chol_b = linalg::cholesky(&b)?;
        Ok(AveragedPair { t, tau, a, b, det_b: 1.0 / det_a, chol_b, chol_a })
    }

    /// Max-entry error of `A(t,τ₁+τ₂) − A(t−τ₁,τ₂) − A(t,τ₁)`.
    pub fn additivity_residual(&self, t: f64, tau1: f64, tau2: f64) -> Result<f64> {
        for tau in [tau1, tau2] {
            if !(tau > 0.0) {
                return Err(Error::NonPositiveTau(tau));
            }
        }
        let whole = self.averaged(t, tau1 + tau2)?.a;
        let early = self.averaged(t - tau1, tau2)?.a;
        let late = self.averaged(t, tau1)?.a;
        Ok(linalg::max_abs_diff(&whole, &(early + late)))
    }

    /// Worst ellipticity margin over random `(t, ξ)` samples: the minimum of
    /// `R − Λ` and `Λ⁻¹ − R` for Rayleigh quotients `R`. Negative means violated.
    pub fn ellipticity_margin(&self, samples: usize, t_range: (f64, f64), seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let t = rng.random_range(t_range.0..t_range.1);
            let xi: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm2: f64 = xi.iter().map(|v| v * v).sum();
            let r = linalg::quad_form(&self.eval(t), &xi) / norm2;
            worst = worst.min(r - self.lambda).min(1.0 / self.lambda - r);
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidField("dimension must be positive".into()));
        }
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(Error::InvalidField(format!("lambda {} outside (0, 1]", self.lambda)));
        }
        let check = |m: &DMatrix<f64>| -> Result<()> {
            if m.nrows() != self.dim || m.ncols() != self.dim {
                return Err(Error::DimensionMismatch { expected: self.dim, found: m.nrows() });
            }
            if !linalg::is_symmetric(m) {
                return Err(Error::InvalidField(format!("matrix not symmetric: {m}")));
            }
            let (lo, hi) = linalg::spectrum_bounds(m);
            let slack = 1e-12;
            if lo < self.lambda - slack || hi > 1.0 / self.lambda + slack {
                return Err(Error::InvalidField(format!(
                    "spectrum [{lo}, {hi}] not inside [{}, {}]",
                    self.lambda,
                    1.0 / self.lambda
                )));
            }
            Ok(())
        };
        match &self.law {
            Law::Constant(m) => check(m),
            Law::Smooth { base, modulation, frequency, phase } => {
                if !linalg::is_symmetric(modulation) {
                    return Err(Error::InvalidField("modulation not symmetric".into()));
                }
                let period = std::f64::consts::TAU / frequency;
                (0..256).try_for_each(|k| {
                    let t = (k as f64 / 256.0) * period - phase / frequency;
                    check(&(base + modulation * (frequency * t + phase).sin()))
                })?;
                for s in [-1.0, 1.0] {
                    check(&(base + modulation * s))?;
                }
                Ok(())
            }
            Law::Piecewise { matrices, .. } => matrices.iter().try_for_each(check),
        }
    }
}

fn random_spd(dim: usize, lambda: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
    let q = g.qr().q();
    let spectrum: Vec<f64> = (0..dim).map(|_| rng.random_range(lambda..=1.0 / lambda)).collect();
    let m = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(spectrum)) * q.transpose();
    linalg::symmetrize(&m)
}

pub fn eval_coeff(field: &CoefficientField, t: f64) -> DMatrix<f64> {
    field.eval(t)
}

pub fn averaged_matrix(field: &CoefficientField, t: f64, tau: f64) -> Result<AveragedPair> {
    field.averaged(t, tau)
}

pub fn additivity_residual(field: &CoefficientField, t: f64, tau1: f64, tau2: f64) -> Result<f64> {
    field.additivity_residual(t, tau1, tau2)
}

/// A `(t, row-major entries)` record of a breakpoint table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointRecord {
    pub t: f64,
    pub entries: Vec<f64>,
}

/// Configuration form of a coefficient field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    Identity {
        dim: usize,
    },
    Constant {
        dim: usize,
        entries: Vec<f64>,
        lambda: f64,
    },
    SmoothPeriodic {
        dim: usize,
        base: Vec<f64>,
        modulation: Vec<f64>,
        #[serde(default = "one")]
        frequency: f64,
        #[serde(default)]
        phase: f64,
        lambda: f64,
    },
    PiecewiseConstant {
        dim: usize,
        lambda: f64,
        /// Entries in force before the first record.
        initial: Vec<f64>,
        breakpoints: Vec<BreakpointRecord>,
    },
    RandomPiecewise {
        dim: usize,
        lambda: f64,
        seed: u64,
        #[serde(default = "one")]
        density: f64,
        #[serde(default = "default_horizon")]
        horizon: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn default_horizon() -> f64 {
    16.0
}

fn square(dim: usize, entries: &[f64]) -> Result<DMatrix<f64>> {
    if entries.len() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
    }
    Ok(DMatrix::from_row_slice(dim, dim, entries))
}

impl FieldSpec {
    pub fn build(&self) -> Result<CoefficientField> {
        match self {
            FieldSpec::Identity { dim } => Ok(CoefficientField::identity(*dim)),
            FieldSpec::Constant { dim, entries, lambda } => {
                CoefficientField::constant(square(*dim, entries)?, *lambda)
            }
            FieldSpec::SmoothPeriodic { dim, base, modulation, frequency, phase, lambda } => {
                CoefficientField::smooth_periodic(
                    square(*dim, base)?,
                    square(*dim, modulation)?,
                    *frequency,
                    *phase,
                    *lambda,
                )
            }
            FieldSpec::PiecewiseConstant { dim, lambda, initial, breakpoints } => {
                let mut matrices = vec![square(*dim, initial)?];
                for r in breakpoints {
                    matrices.push(square(*dim, &r.entries)?);
                }
                CoefficientField::piecewise(breakpoints.iter().map(|r| r.t).collect(), matrices, *lambda)
            }
            FieldSpec::RandomPiecewise { dim, lambda, seed, density, horizon } => {
                CoefficientField::random_piecewise(*dim, *lambda, *seed, *density, *horizon)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            FieldSpec::Identity { dim }
            | FieldSpec::Constant { dim, .. }
            | FieldSpec::SmoothPeriodic { dim, .. }
            | FieldSpec::PiecewiseConstant { dim, .. }
            | FieldSpec::RandomPiecewise { dim, .. } => *dim,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn catalogue_values() {
        assert_eq!(CoefficientField::identity(2).eval(3.7), DMatrix::identity(2, 2));
        assert_eq!(CoefficientField::two_level(1).eval(-1.0)[(0, 0)], 2.0);
        assert_eq!(CoefficientField::two_level(1).eval(0.0)[(0, 0)], 0.5);
        assert!((CoefficientField::sine_1d().eval(PI / 2.0)[(0, 0)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn identity_average() {
        let p = CoefficientField::identity(3).averaged(5.0, 2.0).unwrap();
        assert!(linalg::max_abs_diff(&p.a, &(DMatrix::identity(3, 3) * 2.0)) < 1e-15);
        assert!(linalg::max_abs_diff(&p.b, &(DMatrix::identity(3, 3) * 0.5)) < 1e-15);
        assert!((p.det_b - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sine_average_matches_closed_form() {
        let p = CoefficientField::sine_1d().averaged(PI, PI).unwrap();
        assert!((p.a[(0, 0)] - (PI + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn two_level_average_is_exact() {
        let p = CoefficientField::two_level(1).averaged(1.0, 2.0).unwrap();
        assert_eq!(p.a[(0, 0)], 2.5);
        assert_eq!(CoefficientField::two_level(1).additivity_residual(1.0, 0.5, 1.5).unwrap(), 0.0);
    }

    #[test]
    fn non_positive_tau_is_rejected() {
        let f = CoefficientField::identity(1);
        assert!(matches!(f.averaged(0.0, 0.0), Err(Error::NonPositiveTau(_))));
        assert!(matches!(f.averaged(0.0, -1.0), Err(Error::NonPositiveTau(_))));
    }

    #[test]
    fn invalid_fields_are_rejected() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.1, 1.0]);
        assert!(CoefficientField::constant(bad, 0.5).is_err());
        let stiff = DMatrix::from_element(1, 1, 5.0);
        assert!(CoefficientField::constant(stiff, 0.5).is_err());
        assert!(CoefficientField::piecewise(vec![1.0, 0.0], vec![DMatrix::identity(1, 1); 3], 1.0).is_err());
    }

    #[test]
    fn random_field_is_reproducible_and_elliptic() {
        let f = CoefficientField::random_piecewise(2, 0.25, 42, 1.0, 10.0).unwrap();
        let g = CoefficientField::random_piecewise(2, 0.25, 42, 1.0, 10.0).unwrap();
        assert_eq!(f.breakpoints(), g.breakpoints());
        assert_eq!(f.eval(0.3), g.eval(0.3));
        assert!(!f.breakpoints().is_empty());
        assert!(f.ellipticity_margin(2000, (-12.0, 12.0), 1) >= -1e-12);
    }

    #[test]
    fn spec_roundtrip() {
        let spec = FieldSpec::PiecewiseConstant {
            dim: 1,
            lambda: 0.5,
            initial: vec![2.0],
            breakpoints: vec![BreakpointRecord { t: 0.0, entries: vec![0.5] }],
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: FieldSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let f = back.build().unwrap();
        assert_eq!(f.averaged(1.0, 2.0).unwrap().a[(0, 0)], 2.5);
    }
}
