//! The multiplication terms accompanying the principal-value integrals:
//!
//! ```text
//! I_ij(a)(t) = ∫_{|2a^{1/2}x| ≥ 1} π^{−n/2} e^{−|x|²} (a^{−1/2}x)_j (a^{1/2}x)_i / |a^{1/2}x|² dx
//! J(a)(t)    = ∫_{|2a^{1/2}x| ≤ 1} π^{−n/2} e^{−|x|²} dx
//! ```
//!
//! with `J + aⁱʲI_ij = 1`. After `y = a^{1/2}x` the regions are the exterior
//! and interior of the ball of radius ½ and the integrals become
//! radial–spherical products.

use crate::coeffs::CoefficientField;
use crate::error::{Error, Result};
use crate::linalg;
use crate::quadrature;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionQuad {
    /// Target absolute accuracy per entry.
    pub tolerance: f64,
    /// Largest number of angular nodes per angular variable.
    pub max_angular: usize,
    /// Radial truncation: `e^{−r²q(θ)}` is cut where `r²q(θ)` reaches this.
    pub decay_exponent: f64,
}

impl Default for CorrectionQuad {
    fn default() -> Self {
        Self { tolerance: 1e-11, max_angular: 4096, decay_exponent: 40.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionValue {
    pub t: f64,
    /// Index order `(a^{−1/2}x)_j (a^{1/2}x)_i`.
    pub i: DMatrix<f64>,
    /// Index order `(a^{−1/2}x)_i (a^{1/2}x)_j`.
    pub i_transposed_order: DMatrix<f64>,
    pub j: f64,
}

impl CorrectionValue {
    /// Largest entrywise difference between the two index orders.
    pub fn ordering_discrepancy(&self) -> f64 {
        linalg::max_abs_diff(&self.i, &self.i_transposed_order)
    }

    /// `|J + Σ aⁱʲ I_ij − 1|` for the given `a(t)`.
    pub fn trace_residual(&self, a: &DMatrix<f64>) -> f64 {
        let s: f64 = a.iter().zip(self.i.iter()).map(|(x, y)| x * y).sum();
        (self.j + s - 1.0).abs()
    }
}

pub(crate) struct Sphere {
    pub(crate) points: Vec<Vec<f64>>,
    pub(crate) weights: Vec<f64>,
}

/// Angular rule on the unit sphere `S^{n−1}` at refinement `m`.
pub(crate) fn sphere(n: usize, m: usize) -> Sphere {
    match n {
        1 => Sphere { points: vec![vec![-1.0], vec![1.0]], weights: vec![1.0, 1.0] },
        2 => {
            let w = 2.0 * PI / m as f64;
            Sphere {
                points: (0..m).map(|k| {
                    let a = w * k as f64;
                    vec![a.cos(), a.sin()]
                }).collect(),
                weights: vec![w; m],
            }
        }
        _ => {
            // Gauss–Legendre in cos φ times trapezoid in azimuth
            let gl = quadrature::gauss_legendre(m / 2 + 1);
            let az = m;
            let wa = 2.0 * PI / az as f64;
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for (&c, &wc) in gl.nodes.iter().zip(&gl.weights) {
                let s = (1.0 - c * c).sqrt();
                for k in 0..az {
                    let a = wa * k as f64;
                    points.push(vec![s * a.cos(), s * a.sin(), c]);
                    weights.push(wc * wa);
                }
            }
            Sphere { points, weights }
        }
    }
}

/// Integrals over the sphere refined by doubling until two levels agree.
fn converge<F>(n: usize, quad: &CorrectionQuad, len: usize, mut eval: F) -> Result<Vec<f64>>
where
    F: FnMut(&Sphere) -> Result<Vec<f64>>,
{
    if n == 1 {
        return eval(&sphere(1, 2));
    }
    let mut m = 16;
    let mut prev = eval(&sphere(n, m))?;
    loop {
        m *= 2;
        if m > quad.max_angular {
            return Err(Error::QuadratureFailure(format!(
                "angular rule did not converge within {} nodes",
                quad.max_angular
            )));
        }
        let next = eval(&sphere(n, m))?;
        debug_assert_eq!(next.len(), len);
        let diff = prev.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff <= 0.1 * quad.tolerance {
            return Ok(next);
        }
        prev = next;
    }
}

/// `∫_{lo}^{hi} r^{n−1} e^{−r²q} dr`.
fn radial(n: usize, q: f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    quadrature::adaptive(|r| r.powi(n as i32 - 1) * (-r * r * q).exp(), lo, hi, tol)
}

fn prefactor(a: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    let n = a.nrows();
    let l = linalg::cholesky(a)?;
    let det: f64 = (0..n).map(|i| l[(i, i)] * l[(i, i)]).product();
    let a_inv = linalg::inverse_from_cholesky(&l);
    Ok((det.powf(-0.5) * PI.powf(-0.5 * n as f64), a_inv))
}

/// `I(a)` and `J(a)` for a fixed SPD matrix.
pub fn corrections_for_matrix(a: &DMatrix<f64>, quad: &CorrectionQuad) -> Result<(DMatrix<f64>, DMatrix<f64>, f64)> {
    let n = a.nrows();
    let (c, a_inv) = prefactor(a)?;
    let radial_tol = 1e-3 * quad.tolerance;
    let values = converge(n, quad, n * n + 1, |s| {
        let mut acc = vec![0.0; n * n + 1];
        for (theta, &w) in s.points.iter().zip(&s.weights) {
            let q = linalg::quad_form(&a_inv, theta);
            let outer = (quad.decay_exponent / q).sqrt();
            let ext = radial(n, q, 0.5, outer.max(0.5), radial_tol)?;
            let int = radial(n, q, 0.0, 0.5, radial_tol)?;
            let ai = linalg::mat_vec(&a_inv, theta);
            for i in 0..n {
                for j in 0..n {
                    acc[i * n + j] += w * theta[i] * ai[j] * ext;
                }
            }
            acc[n * n] += w * int;
        }
        Ok(acc)
    })?;
    let i_eq = DMatrix::from_fn(n, n, |i, j| c * values[i * n + j]);
    let i_tr = i_eq.transpose();
    Ok((i_eq, i_tr, c * values[n * n]))
}

pub fn corrections(field: &CoefficientField, t: f64, quad: &CorrectionQuad) -> Result<CorrectionValue> {
    let (i, i_transposed_order, j) = corrections_for_matrix(&field.eval(t), quad)?;
    Ok(CorrectionValue { t, i, i_transposed_order, j })
}

pub fn correction_i(field: &CoefficientField, t: f64, quad: &CorrectionQuad) -> Result<DMatrix<f64>> {
    Ok(corrections(field, t, quad)?.i)
}

pub fn correction_j(field: &CoefficientField, t: f64, quad: &CorrectionQuad) -> Result<f64> {
    Ok(corrections(field, t, quad)?.j)
}

pub fn trace_identity_residual(field: &CoefficientField, t: f64) -> Result<f64> {
    let v = corrections(field, t, &CorrectionQuad::default())?;
    Ok(v.trace_residual(&field.eval(t)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitRow {
    pub epsilon: f64,
    /// Row-major entries of the pre-limit surface integral.
    pub pre_limit: Vec<f64>,
    pub error: f64,
}

/// The pre-limit surface integral
///
/// ```text
/// Iᵉ_ij = ½ ∫₀¹ e^{−ε²τ} (4π)^{−n/2} det(M)^{1/2} ∮ exp(−¼⟨Mθ,θ⟩) (Mθ)_i θ_j dθ dτ,
/// M = ε² B_{t,ε²τ},
/// ```
///
/// and its distance to `I_ij` for each `ε`.
pub fn limit_consistency(field: &CoefficientField, t: f64, epsilons: &[f64]) -> Result<Vec<LimitRow>> {
    if epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("epsilons must be positive".into()));
    }
    if epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("epsilons must be decreasing".into()));
    }
    let quad = CorrectionQuad::default();
    let n = field.dim();
    let limit = correction_i(field, t, &quad)?;
    let mut rows = Vec::new();
    for &eps in epsilons {
        let entries = converge(n, &CorrectionQuad { tolerance: 1e-9, ..quad }, n * n, |s| {
            quadrature::adaptive_vec(
                |tau, out| {
                    out.iter_mut().for_each(|o| *o = 0.0);
                    if tau <= 0.0 {
                        return;
                    }
                    let pair = field.averaged(t, eps * eps * tau).expect("positive duration");
                    let m = &pair.b * (eps * eps);
                    let det_m = pair.det_b * eps.powi(2 * n as i32);
                    let c = 0.5 * (-eps * eps * tau).exp() * (4.0 * PI).powf(-0.5 * n as f64) * det_m.sqrt();
                    for (theta, &w) in s.points.iter().zip(&s.weights) {
                        let mt = linalg::mat_vec(&m, theta);
                        let g: f64 = mt.iter().zip(theta).map(|(a, b)| a * b).sum();
                        let e = (-0.25 * g).exp();
                        for i in 0..n {
                            for j in 0..n {
                                out[i * n + j] += c * w * e * mt[i] * theta[j];
                            }
                        }
                    }
                },
                n * n,
                0.0,
                1.0,
                1e-12,
            )
        })?;
        let error = entries.iter().zip(limit.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        rows.push(LimitRow { epsilon: eps, pre_limit: entries, error });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ERF_HALF: f64 = 0.520_499_877_813_046_5;

    #[test]
    fn one_dimensional_identity() {
        let v = corrections(&CoefficientField::identity(1), 0.7, &CorrectionQuad::default()).unwrap();
        assert!((v.j - ERF_HALF).abs() < 1e-10);
        assert!((v.i[(0, 0)] - (1.0 - ERF_HALF)).abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_identity() {
        let v = corrections(&CoefficientField::identity(2), 0.0, &CorrectionQuad::default()).unwrap();
        assert!((v.j - (1.0 - (-0.25f64).exp())).abs() < 1e-10);
        assert!(v.i[(0, 1)].abs() < 1e-10);
        assert!((v.i[(0, 0)] - v.i[(1, 1)]).abs() < 1e-10);
    }

    #[test]
    fn anisotropic_trace_identity() {
        let f = CoefficientField::sine_2d();
        for t in [0.0, 0.9, 2.2] {
            assert!(trace_identity_residual(&f, t).unwrap() < 2e-8);
        }
        let v = corrections(&f, 0.9, &CorrectionQuad::default()).unwrap();
        assert!(v.ordering_discrepancy() < 1e-9);
    }

    #[test]
    fn three_dimensional_trace_identity() {
        let f = CoefficientField::random_piecewise(3, 0.5, 5, 1.0, 4.0).unwrap();
        assert!(trace_identity_residual(&f, 0.3).unwrap() < 2e-8);
    }

    #[test]
    fn pre_limit_converges_for_identity() {
        let rows = limit_consistency(&CoefficientField::identity(1), 0.0, &[0.5, 0.25, 0.125]).unwrap();
        assert!(rows.windows(2).all(|w| w[1].error < w[0].error));
        // e^{−ε²τ} expansion: error ≈ ε²·(mean τ under the limit density)
        assert!(rows[2].error < 0.02 * 0.125f64.powi(2) * 50.0);
    }

    #[test]
    fn epsilons_must_decrease() {
        assert!(limit_consistency(&CoefficientField::identity(1), 0.0, &[0.1, 0.2]).is_err());
    }
}
