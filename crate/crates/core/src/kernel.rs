//! The kernel
//!
//! ```text
//! p(t,τ,x) = χ_{τ>0} e^{−τ} (4π)^{−n/2} (det B_{t,τ})^{1/2} exp(−¼⟨B_{t,τ}x, x⟩)
//! ```
//!
//! its closed-form derivatives, Fourier symbol, mass, Gaussian bounds and the
//! semigroup identity `T_{τ₁}T_{τ₂} = T_{τ₁+τ₂}` for
//! `T_τ f(t,x) = ∫ p(t,τ,y) f(t−τ, x−y) dy`.

use crate::coeffs::{AveragedPair, CoefficientField};
use crate::error::{Error, Result};
use crate::grid::{Lattice, SampledField};
use crate::linalg;
use crate::quadrature;
use crate::spectral::Spectral;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Below this `τ` the kernel is treated as a point mass.
pub const TAU_CUTOFF: f64 = 1e-12;

/// Gauss–Hermite nodes per axis for mass integrals.
pub const HERMITE_ORDER: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub t: f64,
    pub tau: f64,
    pub x: Vec<f64>,
}

impl KernelPoint {
    pub fn new(t: f64, tau: f64, x: &[f64]) -> Self {
        Self { t, tau, x: x.to_vec() }
    }
}

/// Totally symmetric 3-tensor stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Third {
    n: usize,
    data: Vec<f64>,
}

impl Third {
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `∂ₜ∂ᵢⱼp` and `∂_τ∂ᵢⱼp`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedJet {
    pub dt_hess: DMatrix<f64>,
    pub dtau_hess: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelJet {
    pub p: f64,
    pub grad: Vec<f64>,
    pub hess: DMatrix<f64>,
    pub third: Option<Third>,
    pub dt: f64,
    pub dtau: f64,
    pub mixed: Option<MixedJet>,
}

impl KernelJet {
    fn zero(n: usize, third: bool, mixed: bool) -> Self {
        Self {
            p: 0.0,
            grad: vec![0.0; n],
            hess: DMatrix::zeros(n, n),
            third: third.then(|| Third { n, data: vec![0.0; n * n * n] }),
            dt: 0.0,
            dtau: 0.0,
            mixed: mixed.then(|| MixedJet { dt_hess: DMatrix::zeros(n, n), dtau_hess: DMatrix::zeros(n, n) }),
        }
    }
}

/// Kernel value from a precomputed average.
pub fn density(pair: &AveragedPair, x: &[f64]) -> f64 {
    let n = pair.dim() as i32;
    if pair.tau < TAU_CUTOFF && x.iter().any(|&v| v != 0.0) {
        return 0.0;
    }
    (-pair.tau).exp() * (4.0 * PI).powf(-0.5 * n as f64) * pair.det_b.sqrt() * (-0.25 * pair.b_quad(x)).exp()
}

pub fn kernel_eval(field: &CoefficientField, point: &KernelPoint) -> Result<f64> {
    check_dim(field, &point.x)?;
    if !(point.tau > 0.0) {
        return Ok(0.0);
    }
    if point.tau < TAU_CUTOFF && point.x.iter().any(|&v| v != 0.0) {
        return Ok(0.0);
    }
    Ok(density(&field.averaged(point.t, point.tau)?, &point.x))
}

pub fn kernel_jet(field: &CoefficientField, point: &KernelPoint, want_third: bool) -> Result<KernelJet> {
    jet(field, point, want_third, false)
}

/// Jet including third derivatives and `∂ₜ∂ᵢⱼp`, `∂_τ∂ᵢⱼp`.
pub fn kernel_jet_full(field: &CoefficientField, point: &KernelPoint) -> Result<KernelJet> {
    jet(field, point, true, true)
}

fn jet(field: &CoefficientField, point: &KernelPoint, want_third: bool, want_mixed: bool) -> Result<KernelJet> {
    check_dim(field, &point.x)?;
    let n = field.dim();
    if point.tau == 0.0 {
        return Err(Error::ZeroTau);
    }
    if point.tau < 0.0 {
        return Ok(KernelJet::zero(n, want_third, want_mixed));
    }
    let pair = field.averaged(point.t, point.tau)?;
    let a_now = field.eval(point.t);
    let a_lag = field.eval(point.t - point.tau);
    Ok(jet_from_pair(&pair, &a_now, &a_lag, &point.x, want_third, want_mixed))
}

/// Jet at `x` given `A_{t,τ}`, `a(t)` and `a(t−τ)`.
pub fn jet_from_pair(
    pair: &AveragedPair,
    a_now: &DMatrix<f64>,
    a_lag: &DMatrix<f64>,
    x: &[f64],
    want_third: bool,
    want_mixed: bool,
) -> KernelJet {
    let n = x.len();
    let p = density(pair, x);
    let b = &pair.b;
    let v = linalg::mat_vec(b, x);
    let grad: Vec<f64> = v.iter().map(|vi| -0.5 * p * vi).collect();
    let h_unit = DMatrix::from_fn(n, n, |i, j| 0.5 * (-b[(i, j)] + 0.5 * v[i] * v[j]));
    let hess = &h_unit * p;
    let a_t = a_now - a_lag;
    let rate = |m: &DMatrix<f64>| -> f64 {
        -0.5 * (m * b).trace() + 0.25 * linalg::quad_form(m, &v)
    };
    let rate_t = rate(&a_t);
    let rate_tau = rate(a_lag) - 1.0;
    let third = want_third.then(|| {
        let mut data = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data[(i * n + j) * n + k] = 0.25
                        * p
                        * (b[(i, j)] * v[k] + b[(j, k)] * v[i] + b[(k, i)] * v[j] - 0.5 * v[i] * v[j] * v[k]);
                }
            }
        }
        Third { n, data }
    });
    let mixed = want_mixed.then(|| {
        // ∂ₛB = −B Aₛ B, ∂ₛ(Bx) = (∂ₛB)x
        let dh = |a_s: &DMatrix<f64>, r: f64| -> DMatrix<f64> {
            let db = -(b * a_s * b);
            let dv = linalg::mat_vec(&db, x);
            let dunit = DMatrix::from_fn(n, n, |i, j| 0.5 * (-db[(i, j)] + 0.5 * (dv[i] * v[j] + v[i] * dv[j])));
            (&h_unit * r + dunit) * p
        };
        MixedJet { dt_hess: dh(&a_t, rate_t), dtau_hess: dh(a_lag, rate_tau) }
    });
    KernelJet { p, grad, hess, third, dt: p * rate_t, dtau: p * rate_tau, mixed }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FourierConvention {
    /// `∫ f(x) e^{−ix·ξ} dx`
    Nonunitary,
    /// `(2π)^{−n/2} ∫ f(x) e^{−ix·ξ} dx`
    Unitary,
}

pub fn kernel_fourier(
    field: &CoefficientField,
    t: f64,
    tau: f64,
    xi: &[f64],
    convention: FourierConvention,
) -> Result<f64> {
    check_dim(field, xi)?;
    if !(tau > 0.0) {
        return Ok(0.0);
    }
    let pair = field.averaged(t, tau)?;
    let base = (-tau).exp() * (-linalg::quad_form(&pair.a, xi)).exp();
    Ok(match convention {
        FourierConvention::Nonunitary => base,
        FourierConvention::Unitary => base * (2.0 * PI).powf(-0.5 * xi.len() as f64),
    })
}

/// One candidate normalization of the symbol and whether it agrees with the
/// transform of the computed kernel at `ξ = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SymbolCandidate {
    pub label: String,
    pub prefactor: f64,
    pub symbol_at_zero: f64,
    pub transform_at_zero: f64,
    pub consistent: bool,
}

/// Compares symbol normalizations `c·e^{−τ}exp(−⟨Aξ,ξ⟩)` with the kernel's
/// transform at `ξ = 0` under the non-unitary convention (the mass).
pub fn symbol_normalization_audit(field: &CoefficientField, t: f64, tau: f64) -> Result<Vec<SymbolCandidate>> {
    let n = field.dim() as f64;
    let mass = kernel_mass(field, t, tau, HERMITE_ORDER)?;
    let candidates = [
        ("nonunitary", 1.0),
        ("unitary", (2.0 * PI).powf(-0.5 * n)),
        ("displayed-4pi", (4.0 * PI).powf(-0.5 * n)),
    ];
    Ok(candidates
        .iter()
        .map(|&(label, c)| {
            let symbol_at_zero = c * (-tau).exp();
            // under the unitary convention the transform at 0 is (2π)^{−n/2}·mass
            let transform_at_zero = if label == "unitary" { c * mass } else { mass };
            SymbolCandidate {
                label: label.into(),
                prefactor: c,
                symbol_at_zero,
                transform_at_zero,
                consistent: (symbol_at_zero - transform_at_zero).abs() <= 1e-10,
            }
        })
        .collect())
}

/// `∫ p(t,τ,x) dx` by Gauss–Hermite after `x = 2 L_A z`.
pub fn kernel_mass(field: &CoefficientField, t: f64, tau: f64, order: usize) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    let pair = field.averaged(t, tau)?;
    hermite_integral(&pair, order, |x| density(&pair, x))
}

/// `∫ g(x) dx` for `g` carrying the Gaussian factor of `p(t,τ,·)`.
pub(crate) fn hermite_integral<F: FnMut(&[f64]) -> f64>(pair: &AveragedPair, order: usize, mut g: F) -> Result<f64> {
    let n = pair.dim();
    if n > 3 {
        return Err(Error::InvalidArgument(format!("tensor Gauss–Hermite limited to n ≤ 3, got {n}")));
    }
    let rule = quadrature::gauss_hermite(order);
    let l = &pair.chol_a;
    let jac: f64 = 2f64.powi(n as i32) * (0..n).map(|i| l[(i, i)]).product::<f64>();
    let mut idx = vec![0usize; n];
    let mut z = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        let mut r2 = 0.0;
        for d in 0..n {
            z[d] = rule.nodes[idx[d]];
            w *= rule.weights[idx[d]];
            r2 += z[d] * z[d];
        }
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = 2.0 * (0..=i).map(|k| l[(i, k)] * z[k]).sum::<f64>();
        }
        total += w * r2.exp() * g(&x);
        let mut d = 0;
        loop {
            if d == n {
                return Ok(total * jac);
            }
            idx[d] += 1;
            if idx[d] < order {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

/// `∂_τp + ∂ₜp − aⁱʲ(t)∂ᵢⱼp + p`.
pub fn adjoint_pde_residual(field: &CoefficientField, point: &KernelPoint) -> Result<f64> {
    if !(point.tau > 0.0) {
        return Err(if point.tau == 0.0 { Error::ZeroTau } else { Error::NonPositiveTau(point.tau) });
    }
    let j = kernel_jet(field, point, false)?;
    let a = field.eval(point.t);
    let trace: f64 = a.iter().zip(j.hess.iter()).map(|(x, y)| x * y).sum();
    Ok(j.dtau + j.dt - trace + j.p)
}

/// `|T_{τ₁}(T_{τ₂}f)(t,x) − T_{τ₁+τ₂}f(t,x)|` with the spatial convolutions
/// done as linear convolutions against sampled kernels. `x` must be a node.
pub fn semigroup_residual(
    field: &CoefficientField,
    f: &SampledField,
    t: f64,
    x: &[f64],
    tau1: f64,
    tau2: f64,
) -> Result<f64> {
    let lattice = &f.grid.space;
    check_dim(field, x)?;
    let node = lattice
        .nearest_node(x)
        .filter(|&k| {
            let c = lattice.coords(k);
            c.iter().zip(x).all(|(a, b)| (a - b).abs() <= 1e-9 * lattice.min_step())
        })
        .ok_or_else(|| Error::InvalidArgument(format!("{x:?} is not a node of the field lattice")))?;
    let all = semigroup_residual_field(field, f, t, tau1, tau2)?;
    Ok(all[node])
}

/// Semigroup residual at every node of the field lattice.
pub fn semigroup_residual_field(
    field: &CoefficientField,
    f: &SampledField,
    t: f64,
    tau1: f64,
    tau2: f64,
) -> Result<Vec<f64>> {
    for tau in [tau1, tau2] {
        if !(tau > 0.0) {
            return Err(Error::NonPositiveTau(tau));
        }
    }
    let lattice = &f.grid.space;
    let h = lattice.min_step();
    let lambda = field.lambda();
    let tau_min = tau1.min(tau2);
    // narrowest kernel standard deviation is √(2Λτ)
    if h > (2.0 * lambda * tau_min).sqrt() / 1.5 {
        return Err(Error::GridTooCoarse(format!(
            "step {h} does not resolve the kernel at τ = {tau_min}"
        )));
    }
    let g = f.slice_at_time(t - tau1 - tau2);
    let reach = |tau: f64| (8.0 * (2.0 * tau / lambda).sqrt() / h).ceil() as usize;
    let pad = reach(tau1) + reach(tau2) + reach(tau1 + tau2) + 2;
    let big = lattice.padded_pow2(pad);
    let spectral = Spectral::new(&big);
    let embed = big.embed(lattice, &g);
    let vol = big.cell_volume();
    let kernel_hat = |tt: f64, tau: f64| -> Result<Vec<rustfft::num_complex::Complex64>> {
        let pair = field.averaged(tt, tau)?;
        let samples = big.periodic_offsets_map(|y| density(&pair, y) * vol);
        Ok(spectral.forward(&samples))
    };
    let k1 = kernel_hat(t, tau1)?;
    let k2 = kernel_hat(t - tau1, tau2)?;
    let k12 = kernel_hat(t, tau1 + tau2)?;
    let g_hat = spectral.forward(&embed);
    let two_step: Vec<_> = g_hat.iter().zip(&k1).zip(&k2).map(|((g, a), b)| g * a * b).collect();
    let one_step: Vec<_> = g_hat.iter().zip(&k12).map(|(g, c)| g * c).collect();
    let lhs = spectral.inverse(two_step);
    let rhs = spectral.inverse(one_step);
    let diff: Vec<f64> = lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).collect();
    Ok(big.restrict(lattice, &diff))
}

/// Fitted constant of one displayed Gaussian bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFit {
    pub name: String,
    /// `c` in `e^{−|x|²/(cτ)}`.
    pub c: f64,
    /// Power of `τ` in the denominator.
    pub tau_power: f64,
    /// Rate of the `e^{−sτ}` damping.
    pub damping: f64,
    pub constant: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub fits: Vec<BoundFit>,
    pub nonpositive_tau_samples: usize,
    pub nonpositive_tau_violations: usize,
}

impl BoundReport {
    pub fn fit(&self, name: &str) -> Option<&BoundFit> {
        self.fits.iter().find(|f| f.name == name)
    }
}

/// Fits `C` in the four Gaussian bounds on random points.
///
/// Samples: `t ∈ [−5, 5]`, one in ten with `τ ≤ 0`, otherwise `τ` log-uniform
/// in `[10⁻², 8]` and `x = s·√(τ/Λ)·g` with `g` standard normal, `s ∈ [0, 3]`.
/// The mixed derivatives `∂ₜ∂ᵢⱼp`, `∂_τ∂ᵢⱼp` scale like `τ^{−n/2−2}`, so they
/// are fitted both at the displayed power and at that power.
pub fn kernel_bound_check(field: &CoefficientField, sample_count: usize, seed: u64) -> Result<BoundReport> {
    let n = field.dim();
    let nf = n as f64;
    let lambda = field.lambda();
    let c_value = 4.0 / lambda;
    let c_deriv = 8.0 / lambda;
    let specs: [(&str, f64, f64, f64); 6] = [
        ("value", c_value, 0.5 * nf, 1.0),
        ("gradient", c_value, 0.5 * nf + 1.0, 1.0),
        ("first-order", c_deriv, 0.5 * nf + 1.0, 0.5),
        ("higher-order", c_deriv, 0.5 * nf + 1.5, 0.5),
        ("third-spatial", c_deriv, 0.5 * nf + 1.5, 0.5),
        ("mixed-time", c_deriv, 0.5 * nf + 2.0, 0.5),
    ];
    let mut best = [0.0f64; 6];
    let mut counted = 0;
    let mut nonpos = 0;
    let mut violations = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..sample_count {
        let t = rng.random_range(-5.0..5.0);
        let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if rng.random_bool(0.1) {
            nonpos += 1;
            let tau = -rng.random_range(0.0..2.0);
            let p = kernel_eval(field, &KernelPoint::new(t, tau, &x))?;
            if p != 0.0 {
                violations += 1;
            }
            continue;
        }
        let tau = (rng.random_range((1e-2f64).ln()..8f64.ln())).exp();
        let s = rng.random_range(0.0..3.0) * (tau / lambda).sqrt();
        let x: Vec<f64> = x.iter().map(|v| v * s).collect();
        let j = kernel_jet_full(field, &KernelPoint::new(t, tau, &x))?;
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let max_abs = |m: &DMatrix<f64>| m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let grad = j.grad.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mixed = j.mixed.as_ref().expect("requested");
        let mixed_sum = max_abs(&mixed.dt_hess) + max_abs(&mixed.dtau_hess);
        let third = j.third.as_ref().expect("requested").max_abs();
        let values = [
            j.p,
            grad,
            j.dt.abs() + j.dtau.abs() + max_abs(&j.hess),
            mixed_sum + third,
            third,
            mixed_sum,
        ];
        for (k, &(_, c, power, damping)) in specs.iter().enumerate() {
            let mut envelope = (-damping * tau).exp() * (-r2 / (c * tau)).exp() / tau.powf(power);
            if k == 1 {
                envelope *= r2.sqrt();
            }
            if envelope > 0.0 {
                best[k] = best[k].max(values[k] / envelope);
            }
        }
        counted += 1;
    }
    Ok(BoundReport {
        fits: specs
            .iter()
            .zip(best)
            .map(|(&(name, c, tau_power, damping), constant)| BoundFit {
                name: name.into(),
                c,
                tau_power,
                damping,
                constant,
                samples: counted,
            })
            .collect(),
        nonpositive_tau_samples: nonpos,
        nonpositive_tau_violations: violations,
    })
}

/// Sampled kernel slice `p(t,τ,·)` on a lattice, for export.
pub fn kernel_slice(field: &CoefficientField, t: f64, tau: f64, lattice: &Lattice) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Ok(vec![0.0; lattice.len()]);
    }
    let pair = field.averaged(t, tau)?;
    Ok((0..lattice.len()).map(|k| density(&pair, &lattice.coords(k))).collect())
}

fn check_dim(field: &CoefficientField, x: &[f64]) -> Result<()> {
    if x.len() != field.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), found: x.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heat_kernel_value() {
        let f = CoefficientField::identity(1);
        let p = kernel_eval(&f, &KernelPoint::new(0.3, 1.0, &[0.0])).unwrap();
        assert!((p - (-1f64).exp() / (4.0 * PI).sqrt()).abs() < 1e-15);
        assert!((p - 0.103777).abs() < 1e-6);
    }

    #[test]
    fn negative_tau_gives_zero() {
        let f = CoefficientField::sine_1d();
        assert_eq!(kernel_eval(&f, &KernelPoint::new(0.0, -1.0, &[0.2])).unwrap(), 0.0);
        let j = kernel_jet(&f, &KernelPoint::new(0.0, -1.0, &[0.2]), true).unwrap();
        assert_eq!(j.p, 0.0);
        assert_eq!(j.dt, 0.0);
        assert!(j.hess.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_tau_jet_is_an_error() {
        let f = CoefficientField::identity(1);
        assert!(matches!(kernel_jet(&f, &KernelPoint::new(0.0, 0.0, &[0.2]), false), Err(Error::ZeroTau)));
    }

    #[test]
    fn tiny_tau_cutoff() {
        let f = CoefficientField::identity(1);
        assert_eq!(kernel_eval(&f, &KernelPoint::new(0.0, 1e-13, &[1e-3])).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_value_matches_scalar_formula() {
        let f = CoefficientField::two_level(1);
        let p = kernel_eval(&f, &KernelPoint::new(1.0, 2.0, &[1.0])).unwrap();
        let oracle = (-2f64).exp() / (4.0 * PI * 2.5).sqrt() * (-0.1f64).exp();
        assert!((p - oracle).abs() < 1e-15);
    }

    #[test]
    fn heat_hessian_at_origin() {
        let f = CoefficientField::identity(1);
        let j = kernel_jet(&f, &KernelPoint::new(0.0, 1.0, &[0.0]), false).unwrap();
        assert!((j.hess[(0, 0)] + (-1f64).exp() / (4.0 * PI).sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(j.dt, 0.0);
    }

    #[test]
    fn fourier_examples() {
        let f1 = CoefficientField::identity(1);
        let v = kernel_fourier(&f1, 0.0, 1.0, &[1.0], FourierConvention::Nonunitary).unwrap();
        assert!((v - (-2f64).exp()).abs() < 1e-15);
        let f2 = CoefficientField::identity(2);
        let v = kernel_fourier(&f2, 0.0, 0.5, &[1.0, 1.0], FourierConvention::Nonunitary).unwrap();
        assert!((v - (-1.5f64).exp()).abs() < 1e-15);
        assert_eq!(kernel_fourier(&f2, 0.0, -0.5, &[1.0, 1.0], FourierConvention::Unitary).unwrap(), 0.0);
    }

    #[test]
    fn normalization_audit_selects_nonunitary() {
        let audit = symbol_normalization_audit(&CoefficientField::sine_2d(), 0.4, 0.7).unwrap();
        let ok: Vec<_> = audit.iter().filter(|c| c.consistent).map(|c| c.label.as_str()).collect();
        assert_eq!(ok, vec!["nonunitary", "unitary"]);
    }

    #[test]
    fn mass_examples() {
        let m = kernel_mass(&CoefficientField::identity(1), 0.0, 1.0, HERMITE_ORDER).unwrap();
        assert!((m - (-1f64).exp()).abs() < 1e-14);
        let m = kernel_mass(&CoefficientField::two_level(2), 1.0, 2.0, HERMITE_ORDER).unwrap();
        assert!((m - (-2f64).exp()).abs() < 1e-14);
        assert!(matches!(
            kernel_mass(&CoefficientField::identity(1), 0.0, 0.0, HERMITE_ORDER),
            Err(Error::NonPositiveTau(_))
        ));
    }

    #[test]
    fn adjoint_identity_examples() {
        let r = adjoint_pde_residual(&CoefficientField::identity(1), &KernelPoint::new(0.0, 1.0, &[0.5])).unwrap();
        assert!(r.abs() < 1e-12);
        let r = adjoint_pde_residual(&CoefficientField::sine_1d(), &KernelPoint::new(2.0, 0.3, &[0.1])).unwrap();
        assert!(r.abs() < 1e-10);
        let r =
            adjoint_pde_residual(&CoefficientField::two_level(2), &KernelPoint::new(3.0, 1.0, &[1.0, -1.0])).unwrap();
        assert!(r.abs() < 1e-10);
    }

    #[test]
    fn identity_value_bound_constant() {
        let rep = kernel_bound_check(&CoefficientField::identity(1), 4000, 3).unwrap();
        let c = rep.fit("value").unwrap().constant;
        assert!((c / (4.0 * PI).powf(-0.5) - 1.0).abs() < 0.05, "{c}");
        assert_eq!(rep.nonpositive_tau_violations, 0);
    }
}
