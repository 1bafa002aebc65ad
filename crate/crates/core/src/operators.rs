//! Solution operators on sampled grids.
//!
//! Every operator is a time integral of spatial convolutions against kernel
//! slices:
//!
//! ```text
//! u(t,x) = ∫₀^{t−t₀} ∫ K(t,τ,y) f(t−τ, x−y) dy dτ
//! ```
//!
//! Slices with `τ` above the truncation are applied as exact Fourier
//! multipliers on the padded lattice, integrated in `σ = τ^{1/2}` by
//! composite Gauss–Legendre panels. The near field of the parabolic ball
//! complement (`τ < ε²`, `|y| > ε`) is a polar quadrature whose nodes are
//! spread onto the lattice with cubic interpolation weights and applied by
//! one FFT per `τ` node. Off-node times use cubic interpolation of the
//! slice spectra.

use crate::analysis;
use crate::coeffs::{AveragedPair, CoefficientField};
use crate::corrections::{self, CorrectionQuad};
use crate::error::{Error, Result};
use crate::grid::{Lattice, SampledField, SpatialField};
use crate::kernel::{self, HERMITE_ORDER};
use crate::linalg;
use crate::quadrature::{self, cubic_weights};
use crate::spectral::{Quadratic, Spectral};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Region {
    /// Complement of the parabolic ball `max(τ^{1/2}, |y|) ≤ ε`.
    Omega,
    /// Time slab `τ > ε²`.
    Sigma,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    pub epsilon: f64,
    pub region: Region,
}

impl TruncationSpec {
    pub fn omega(epsilon: f64) -> Self {
        Self { epsilon, region: Region::Omega }
    }

    pub fn sigma(epsilon: f64) -> Self {
        Self { epsilon, region: Region::Sigma }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorOptions {
    /// Panel width in `σ = τ^{1/2}`.
    pub sigma_panel: f64,
    pub sigma_order: usize,
    /// Panels are halved below this `σ` when there is no truncation.
    pub refine_sigma: f64,
    /// Gauss–Legendre order of the near-field `σ` and radial panels.
    pub near_order: usize,
    /// Angular nodes of the near field in two dimensions.
    pub near_angular: usize,
    /// Largest admissible ratio of boundary-band to peak magnitude.
    pub leak_limit: f64,
    /// Largest admissible spectral content above half the Nyquist frequency.
    pub coarse_limit: f64,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        Self {
            sigma_panel: 0.025,
            sigma_order: 4,
            refine_sigma: 0.2,
            near_order: 8,
            near_angular: 64,
            leak_limit: 1e-8,
            coarse_limit: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Value,
    Second(usize, usize),
    Time,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Extra {
    None,
    MinusFI(usize, usize),
    PlusFJ,
    PlusF,
}

/// `σ` nodes and weights on `[lo, hi]`, panels halved below `refine`.
fn sigma_nodes(lo: f64, hi: f64, refine: f64, opts: &OperatorOptions) -> Vec<(f64, f64)> {
    let rule = quadrature::gauss_legendre(opts.sigma_order);
    let mut out = Vec::new();
    let mut segment = |a: f64, b: f64, width: f64| {
        if b > a {
            let panels = ((b - a) / width).ceil().max(1.0) as usize;
            out.extend(quadrature::composite_gauss_legendre(&rule, a, b, panels));
        }
    };
    let mid = refine.clamp(lo, hi);
    segment(lo, mid, 0.5 * opts.sigma_panel);
    segment(mid, hi, opts.sigma_panel);
    out
}

/// One `τ` node of the near field: the averaged pair and polar nodes
/// `(y, weight)` with the `dτ` weight folded in.
struct NearSlice {
    tau: f64,
    pair: AveragedPair,
    nodes: Vec<(Vec<f64>, f64)>,
}

/// Quadrature of `∫_0^{τ_cap} ∫_{|y|>ε} · dy dτ`.
///
/// Below `τ = Λε²/200` and beyond `|y|² = ε² + 160τ/Λ` the kernel is
/// under `e^{−40}` of its peak and is dropped.
fn near_slices(field: &CoefficientField, t: f64, eps: f64, tau_cap: f64, opts: &OperatorOptions) -> Result<Vec<NearSlice>> {
    let n = field.dim();
    let lam = field.lambda();
    let sigma_a = eps * (lam / 200.0).sqrt();
    let sigma_b = tau_cap.min(eps * eps).max(0.0).sqrt();
    if sigma_b <= sigma_a {
        return Ok(Vec::new());
    }
    let rule = quadrature::gauss_legendre(opts.near_order);
    let sphere = match n {
        1 => corrections::sphere(1, 2),
        2 => corrections::sphere(2, opts.near_angular),
        _ => corrections::sphere(n, opts.near_angular / 2),
    };
    let sig = quadrature::composite_gauss_legendre(&rule, sigma_a, sigma_b, 4);
    let mut out = Vec::with_capacity(sig.len());
    for (sigma, ws) in sig {
        let tau = sigma * sigma;
        let pair = field.averaged(t, tau)?;
        let wt = 2.0 * sigma * ws;
        let s_max = 160.0 * tau / lam;
        let mut radial = Vec::new();
        let mut lo = 0.0;
        for hi in [s_max / 27.0, s_max / 9.0, s_max / 3.0, s_max] {
            radial.extend(rule.mapped(lo, hi));
            lo = hi;
        }
        let mut nodes = Vec::with_capacity(radial.len() * sphere.points.len());
        for &(s, wr) in &radial {
            let r = (eps * eps + s).sqrt();
            let w = wt * wr / (2.0 * r) * r.powi(n as i32 - 1);
            for (theta, &wa) in sphere.points.iter().zip(&sphere.weights) {
                nodes.push((theta.iter().map(|c| r * c).collect(), w * wa));
            }
        }
        out.push(NearSlice { tau, pair, nodes });
    }
    Ok(out)
}

/// Kernel values of `kind` at `y` for the slice, sharing one density evaluation.
struct NearKernel {
    a_now: DMatrix<f64>,
    tr_ab: f64,
}

impl NearKernel {
    fn new(pair: &AveragedPair, a_now: &DMatrix<f64>) -> Self {
        Self { a_now: a_now.clone(), tr_ab: (a_now * &pair.b).trace() }
    }

    fn eval(&self, pair: &AveragedPair, y: &[f64], kind: Kind) -> f64 {
        let p = kernel::density(pair, y);
        match kind {
            Kind::Value => p,
            Kind::Second(i, j) => {
                let v = linalg::mat_vec(&pair.b, y);
                0.5 * p * (-pair.b[(i, j)] + 0.5 * v[i] * v[j])
            }
            Kind::Time => {
                let v = linalg::mat_vec(&pair.b, y);
                p * (-0.5 * self.tr_ab + 0.25 * linalg::quad_form(&self.a_now, &v) - 1.0)
            }
        }
    }
}

struct Engine<'a> {
    field: &'a CoefficientField,
    f: &'a SampledField,
    big: Lattice,
    spectral: Spectral,
    quad: Quadratic,
    f_hat: Vec<Vec<Complex64>>,
    band: Vec<usize>,
    high: Vec<bool>,
    opts: OperatorOptions,
}

impl<'a> Engine<'a> {
    fn new(field: &'a CoefficientField, f: &'a SampledField, opts: OperatorOptions) -> Result<Self> {
        if field.dim() != f.dim() {
            return Err(Error::DimensionMismatch { expected: field.dim(), found: f.dim() });
        }
        let big = f.grid.padded_space();
        let spectral = Spectral::new(&big);
        let quad = spectral.quadratic();
        let f_hat: Vec<Vec<Complex64>> = (0..f.grid.time.count)
            .into_par_iter()
            .map(|k| spectral.forward(&big.embed(&f.grid.space, f.slice(k))))
            .collect();
        let shape = big.shape();
        let band = (0..big.len())
            .filter(|&k| big.multi_index(k).iter().zip(&shape).any(|(&i, &m)| i < 2 || i + 2 >= m))
            .collect();
        let nyquist: Vec<f64> = big.axes.iter().map(|a| PI / a.step).collect();
        let high = (0..big.len())
            .map(|k| spectral.wavevector(k).iter().zip(&nyquist).any(|(x, q)| x.abs() > 0.5 * q))
            .collect();
        let engine = Self { field, f, big, spectral, quad, f_hat, band, high, opts };
        let ratio = engine.f_hat.iter().map(|s| engine.high_ratio(s)).fold(0.0, f64::max);
        if ratio > opts.coarse_limit {
            return Err(Error::GridTooCoarse(format!(
                "relative spectral content {ratio:.2e} above half the Nyquist frequency"
            )));
        }
        Ok(engine)
    }

    fn high_ratio(&self, spectrum: &[Complex64]) -> f64 {
        let mut top = 0.0f64;
        let mut high = 0.0f64;
        for (c, &h) in spectrum.iter().zip(&self.high) {
            let m = c.norm();
            top = top.max(m);
            if h {
                high = high.max(m);
            }
        }
        if top == 0.0 { 0.0 } else { high / top }
    }

    /// Cubic time stencil of `f` at `s`, empty outside the window.
    fn slice_weights(&self, s: f64) -> Vec<(usize, f64)> {
        let axis = &self.f.grid.time;
        let slack = 1e-9 * axis.step;
        if s < axis.lo - slack || s > axis.last() + slack {
            return Vec::new();
        }
        self.f.time_stencil(s)
    }

    fn factor(&self, kind: Kind, now: &[f64], k: usize) -> f64 {
        match kind {
            Kind::Value => 1.0,
            Kind::Second(i, j) => -self.quad.term(i, j)[k],
            Kind::Time => -(1.0 + self.quad.eval(now, k)),
        }
    }

    /// Adds `w·e^{−τ}exp(−⟨Aξ,ξ⟩)·factor(ξ)·ĝ(ξ)` for spectrum `ĝ`.
    fn add_symbol<G: Fn(usize) -> Complex64>(&self, a: &DMatrix<f64>, tau: f64, w: f64, kind: Kind, now: &[f64], g: G, acc: &mut [Complex64]) {
        let ca = self.quad.coefficients(a);
        let term = match kind {
            Kind::Second(i, j) => Some(self.quad.term(i, j)),
            _ => None,
        };
        for (k, slot) in acc.iter_mut().enumerate() {
            let e = -tau - self.quad.eval(&ca, k);
            if e < -700.0 {
                continue;
            }
            let factor = match (kind, term) {
                (Kind::Second(..), Some(t)) => -t[k],
                _ => self.factor(kind, now, k),
            };
            *slot += g(k) * (w * e.exp() * factor);
        }
    }

    fn far(&self, t: f64, tau_lo: f64, tau_hi: f64, refine: f64, kind: Kind, now: &[f64], acc: &mut [Complex64]) -> Result<()> {
        if tau_hi <= tau_lo {
            return Ok(());
        }
        for (sigma, w) in sigma_nodes(tau_lo.sqrt(), tau_hi.sqrt(), refine, &self.opts) {
            let tau = sigma * sigma;
            let stencil = self.slice_weights(t - tau);
            if stencil.is_empty() {
                continue;
            }
            let pair = self.field.averaged(t, tau)?;
            let g = |k: usize| stencil.iter().map(|&(s, ws)| self.f_hat[s][k] * ws).sum::<Complex64>();
            self.add_symbol(&pair.a, tau, 2.0 * sigma * w, kind, now, g, acc);
        }
        Ok(())
    }

    fn near(&self, t: f64, eps: f64, kind: Kind, acc: &mut [Complex64]) -> Result<()> {
        let a_now = self.field.eval(t);
        let t0 = self.f.grid.time.lo;
        for slice in near_slices(self.field, t, eps, t - t0, &self.opts)? {
            let stencil = self.slice_weights(t - slice.tau);
            if stencil.is_empty() {
                continue;
            }
            let kern = NearKernel::new(&slice.pair, &a_now);
            let mut spread = vec![0.0; self.big.len()];
            for (y, w) in &slice.nodes {
                let value = w * kern.eval(&slice.pair, y, kind);
                self.spread(y, value, &mut spread);
            }
            let s_hat = self.spectral.forward(&spread);
            for (k, slot) in acc.iter_mut().enumerate() {
                let g: Complex64 = stencil.iter().map(|&(s, ws)| self.f_hat[s][k] * ws).sum();
                *slot += s_hat[k] * g;
            }
        }
        Ok(())
    }

    /// Adds the stencil of `v ↦ value·v(· − y)` under cubic interpolation.
    fn spread(&self, y: &[f64], value: f64, out: &mut [f64]) {
        let n = y.len();
        let mut idx = [[0usize; 4]; 3];
        let mut wts = [[0.0; 4]; 3];
        for d in 0..n {
            let axis = &self.big.axes[d];
            let m = axis.count as isize;
            let u = -y[d] / axis.step;
            let m0 = u.floor();
            let c = cubic_weights(u - m0);
            for a in 0..4 {
                let o = m0 as isize - 1 + a as isize;
                idx[d][a] = (-o).rem_euclid(m) as usize;
                wts[d][a] = c[a];
            }
        }
        let mut multi = vec![0usize; n];
        for combo in 0..4usize.pow(n as u32) {
            let mut w = value;
            let mut c = combo;
            for d in (0..n).rev() {
                let a = c % 4;
                c /= 4;
                multi[d] = idx[d][a];
                w *= wts[d][a];
            }
            out[self.big.flat(&multi)] += w;
        }
    }

    fn run(&self, kind: Kind, trunc: Option<TruncationSpec>, initial: Option<&[Complex64]>, extra: Extra) -> Result<SampledField> {
        let grid = &self.f.grid;
        let t0 = grid.time.lo;
        let nt = grid.time.count;
        let rows: Vec<Result<(Vec<f64>, f64, f64)>> = (0..nt)
            .into_par_iter()
            .map(|k| {
                let t = grid.time.node(k);
                let a_now = self.field.eval(t);
                let now = self.quad.coefficients(&a_now);
                let mut acc = vec![Complex64::new(0.0, 0.0); self.big.len()];
                let (tau_lo, refine) = match trunc {
                    None => (0.0, self.opts.refine_sigma),
                    Some(tr) => (tr.epsilon * tr.epsilon, 2.0 * tr.epsilon),
                };
                self.far(t, tau_lo, t - t0, refine, kind, &now, &mut acc)?;
                if let Some(tr) = trunc.filter(|tr| tr.region == Region::Omega) {
                    self.near(t, tr.epsilon, kind, &mut acc)?;
                }
                if let Some(g_hat) = initial {
                    let tau = t - t0;
                    let a = if tau > 0.0 { self.field.averaged(t, tau)?.a } else { DMatrix::zeros(a_now.nrows(), a_now.ncols()) };
                    self.add_symbol(&a, tau, 1.0, kind, &now, |k| g_hat[k], &mut acc);
                }
                let big_vals = self.spectral.inverse(acc);
                let band = self.band.iter().map(|&i| big_vals[i].abs()).fold(0.0, f64::max);
                let top = big_vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let mut vals = self.big.restrict(&grid.space, &big_vals);
                let c = match extra {
                    Extra::None => 0.0,
                    Extra::PlusF => 1.0,
                    Extra::MinusFI(i, j) => -corrections::corrections_for_matrix(&a_now, &CorrectionQuad::default())?.0[(i, j)],
                    Extra::PlusFJ => corrections::corrections_for_matrix(&a_now, &CorrectionQuad::default())?.2,
                };
                if c != 0.0 {
                    for (v, fv) in vals.iter_mut().zip(self.f.slice(k)) {
                        *v += c * fv;
                    }
                }
                Ok((vals, band, top))
            })
            .collect();
        let mut values = Vec::with_capacity(grid.len());
        let mut band = 0.0f64;
        let mut top = 0.0f64;
        for row in rows {
            let (v, b, m) = row?;
            values.extend(v);
            band = band.max(b);
            top = top.max(m);
        }
        let leakage = if top > 0.0 { band / top } else { 0.0 };
        if leakage > self.opts.leak_limit {
            return Err(Error::PaddingTooSmall { leakage, limit: self.opts.leak_limit });
        }
        Ok(SampledField { grid: grid.clone(), values, smoothness: Default::default(), compact_support: false })
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i >= n || j >= n {
        return Err(Error::InvalidArgument(format!("derivative index ({i}, {j}) out of range for n = {n}")));
    }
    Ok(())
}

fn check_trunc(f: &SampledField, trunc: &TruncationSpec) -> Result<()> {
    trunc.validate()?;
    let step = f.grid.h_x();
    if trunc.epsilon < step {
        return Err(Error::EpsilonBelowGrid { epsilon: trunc.epsilon, step });
    }
    Ok(())
}

fn check_cauchy(f: &SampledField, g: &SpatialField, trunc: Option<&TruncationSpec>) -> Result<()> {
    if f.grid.time.lo.abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("Cauchy grids start at t = 0, got {}", f.grid.time.lo)));
    }
    if g.lattice != f.grid.space {
        return Err(Error::InvalidArgument("initial datum must live on the spatial lattice of f".into()));
    }
    if let Some(tr) = trunc {
        if tr.region != Region::Sigma {
            return Err(Error::InvalidArgument("Cauchy derivatives use the time-slab truncation".into()));
        }
    }
    Ok(())
}

fn initial_spectrum(engine: &Engine, g: &SpatialField) -> Result<Vec<Complex64>> {
    let g_hat = engine.spectral.forward(&engine.big.embed(&g.lattice, &g.values));
    let ratio = engine.high_ratio(&g_hat);
    if ratio > engine.opts.coarse_limit {
        return Err(Error::GridTooCoarse(format!("initial datum has relative content {ratio:.2e} above half Nyquist")));
    }
    Ok(g_hat)
}

/// `u(t,x) = ∫₀^{t−t₀}∫ p(t,τ,y) f(t−τ,x−y) dy dτ`, with `f = 0` before the window.
pub fn solve_full(field: &CoefficientField, f: &SampledField) -> Result<SampledField> {
    solve_full_with(field, f, &OperatorOptions::default())
}

pub fn solve_full_with(field: &CoefficientField, f: &SampledField, opts: &OperatorOptions) -> Result<SampledField> {
    Engine::new(field, f, *opts)?.run(Kind::Value, None, None, Extra::None)
}

/// Duhamel term plus `∫ p(t,t,y) g(x−y) dy` on a grid starting at `t = 0`.
pub fn solve_cauchy(field: &CoefficientField, f: &SampledField, g: &SpatialField) -> Result<SampledField> {
    solve_cauchy_with(field, f, g, &OperatorOptions::default())
}

pub fn solve_cauchy_with(field: &CoefficientField, f: &SampledField, g: &SpatialField, opts: &OperatorOptions) -> Result<SampledField> {
    check_cauchy(f, g, None)?;
    let engine = Engine::new(field, f, *opts)?;
    let g_hat = initial_spectrum(&engine, g)?;
    engine.run(Kind::Value, None, Some(&g_hat), Extra::None)
}

/// Truncated `∂ᵢⱼ` integral with its multiplication term:
/// `−f·I_ij` on `Omega`, none on `Sigma`.
pub fn riesz_second(field: &CoefficientField, f: &SampledField, trunc: &TruncationSpec, i: usize, j: usize) -> Result<SampledField> {
    riesz_second_with(field, f, trunc, i, j, &OperatorOptions::default())
}

pub fn riesz_second_with(
    field: &CoefficientField,
    f: &SampledField,
    trunc: &TruncationSpec,
    i: usize,
    j: usize,
    opts: &OperatorOptions,
) -> Result<SampledField> {
    check_pair(field.dim(), i, j)?;
    check_trunc(f, trunc)?;
    let extra = match trunc.region {
        Region::Omega => Extra::MinusFI(i, j),
        Region::Sigma => Extra::None,
    };
    Engine::new(field, f, *opts)?.run(Kind::Second(i, j), Some(*trunc), None, extra)
}

/// Truncated `(∂ₜ + ∂_τ)` integral plus `f·J` on `Omega`, `f` on `Sigma`.
pub fn time_derivative_op(field: &CoefficientField, f: &SampledField, trunc: &TruncationSpec) -> Result<SampledField> {
    time_derivative_op_with(field, f, trunc, &OperatorOptions::default())
}

pub fn time_derivative_op_with(field: &CoefficientField, f: &SampledField, trunc: &TruncationSpec, opts: &OperatorOptions) -> Result<SampledField> {
    check_trunc(f, trunc)?;
    let extra = match trunc.region {
        Region::Omega => Extra::PlusFJ,
        Region::Sigma => Extra::PlusF,
    };
    Engine::new(field, f, *opts)?.run(Kind::Time, Some(*trunc), None, extra)
}

/// `∂ᵢⱼv` for the Cauchy problem: slab-truncated Duhamel integral plus
/// `∫ ∂ᵢⱼp(t,t,y) g(x−y) dy`.
pub fn cauchy_second(
    field: &CoefficientField,
    f: &SampledField,
    g: &SpatialField,
    trunc: &TruncationSpec,
    i: usize,
    j: usize,
) -> Result<SampledField> {
    cauchy_second_with(field, f, g, trunc, i, j, &OperatorOptions::default())
}

pub fn cauchy_second_with(
    field: &CoefficientField,
    f: &SampledField,
    g: &SpatialField,
    trunc: &TruncationSpec,
    i: usize,
    j: usize,
    opts: &OperatorOptions,
) -> Result<SampledField> {
    check_pair(field.dim(), i, j)?;
    check_trunc(f, trunc)?;
    check_cauchy(f, g, Some(trunc))?;
    let engine = Engine::new(field, f, *opts)?;
    let g_hat = initial_spectrum(&engine, g)?;
    engine.run(Kind::Second(i, j), Some(*trunc), Some(&g_hat), Extra::None)
}

/// `∂ₜv` for the Cauchy problem: slab-truncated `(∂ₜ+∂_τ)` integral,
/// `∫ (∂ₜ+∂_τ)p(t,t,y) g(x−y) dy` and `f(t,x)`.
pub fn cauchy_time(field: &CoefficientField, f: &SampledField, g: &SpatialField, trunc: &TruncationSpec) -> Result<SampledField> {
    cauchy_time_with(field, f, g, trunc, &OperatorOptions::default())
}

pub fn cauchy_time_with(
    field: &CoefficientField,
    f: &SampledField,
    g: &SpatialField,
    trunc: &TruncationSpec,
    opts: &OperatorOptions,
) -> Result<SampledField> {
    check_trunc(f, trunc)?;
    check_cauchy(f, g, Some(trunc))?;
    let engine = Engine::new(field, f, *opts)?;
    let g_hat = initial_spectrum(&engine, g)?;
    engine.run(Kind::Time, Some(*trunc), Some(&g_hat), Extra::PlusF)
}

/// Central-difference `∂ₜu − aⁱʲ∂ᵢⱼu + u − f` on interior nodes, zero on the boundary.
pub fn pde_residual(field: &CoefficientField, u: &SampledField, f: &SampledField) -> Result<SampledField> {
    if u.grid != f.grid {
        return Err(Error::InvalidArgument("u and f must share a grid".into()));
    }
    if field.dim() != u.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), found: u.dim() });
    }
    let grid = &u.grid;
    let lat = &grid.space;
    let n = lat.dim();
    let shape = lat.shape();
    let m = lat.len();
    let ht = grid.h_t();
    let mut strides = vec![1usize; n];
    for d in (0..n.saturating_sub(1)).rev() {
        strides[d] = strides[d + 1] * shape[d + 1];
    }
    let steps: Vec<f64> = lat.axes.iter().map(|a| a.step).collect();
    let mut out = vec![0.0; grid.len()];
    out.par_chunks_mut(m).enumerate().for_each(|(k, row)| {
        if k == 0 || k + 1 >= grid.time.count {
            return;
        }
        let a = field.eval(grid.time.node(k));
        let (prev, cur, next) = (u.slice(k - 1), u.slice(k), u.slice(k + 1));
        let fk = f.slice(k);
        for (q, slot) in row.iter_mut().enumerate() {
            let idx = lat.multi_index(q);
            if idx.iter().zip(&shape).any(|(&i, &s)| i == 0 || i + 1 >= s) {
                continue;
            }
            let mut elliptic = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let d2 = if i == j {
                        (cur[q + strides[i]] - 2.0 * cur[q] + cur[q - strides[i]]) / (steps[i] * steps[i])
                    } else {
                        (cur[q + strides[i] + strides[j]] - cur[q + strides[i] - strides[j]]
                            - cur[q - strides[i] + strides[j]]
                            + cur[q - strides[i] - strides[j]])
                            / (4.0 * steps[i] * steps[j])
                    };
                    elliptic += a[(i, j)] * d2;
                }
            }
            let dt = (next[q] - prev[q]) / (2.0 * ht);
            *slot = dt - elliptic + cur[q] - fk[q];
        }
    });
    Ok(SampledField { grid: grid.clone(), values: out, smoothness: Default::default(), compact_support: false })
}

/// `u*(t,x) = e^{−t²} e^{−|x|²}`.
pub fn manufactured_solution(t: f64, x: &[f64]) -> f64 {
    (-t * t - x.iter().map(|v| v * v).sum::<f64>()).exp()
}

pub fn manufactured_time_derivative(t: f64, x: &[f64]) -> f64 {
    -2.0 * t * manufactured_solution(t, x)
}

pub fn manufactured_second(t: f64, x: &[f64], i: usize, j: usize) -> f64 {
    let delta = if i == j { 2.0 } else { 0.0 };
    (4.0 * x[i] * x[j] - delta) * manufactured_solution(t, x)
}

/// `f* = ∂ₜu* − aⁱʲ(t)∂ᵢⱼu* + u*`.
pub fn manufactured_forcing(field: &CoefficientField, t: f64, x: &[f64]) -> f64 {
    let a = field.eval(t);
    let n = x.len();
    let mut elliptic = 0.0;
    for i in 0..n {
        for j in 0..n {
            elliptic += a[(i, j)] * manufactured_second(t, x, i, j);
        }
    }
    manufactured_time_derivative(t, x) - elliptic + manufactured_solution(t, x)
}

/// `∫ ∂ᵢⱼp(t,τ,y) dy` by Gauss–Hermite quadrature.
pub fn kernel_cancellation(field: &CoefficientField, t: f64, tau: f64, i: usize, j: usize) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::NonPositiveTau(tau));
    }
    check_pair(field.dim(), i, j)?;
    let pair = field.averaged(t, tau)?;
    kernel::hermite_integral(&pair, HERMITE_ORDER, |x| {
        let p = kernel::density(&pair, x);
        let v = linalg::mat_vec(&pair.b, x);
        0.5 * p * (-pair.b[(i, j)] + 0.5 * v[i] * v[j])
    })
}

/// Decay exponent `m` of the comparison profile.
pub const MAJORANT_DECAY: f64 = 2.0;

/// `g(T,R)`: the bound `|∂ᵢⱼp(t,ε²T,εy)| ≤ ε^{−(n+2)} g(T,|y|)` from
/// `spec(B) ⊂ [Λ/τ, 1/(Λτ)]`.
fn hessian_bound(n: usize, lambda: f64, t: f64, r: f64) -> f64 {
    let lt = lambda * t;
    0.5 * (4.0 * PI).powf(-0.5 * n as f64)
        * lt.powf(-0.5 * n as f64)
        * (-lambda * r * r / (4.0 * t)).exp()
        * (1.0 / lt + r * r / (2.0 * lt * lt))
}

/// Constant `C` of the profile `Φ(y,τ) = C·min(1, (|y|²+|τ|)^{−(m+n+2)/2})`:
/// the supremum over `|y| > 1`, `0 < τ < 1` of `g(τ,|y|)(|y|²+τ)^{(m+n+2)/2}`.
/// Found by grid search plus coordinate refinement, then inflated by 1%.
pub fn majorant_constant(n: usize, lambda: f64) -> f64 {
    let power = 0.5 * (MAJORANT_DECAY + n as f64 + 2.0);
    let h = |lt: f64, r: f64| {
        let t = lt.exp();
        hessian_bound(n, lambda, t, r) * (r * r + t).powf(power)
    };
    let r_max = 1.0 + 40.0 / lambda.sqrt();
    let (mut best, mut bl, mut br) = (0.0, 0.0, 1.0);
    let (nl, nr) = (400, 400);
    for a in 0..=nl {
        let lt = -12.0 * (1.0 - a as f64 / nl as f64);
        for b in 0..=nr {
            let r = 1.0 + (r_max - 1.0) * b as f64 / nr as f64;
            let v = h(lt, r);
            if v > best {
                (best, bl, br) = (v, lt, r);
            }
        }
    }
    let mut step = (12.0 / nl as f64, (r_max - 1.0) / nr as f64);
    for _ in 0..60 {
        let mut moved = false;
        for (dl, dr) in [(step.0, 0.0), (-step.0, 0.0), (0.0, step.1), (0.0, -step.1)] {
            let (l2, r2) = ((bl + dl).min(0.0), (br + dr).max(1.0));
            let v = h(l2, r2);
            if v > best {
                (best, bl, br) = (v, l2, r2);
                moved = true;
            }
        }
        if !moved {
            step = (0.5 * step.0, 0.5 * step.1);
        }
    }
    1.01 * best
}

/// `Φ(y,τ)/C` for the squared parabolic radius `s = |y|² + |τ|`.
fn profile(n: usize, s: f64) -> f64 {
    if s <= 1.0 { 1.0 } else { s.powf(-0.5 * (MAJORANT_DECAY + n as f64 + 2.0)) }
}

/// `ω_n = |{|y| ≤ 1}|` in `ℝⁿ`.
fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `‖Φ‖_{L¹(ℝ^{n+1})} = C·c_n·(1 + (n+2)/m)` with `c_n = |{|y|²+|τ| ≤ 1}| = 4ω_n/(n+2)`.
pub fn majorant_profile_norm(n: usize, lambda: f64) -> f64 {
    let level = 4.0 * unit_ball_volume(n) / (n as f64 + 2.0);
    majorant_constant(n, lambda) * level * (1.0 + (n as f64 + 2.0) / MAJORANT_DECAY)
}

/// `κ_n = |{max(|τ|^{1/2},|y|) ≤ 1}| / |{|y|²+|τ| ≤ 1}| = (n+2)/2`.
pub fn level_set_ratio(n: usize) -> f64 {
    0.5 * (n as f64 + 2.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonValue {
    pub epsilon: f64,
    /// `max_ij` of `|Ω_ε-truncated − Σ_{ε²}-truncated|` for `∂ᵢⱼ`.
    pub difference: f64,
    /// `(ε^{−(n+2)}Φ(·/ε, ·/ε²) ∗ |f|)` at the point.
    pub majorant: f64,
    pub constant: f64,
}

impl ComparisonValue {
    pub fn dominated(&self) -> bool {
        self.difference <= self.majorant
    }
}

fn split_point(f: &SampledField, point: &[f64]) -> Result<(f64, Vec<f64>)> {
    if point.len() != f.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: f.dim() + 1, found: point.len() });
    }
    Ok((point[0], point[1..].to_vec()))
}

/// Cubic-in-time slice combination, zero outside the window.
fn slice_near(f: &SampledField, s: f64) -> Option<Vec<f64>> {
    let axis = &f.grid.time;
    let slack = 1e-9 * axis.step;
    if s < axis.lo - slack || s > axis.last() + slack {
        return None;
    }
    Some(f.slice_at_time(s))
}

/// The two truncations differ on `τ < ε²`, `|y| > ε` only; that region is
/// integrated directly at `point = (t, x)` for every `(i, j)`.
pub fn comparison_difference(field: &CoefficientField, f: &SampledField, epsilon: f64, point: &[f64]) -> Result<ComparisonValue> {
    comparison_difference_with(field, f, epsilon, point, &OperatorOptions::default())
}

pub fn comparison_difference_with(
    field: &CoefficientField,
    f: &SampledField,
    epsilon: f64,
    point: &[f64],
    opts: &OperatorOptions,
) -> Result<ComparisonValue> {
    check_trunc(f, &TruncationSpec::omega(epsilon))?;
    let (t, x) = split_point(f, point)?;
    if field.dim() != f.dim() {
        return Err(Error::DimensionMismatch { expected: field.dim(), found: f.dim() });
    }
    let n = f.dim();
    let lat = &f.grid.space;
    let a_now = field.eval(t);
    let mut sums = vec![0.0; n * n];
    let mut y_shift = vec![0.0; n];
    for slice in near_slices(field, t, epsilon, t - f.grid.time.lo, opts)? {
        let Some(values) = slice_near(f, t - slice.tau) else { continue };
        let kern = NearKernel::new(&slice.pair, &a_now);
        for (y, w) in &slice.nodes {
            for d in 0..n {
                y_shift[d] = x[d] - y[d];
            }
            let fv = lat.interpolate(&values, &y_shift);
            if fv == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    sums[i * n + j] += w * fv * kern.eval(&slice.pair, y, Kind::Second(i, j));
                }
            }
        }
    }
    let difference = sums.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let constant = majorant_constant(n, field.lambda());
    let majorant = majorant_at(f, epsilon, t, &x, constant);
    Ok(ComparisonValue { epsilon, difference, majorant, constant })
}

/// Riemann sum of `ε^{−(n+2)} Φ((x−x')/ε, (t−t')/ε²) |f(t',x')|` over the grid.
fn majorant_at(f: &SampledField, eps: f64, t: f64, x: &[f64], constant: f64) -> f64 {
    let n = f.dim();
    let lat = &f.grid.space;
    let scale = constant * eps.powi(-(n as i32 + 2)) * f.grid.space_time_volume();
    let mut total = 0.0;
    for k in 0..f.grid.time.count {
        let tau = (t - f.grid.time.node(k)).abs() / (eps * eps);
        for (q, &v) in f.slice(k).iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let r2: f64 = lat.coords(q).iter().zip(x).map(|(a, b)| ((a - b) / eps).powi(2)).sum();
            total += profile(n, r2 + tau) * v.abs();
        }
    }
    scale * total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalCheck {
    pub sup_difference: f64,
    pub maximal: f64,
    /// `κ_n‖Φ‖₁ · M f(point)`.
    pub bound: f64,
}

impl MaximalCheck {
    pub fn holds(&self) -> bool {
        self.sup_difference <= self.bound
    }
}

/// `sup_ε |difference|` against `κ_n‖Φ‖₁·Mf(point)` with the parabolic maximal function.
pub fn comparison_maximal_check(
    field: &CoefficientField,
    f: &SampledField,
    epsilons: &[f64],
    point: &[f64],
    radii: &[f64],
) -> Result<MaximalCheck> {
    let mut sup = 0.0f64;
    for &eps in epsilons {
        sup = sup.max(comparison_difference(field, f, eps, point)?.difference);
    }
    let maximal = analysis::parabolic_maximal(f, point, radii)?;
    let n = f.dim();
    let bound = level_set_ratio(n) * majorant_profile_norm(n, field.lambda()) * maximal;
    Ok(MaximalCheck { sup_difference: sup, maximal, bound })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CzReport {
    pub accepted: usize,
    /// Sampled pairs failing the separation condition.
    pub rejected: usize,
    /// `max |K(X,Y₀)| ρ(X,Y₀)^{n+2}`.
    pub size_constant: f64,
    /// `max (|K(X,Y)−K(X,Y₀)| + |K(Y,X)−K(Y₀,X)|) ρ(X,Y₀)^{n+3} / ρ(Y,Y₀)`.
    pub smoothness_constant: f64,
    pub operator_pairs: usize,
    /// `max ‖K(t,τ)φ‖₂ |t−τ| / ‖φ‖₂` over probes.
    pub operator_bound: f64,
    /// `max ‖∂_τK(t,τ)φ‖₂ |t−τ|² / ‖φ‖₂` over probes.
    pub operator_derivative_bound: f64,
}

/// `|Δt|^{1/2} + |Δx|` between space-time points `(t, x…)`.
pub fn cz_distance(a: &[f64], b: &[f64]) -> f64 {
    let dx: f64 = a[1..].iter().zip(&b[1..]).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    (a[0] - b[0]).abs().sqrt() + dx
}

/// `ρ(X,Y₀) ≥ 2ρ(Y,Y₀)`.
pub fn separated(x: &[f64], y: &[f64], y0: &[f64]) -> bool {
    cz_distance(x, y0) >= 2.0 * cz_distance(y, y0)
}

/// `K_ij(X,Y) = ∂ᵢⱼp(t, t−s, x−z)` for `X = (t,x)`, `Y = (s,z)`.
fn cz_kernel(field: &CoefficientField, x: &[f64], y: &[f64]) -> Result<DMatrix<f64>> {
    let n = field.dim();
    let tau = x[0] - y[0];
    if tau <= kernel::TAU_CUTOFF {
        return Ok(DMatrix::zeros(n, n));
    }
    let pair = field.averaged(x[0], tau)?;
    let z: Vec<f64> = x[1..].iter().zip(&y[1..]).map(|(a, b)| a - b).collect();
    let p = kernel::density(&pair, &z);
    let v = linalg::mat_vec(&pair.b, &z);
    Ok(DMatrix::from_fn(n, n, |i, j| 0.5 * p * (-pair.b[(i, j)] + 0.5 * v[i] * v[j])))
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|c| c / r).collect();
        }
    }
}

/// Offset with `|Δt|^{1/2} + |Δx| = rho` and time part of sign `sign`.
fn offset(rng: &mut ChaCha8Rng, n: usize, rho: f64, sign: f64) -> Vec<f64> {
    let u: f64 = rng.random_range(0.0..1.0);
    let dir = random_unit(rng, n);
    let mut out = vec![sign * (u * rho).powi(2)];
    out.extend(dir.iter().map(|d| d * (1.0 - u) * rho));
    out
}

/// Size and smoothness fits on random separated pairs and operator-norm
/// ratios of the slice operators `φ ↦ ∫ K(t,τ,x−y)φ(y)dy` on bump probes.
pub fn cz_kernel_checks(field: &CoefficientField, pair_count: usize, seed: u64) -> Result<CzReport> {
    let n = field.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(pair_count);
    let mut rejected = 0;
    while samples.len() < pair_count {
        let t: f64 = rng.random_range(-2.0..2.0);
        let mut x = vec![t];
        x.extend((0..n).map(|_| rng.random_range(-1.0..1.0)));
        let rho = (0.01f64.ln() + rng.random_range(0.0..1.0) * 100f64.ln()).exp();
        let d = offset(&mut rng, n, rho, -1.0);
        let y0: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        let r = rng.random_range(0.0..0.75) * rho;
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let e = offset(&mut rng, n, r, sign);
        let y: Vec<f64> = y0.iter().zip(&e).map(|(a, b)| a + b).collect();
        if !separated(&x, &y, &y0) || cz_distance(&y, &y0) == 0.0 {
            rejected += 1;
            continue;
        }
        samples.push((x, y, y0));
    }
    let fits: Vec<Result<(f64, f64)>> = samples.par_iter().map(|(x, y, y0)| cz_statistics(field, x, y, y0)).collect();
    let mut scored = Vec::with_capacity(samples.len());
    for (idx, fit) in fits.into_iter().enumerate() {
        let (s, m) = fit?;
        scored.push((idx, s, m));
    }
    // best samples overall plus the best per time bin of X, bins split at breakpoints
    let top = |key: fn(&(usize, f64, f64)) -> f64| -> Vec<usize> {
        let mut order = scored.clone();
        order.sort_by(|a, b| key(b).total_cmp(&key(a)));
        let mut starts: Vec<usize> = order.iter().take(CZ_ASCENT_STARTS).map(|e| e.0).collect();
        let mut edges: Vec<f64> = (0..=CZ_TIME_BINS).map(|b| -2.0 + 4.0 * b as f64 / CZ_TIME_BINS as f64).collect();
        edges.extend(field.breakpoints().iter().copied().filter(|t| t.abs() < 2.0));
        edges.sort_by(|a, b| a.total_cmp(b));
        let mut bins = vec![None; edges.len()];
        for e in &order {
            let t = samples[e.0].0[0];
            let b = edges.partition_point(|&edge| edge <= t);
            if bins[b].is_none() {
                bins[b] = Some(e.0);
            }
        }
        for idx in bins.into_iter().flatten() {
            if !starts.contains(&idx) {
                starts.push(idx);
            }
        }
        starts
    };
    let size_starts = top(|e| e.1);
    let smooth_starts = top(|e| e.2);
    let ascend = |starts: &[usize], which: usize, seed: u64| -> Result<f64> {
        let best: Vec<Result<f64>> = starts
            .par_iter()
            .enumerate()
            .map(|(r, &idx)| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
                cz_ascent(field, &samples[idx], which, &mut rng)
            })
            .collect();
        best.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
    };
    let size_constant = ascend(&size_starts, 0, seed ^ 0x5157)?;
    let smoothness_constant = ascend(&smooth_starts, 1, seed ^ 0x5307)?;
    let (operator_bound, operator_derivative_bound, operator_pairs) = operator_probes(field, 100, &mut rng)?;
    Ok(CzReport {
        accepted: samples.len(),
        rejected,
        size_constant,
        smoothness_constant,
        operator_pairs,
        operator_bound,
        operator_derivative_bound,
    })
}

/// Starting samples of the local ascent per fitted constant.
const CZ_ASCENT_STARTS: usize = 64;
const CZ_TIME_BINS: usize = 16;
const CZ_ASCENT_STEPS: usize = 1500;

fn cz_statistics(field: &CoefficientField, x: &[f64], y: &[f64], y0: &[f64]) -> Result<(f64, f64)> {
    let n = field.dim();
    let rho = cz_distance(x, y0);
    let k0 = cz_kernel(field, x, y0)?;
    let k1 = cz_kernel(field, x, y)?;
    let r0 = cz_kernel(field, y0, x)?;
    let r1 = cz_kernel(field, y, x)?;
    let size = k0.amax() * rho.powi(n as i32 + 2);
    let smooth = ((k1 - &k0).amax() + (r1 - r0).amax()) * rho.powi(n as i32 + 3) / cz_distance(y, y0);
    Ok((size, smooth))
}

/// Random-perturbation hill climb of one statistic from a sampled triple,
/// keeping the separation condition; steps grow on acceptance and shrink on rejection.
fn cz_ascent(field: &CoefficientField, start: &(Vec<f64>, Vec<f64>, Vec<f64>), which: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let pick = |s: (f64, f64)| if which == 0 { s.0 } else { s.1 };
    let (mut x, mut y, mut y0) = start.clone();
    let mut best = pick(cz_statistics(field, &x, &y, &y0)?);
    // one step size per move: X, Y₀, Y, rigid time shift of the triple
    let mut steps = [0.25; 4];
    let normal = rand_distr::StandardNormal;
    for _ in 0..CZ_ASCENT_STEPS {
        let rho = cz_distance(&x, &y0);
        let inner = cz_distance(&y, &y0).max(1e-3 * rho);
        let kind = rng.random_range(0..4);
        let step = steps[kind];
        let mut jitter = |p: &[f64], scale: f64| -> Vec<f64> {
            p.iter()
                .enumerate()
                .map(|(d, v)| {
                    let z: f64 = rng.sample(normal);
                    v + z * if d == 0 { (scale * step).powi(2) } else { scale * step }
                })
                .collect()
        };
        let (cx, cy0, cy) = match kind {
            0 => (jitter(&x, rho), y0.clone(), y.clone()),
            1 => (x.clone(), jitter(&y0, rho), y.clone()),
            2 => (x.clone(), y0.clone(), jitter(&y, inner)),
            _ => {
                let z: f64 = rng.sample(normal);
                let shift = (x[0] + z * step).clamp(-2.0, 2.0) - x[0];
                let moved = |p: &[f64]| -> Vec<f64> {
                    let mut q = p.to_vec();
                    q[0] += shift;
                    q
                };
                (moved(&x), moved(&y0), moved(&y))
            }
        };
        let accepted = separated(&cx, &cy, &cy0) && cz_distance(&cy, &cy0) > 0.0 && {
            let value = pick(cz_statistics(field, &cx, &cy, &cy0)?);
            value > best && {
                best = value;
                (x, y, y0) = (cx, cy, cy0);
                true
            }
        };
        steps[kind] = if accepted { (step * 1.5).min(0.5) } else { (step * 0.9).max(1e-4) };
    }
    Ok(best)
}

fn operator_probes(field: &CoefficientField, pairs: usize, rng: &mut ChaCha8Rng) -> Result<(f64, f64, usize)> {
    let n = field.dim();
    let lattice = match n {
        1 => Lattice::cube(1, -8.0, 8.0, 1024),
        2 => Lattice::cube(2, -4.0, 4.0, 128),
        _ => Lattice::cube(n, -4.0, 4.0, 32),
    };
    let spectral = Spectral::new(&lattice);
    let quad = spectral.quadratic();
    let vol = lattice.cell_volume();
    let norm = |v: &[f64]| (v.iter().map(|c| c * c).sum::<f64>() * vol).sqrt();
    let mut bound = 0.0f64;
    let mut deriv = 0.0f64;
    for _ in 0..pairs {
        let t: f64 = rng.random_range(-2.0..2.0);
        let s = (0.05f64.ln() + rng.random_range(0.0..1.0) * 40f64.ln()).exp();
        let width: f64 = rng.random_range(0.3..1.5);
        let center: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi: Vec<f64> = (0..lattice.len())
            .map(|q| {
                let r2: f64 = lattice.coords(q).iter().zip(&center).map(|(a, c)| ((a - c) / width).powi(2)).sum();
                if r2 < 1.0 { (1.0 - r2).powi(3) } else { 0.0 }
            })
            .collect();
        let phi_norm = norm(&phi);
        let phi_hat = spectral.forward(&phi);
        let pair = field.averaged(t, s)?;
        let ca = quad.coefficients(&pair.a);
        let cl = quad.coefficients(&field.eval(t - s));
        for i in 0..n {
            for j in i..n {
                let term = quad.term(i, j);
                let mut val = Vec::with_capacity(phi_hat.len());
                let mut der = Vec::with_capacity(phi_hat.len());
                for (k, c) in phi_hat.iter().enumerate() {
                    let m = -term[k] * (-s - quad.eval(&ca, k)).exp();
                    val.push(c * m);
                    der.push(c * (-(1.0 + quad.eval(&cl, k)) * m));
                }
                bound = bound.max(norm(&spectral.inverse(val)) * s / phi_norm);
                deriv = deriv.max(norm(&spectral.inverse(der)) * s * s / phi_norm);
            }
        }
    }
    Ok((bound, deriv, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn bump(r2: f64) -> f64 {
        if r2 < 1.0 { (1.0 - r2).powi(4) } else { 0.0 }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let grid = GridSpec::uniform(1, (0.0, 1.0), 9, (-4.0, 4.0), 64, 64).unwrap();
        let f = SampledField::zeros(grid);
        let field = CoefficientField::sine_1d();
        assert_eq!(solve_full(&field, &f).unwrap().max_abs(), 0.0);
        let r = riesz_second(&field, &f, &TruncationSpec::omega(0.25), 0, 0).unwrap();
        assert_eq!(r.max_abs(), 0.0);
    }

    #[test]
    fn heat_oracle_for_separable_forcing() {
        // f = φ(t)e^{−x²}; the heat flow of e^{−x²} is (1+4τ)^{−1/2}e^{−x²/(1+4τ)}
        let phi = |t: f64| bump(((t - 0.5) / 0.5).powi(2));
        let grid = GridSpec::uniform(1, (0.0, 2.0), 128, (-10.0, 10.0), 128, 640).unwrap();
        let f = SampledField::from_fn(grid.clone(), |t, x| phi(t) * (-x[0] * x[0]).exp());
        let u = solve_full(&CoefficientField::identity(1), &f).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for k in 0..grid.time.count {
            let t = grid.time.node(k);
            for (q, &v) in u.slice(k).iter().enumerate() {
                let x = grid.space.axes[0].node(q);
                let exact = quadrature::adaptive(
                    |tau| {
                        let s = 1.0 + 4.0 * tau;
                        (-tau).exp() * phi(t - tau) * (-x * x / s).exp() / s.sqrt()
                    },
                    0.0,
                    t,
                    1e-13,
                )
                .unwrap();
                num += (v - exact).powi(2);
                den += exact * exact;
            }
        }
        let rel = (num / den).sqrt();
        assert!(rel < 1e-4, "relative L2 error {rel:.3e}");
    }

    #[test]
    fn cauchy_gaussian_datum() {
        let grid = GridSpec::uniform(1, (0.0, 1.0), 11, (-8.0, 8.0), 128, 256).unwrap();
        let f = SampledField::zeros(grid.clone());
        let g = SpatialField::from_fn(grid.space.clone(), |x| (-x[0] * x[0]).exp());
        let field = CoefficientField::identity(1);
        let v = solve_cauchy(&field, &f, &g).unwrap();
        let second = cauchy_second(&field, &f, &g, &TruncationSpec::sigma(0.125), 0, 0).unwrap();
        let time = cauchy_time(&field, &f, &g, &TruncationSpec::sigma(0.125)).unwrap();
        for k in 0..grid.time.count {
            let t = grid.time.node(k);
            for q in 0..grid.space.len() {
                let x = grid.space.axes[0].node(q);
                let s = 1.0 + 4.0 * t;
                let exact = (-t).exp() * (-x * x / s).exp() / s.sqrt();
                let exact_xx = exact * (4.0 * x * x / (s * s) - 2.0 / s);
                let idx = k * grid.space.len() + q;
                assert!((v.values[idx] - exact).abs() < 1e-6);
                assert!((second.values[idx] - exact_xx).abs() < 1e-5);
                assert!((time.values[idx] - (exact_xx - exact)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn padding_and_resolution_errors() {
        let grid = GridSpec::uniform(1, (0.0, 4.0), 9, (-4.0, 4.0), 64, 2).unwrap();
        let f = SampledField::from_fn(grid, |t, x| bump(((t - 1.0) / 0.8).powi(2)) * bump(x[0] * x[0] / 4.0));
        let r = solve_full(&CoefficientField::identity(1), &f);
        assert!(matches!(r, Err(Error::PaddingTooSmall { .. })), "{r:?}");
        let grid = GridSpec::uniform(1, (0.0, 1.0), 5, (-4.0, 4.0), 16, 64).unwrap();
        let f = SampledField::from_fn(grid, |_, x| bump(x[0] * x[0] / 0.09));
        let r = solve_full(&CoefficientField::identity(1), &f);
        assert!(matches!(r, Err(Error::GridTooCoarse(_))), "{r:?}");
        let grid = GridSpec::uniform(1, (0.0, 1.0), 5, (-4.0, 4.0), 64, 64).unwrap();
        let f = SampledField::zeros(grid);
        let r = riesz_second(&CoefficientField::identity(1), &f, &TruncationSpec::omega(0.05), 0, 0);
        assert!(matches!(r, Err(Error::EpsilonBelowGrid { .. })));
    }

    #[test]
    fn manufactured_residual_is_stencil_error() {
        let field = CoefficientField::sine_2d();
        let grid = GridSpec::uniform(2, (-1.0, 1.0), 41, (-3.0, 3.0), 48, 8).unwrap();
        let u = SampledField::from_fn(grid.clone(), manufactured_solution);
        let f = SampledField::from_fn(grid.clone(), |t, x| manufactured_forcing(&field, t, x));
        let r = pde_residual(&field, &u, &f).unwrap();
        // second-order stencil: h_t²/6·|∂ₜ³u| + h²/12·|a||∂⁴u|
        let bound = grid.h_t().powi(2) / 6.0 * 8.0 + grid.h_x().powi(2) / 12.0 * 1.7 * 12.0 * 4.0;
        assert!(r.max_abs() < bound, "{} vs {bound}", r.max_abs());
        assert!(r.max_abs() > 0.0);
    }

    #[test]
    fn cancellation_is_zero() {
        let field = CoefficientField::identity(1);
        assert!(kernel_cancellation(&field, 0.0, 1.0, 0, 0).unwrap().abs() < 1e-12);
        let field = CoefficientField::random_piecewise(2, 0.4, 5, 1.0, 8.0).unwrap();
        assert!(kernel_cancellation(&field, 0.7, 0.3, 0, 1).unwrap().abs() < 1e-10);
        assert!(matches!(kernel_cancellation(&field, 0.0, -1.0, 0, 0), Err(Error::NonPositiveTau(_))));
    }

    #[test]
    fn majorant_constant_bounds_the_profile() {
        for (n, lam) in [(1, 1.0), (1, 0.5), (2, 0.4)] {
            let c = majorant_constant(n, lam);
            assert!(c.is_finite() && c > 0.0);
            let power = 0.5 * (MAJORANT_DECAY + n as f64 + 2.0);
            for a in 0..50 {
                for b in 0..50 {
                    let t = 10f64.powf(-4.0 * a as f64 / 49.0);
                    let r = 1.0 + 10.0 * b as f64 / 49.0;
                    assert!(hessian_bound(n, lam, t, r) * (r * r + t).powf(power) <= c);
                }
            }
        }
    }

    #[test]
    fn separation_filter() {
        let x = [1.0, 0.0];
        let y0 = [0.0, 0.0];
        assert!(separated(&x, &[0.04, 0.1], &y0));
        assert!(!separated(&x, &[0.0, 0.6], &y0));
        assert!((cz_distance(&[1.0, 3.0], &[0.0, 0.0]) - 4.0).abs() < 1e-15);
    }
}
