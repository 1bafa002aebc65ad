//! Parabolic metric, maximal functions, Muckenhoupt constants, mixed norms,
//! Hölder seminorms, sharp maximal functions and weighted distribution
//! functions on sampled fields.
//!
//! Space-time points are slices `[t, x₁, …, xₙ]`. Parabolic balls are
//! `B((t,x), r) = {|s−t| ≤ r², |y−x| ≤ r}`, the balls of the distance
//! `max(|Δt|^{1/2}, |Δx|)`.

use crate::error::{Error, Result};
use crate::grid::{Axis, GridSpec, Lattice, SampledField, SpatialField};
use crate::quadrature;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `max(|t−τ|^{1/2}, |x−y|)`.
pub fn parabolic_distance(p1: &[f64], p2: &[f64]) -> Result<f64> {
    if p1.len() != p2.len() {
        return Err(Error::DimensionMismatch { expected: p1.len(), found: p2.len() });
    }
    if p1.is_empty() {
        return Err(Error::InvalidArgument("points need a time coordinate".into()));
    }
    let dx: f64 = p1[1..].iter().zip(&p2[1..]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    Ok((p1[0] - p2[0]).abs().sqrt().max(dx))
}

fn check_point(f: &SampledField, point: &[f64]) -> Result<()> {
    if point.len() != f.dim() + 1 {
        return Err(Error::DimensionMismatch { expected: f.dim() + 1, found: point.len() });
    }
    Ok(())
}

fn check_radius(f: &SampledField, r: f64) -> Result<()> {
    let step = f.grid.h_x();
    if !(r >= step) {
        return Err(Error::RadiusBelowGrid { radius: r, step });
    }
    Ok(())
}

/// Index range of nodes of `axis`, extended beyond the window, within `[lo, hi]`.
fn index_range(axis: &Axis, lo: f64, hi: f64) -> (isize, isize) {
    let a = ((lo - axis.lo) / axis.step - 1e-9).ceil() as isize;
    let b = ((hi - axis.lo) / axis.step + 1e-9).floor() as isize;
    (a, b)
}

/// Visits grid nodes `(time index, flat space index)` of the parabolic ball
/// and returns the number of nodes of the infinite lattice in it.
fn ball_nodes<F: FnMut(usize, usize)>(f: &SampledField, center: &[f64], r: f64, mut visit: F) -> usize {
    let grid = &f.grid;
    let lat = &grid.space;
    let n = lat.dim();
    let (t0, t1) = index_range(&grid.time, center[0] - r * r, center[0] + r * r);
    let ranges: Vec<(isize, isize)> = (0..n).map(|d| index_range(&lat.axes[d], center[d + 1] - r, center[d + 1] + r)).collect();
    let mut spatial = Vec::new();
    let mut idx: Vec<isize> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().all(|r| r.0 <= r.1) {
        loop {
            let d2: f64 = (0..n)
                .map(|d| (lat.axes[d].lo + idx[d] as f64 * lat.axes[d].step - center[d + 1]).powi(2))
                .sum();
            if d2 <= r * r * (1.0 + 1e-12) {
                let inside = idx.iter().zip(&lat.axes).all(|(&i, a)| i >= 0 && (i as usize) < a.count);
                spatial.push(inside.then(|| {
                    let u: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
                    lat.flat(&u)
                }));
            }
            let mut d = n;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] <= ranges[d].1 {
                    break;
                }
                idx[d] = ranges[d].0;
                if d == 0 {
                    d = usize::MAX;
                    break;
                }
            }
            if d == usize::MAX {
                break;
            }
        }
    }
    let times = (t1 - t0 + 1).max(0) as usize;
    for k in t0..=t1 {
        if k < 0 || k as usize >= grid.time.count {
            continue;
        }
        for q in spatial.iter().flatten() {
            visit(k as usize, *q);
        }
    }
    times * spatial.len()
}

/// Discrete measure of `B(center, r)`: lattice points times cell volume.
pub fn ball_measure(f: &SampledField, center: &[f64], r: f64) -> Result<f64> {
    check_point(f, center)?;
    Ok(ball_nodes(f, center, r, |_, _| {}) as f64 * f.grid.space_time_volume())
}

/// `max_r` of the average of `|f|` over `B(point, r)`, with `f` extended by zero.
pub fn parabolic_maximal(f: &SampledField, point: &[f64], radii: &[f64]) -> Result<f64> {
    check_point(f, point)?;
    let mut best = 0.0f64;
    for &r in radii {
        check_radius(f, r)?;
        let mut sum = 0.0;
        let m = f.grid.space.len();
        let count = ball_nodes(f, point, r, |k, q| sum += f.values[k * m + q].abs());
        if count > 0 {
            best = best.max(sum / count as f64);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightDomain {
    Spacetime,
    Space,
    Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "kebab-case")]
pub enum WeightForm {
    /// `w = ρ(·, 0)^γ` with the distance of the domain.
    Power { gamma: f64 },
    /// `w(t,x) = ν(t)ω(x)`.
    Tensor { nu: Box<WeightSpec>, omega: Box<WeightSpec> },
    /// Nearest-node values on a tensor grid of the domain coordinates.
    Sampled { axes: Vec<Axis>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub domain: WeightDomain,
    /// Space dimension `n`; the domain has `n+1`, `n` or `1` coordinates.
    pub dim: usize,
    #[serde(flatten)]
    pub form: WeightForm,
}

/// A ball of the domain metric: parabolic for space-time, Euclidean in
/// space, an interval in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl WeightSpec {
    pub fn unit(domain: WeightDomain, dim: usize) -> Self {
        Self::power(domain, dim, 0.0)
    }

    pub fn power(domain: WeightDomain, dim: usize, gamma: f64) -> Self {
        Self { domain, dim, form: WeightForm::Power { gamma } }
    }

    pub fn tensor(nu: WeightSpec, omega: WeightSpec) -> Result<Self> {
        if nu.domain != WeightDomain::Time || omega.domain != WeightDomain::Space {
            return Err(Error::InvalidArgument("tensor weights pair a time factor with a space factor".into()));
        }
        Ok(Self { domain: WeightDomain::Spacetime, dim: omega.dim, form: WeightForm::Tensor { nu: Box::new(nu), omega: Box::new(omega) } })
    }

    pub fn sampled(domain: WeightDomain, dim: usize, axes: Vec<Axis>, values: Vec<f64>) -> Result<Self> {
        let w = Self { domain, dim, form: WeightForm::Sampled { axes, values } };
        w.validate()?;
        Ok(w)
    }

    /// Number of coordinates of the domain.
    pub fn coords(&self) -> usize {
        match self.domain {
            WeightDomain::Spacetime => self.dim + 1,
            WeightDomain::Space => self.dim,
            WeightDomain::Time => 1,
        }
    }

    /// Homogeneous dimension of the domain.
    pub fn homogeneous_dim(&self) -> f64 {
        match self.domain {
            WeightDomain::Spacetime => self.dim as f64 + 2.0,
            WeightDomain::Space => self.dim as f64,
            WeightDomain::Time => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.form {
            WeightForm::Power { gamma } if !gamma.is_finite() => Err(Error::InvalidArgument("power exponent must be finite".into())),
            WeightForm::Power { .. } => Ok(()),
            WeightForm::Tensor { nu, omega } => {
                if self.domain != WeightDomain::Spacetime || nu.domain != WeightDomain::Time || omega.domain != WeightDomain::Space {
                    return Err(Error::InvalidArgument("tensor weights pair a time factor with a space factor".into()));
                }
                nu.validate()?;
                omega.validate()
            }
            WeightForm::Sampled { axes, values } => {
                if axes.len() != self.coords() {
                    return Err(Error::DimensionMismatch { expected: self.coords(), found: axes.len() });
                }
                if axes.iter().map(|a| a.count).product::<usize>() != values.len() {
                    return Err(Error::InvalidArgument("sample count does not match the axes".into()));
                }
                if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::InvalidArgument("sampled weights must be positive and finite".into()));
                }
                Ok(())
            }
        }
    }

    /// `w⁻¹`.
    pub fn reciprocal(&self) -> Self {
        let form = match &self.form {
            WeightForm::Power { gamma } => WeightForm::Power { gamma: -gamma },
            WeightForm::Tensor { nu, omega } => WeightForm::Tensor { nu: Box::new(nu.reciprocal()), omega: Box::new(omega.reciprocal()) },
            WeightForm::Sampled { axes, values } => WeightForm::Sampled { axes: axes.clone(), values: values.iter().map(|v| 1.0 / v).collect() },
        };
        Self { domain: self.domain, dim: self.dim, form }
    }

    /// Distance of a domain point to the origin.
    fn rho(&self, x: &[f64]) -> f64 {
        match self.domain {
            WeightDomain::Spacetime => x[0].abs().sqrt().max(norm(&x[1..])),
            WeightDomain::Space => norm(x),
            WeightDomain::Time => x[0].abs(),
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match &self.form {
            WeightForm::Power { gamma } => {
                if *gamma == 0.0 { 1.0 } else { self.rho(x).powf(*gamma) }
            }
            WeightForm::Tensor { nu, omega } => nu.value(&x[..1]) * omega.value(&x[1..]),
            WeightForm::Sampled { axes, values } => values[sampled_index(axes, x)],
        }
    }

    /// Value at a grid node; power weights singular at the node use the
    /// average over the ball of radius half the cell.
    pub fn node_value(&self, x: &[f64], half_cell: f64) -> f64 {
        match &self.form {
            WeightForm::Power { gamma } if *gamma < 0.0 && self.rho(x) < half_cell => {
                let r = match self.domain {
                    WeightDomain::Spacetime => half_cell.sqrt().min(half_cell),
                    _ => half_cell,
                };
                self.ball_average(1.0, &Ball { center: x.to_vec(), radius: r }).unwrap_or(f64::INFINITY)
            }
            WeightForm::Tensor { nu, omega } => nu.node_value(&x[..1], half_cell) * omega.node_value(&x[1..], half_cell),
            _ => self.value(x),
        }
    }

    /// Average of `w^e` over the ball.
    pub fn ball_average(&self, e: f64, ball: &Ball) -> Result<f64> {
        match &self.form {
            WeightForm::Power { gamma } => self.power_average(gamma * e, ball),
            WeightForm::Tensor { nu, omega } => {
                let (tb, sb) = split_ball(ball);
                Ok(nu.ball_average(e, &tb)? * omega.ball_average(e, &sb)?)
            }
            WeightForm::Sampled { axes, values } => {
                let mut sum = 0.0;
                let mut count = 0usize;
                self.sampled_nodes(axes, ball, |i| {
                    sum += values[i].powf(e);
                    count += 1;
                });
                if count == 0 {
                    return Ok(values[sampled_index(axes, &ball.center)].powf(e));
                }
                Ok(sum / count as f64)
            }
        }
    }

    /// Essential infimum surrogate over the ball.
    pub fn ball_inf(&self, ball: &Ball) -> f64 {
        match &self.form {
            WeightForm::Power { gamma } => {
                let (lo, hi) = self.rho_range(ball);
                if *gamma >= 0.0 { lo.powf(*gamma) } else { hi.powf(*gamma) }
            }
            WeightForm::Tensor { nu, omega } => {
                let (tb, sb) = split_ball(ball);
                nu.ball_inf(&tb) * omega.ball_inf(&sb)
            }
            WeightForm::Sampled { axes, values } => {
                let mut m = f64::INFINITY;
                self.sampled_nodes(axes, ball, |i| m = m.min(values[i]));
                if m.is_infinite() { values[sampled_index(axes, &ball.center)] } else { m }
            }
        }
    }

    /// `min` and `max` of the distance to the origin over the ball.
    fn rho_range(&self, ball: &Ball) -> (f64, f64) {
        let r = ball.radius;
        let c = &ball.center;
        let interval = |c: f64, r: f64| -> (f64, f64) {
            let lo = if c.abs() <= r { 0.0 } else { c.abs() - r };
            (lo, c.abs() + r)
        };
        match self.domain {
            WeightDomain::Time => interval(c[0], r),
            WeightDomain::Space => interval(norm(c), r),
            WeightDomain::Spacetime => {
                let (tl, th) = interval(c[0], r * r);
                let (xl, xh) = interval(norm(&c[1..]), r);
                (tl.sqrt().max(xl), th.sqrt().max(xh))
            }
        }
    }

    /// `|B|` in the domain.
    fn ball_volume(&self, r: f64) -> f64 {
        match self.domain {
            WeightDomain::Time => 2.0 * r,
            WeightDomain::Space => unit_ball_volume(self.dim) * r.powi(self.dim as i32),
            WeightDomain::Spacetime => 2.0 * r * r * unit_ball_volume(self.dim) * r.powi(self.dim as i32),
        }
    }

    /// `|B ∩ {ρ < s}|`.
    fn level_measure(&self, ball: &Ball, s: f64) -> f64 {
        let r = ball.radius;
        let c = &ball.center;
        match self.domain {
            WeightDomain::Time => interval_overlap(c[0], r, s),
            WeightDomain::Space => lens(self.dim, norm(c), r, s),
            WeightDomain::Spacetime => interval_overlap(c[0], r * r, s * s) * lens(self.dim, norm(&c[1..]), r, s),
        }
    }

    /// Average of `ρ^g` by the layer-cake formula in `u = ln s`:
    /// `∫_B ρ^g = ∫ |g| e^{gu} |B ∩ {ρ<e^u}| du` for `g < 0` and
    /// `∫ g e^{gu} (|B| − |B ∩ {ρ<e^u}|) du` for `g > 0`. Below `s_lo` the
    /// level measure is `c·s^d` and is integrated in closed form.
    fn power_average(&self, g: f64, ball: &Ball) -> Result<f64> {
        if g == 0.0 {
            return Ok(1.0);
        }
        let vol = self.ball_volume(ball.radius);
        let (lo, hi) = self.rho_range(ball);
        if lo > 0.0
            && g < 0.0 && lo.powf(g) == 0.0 {
                return Err(Error::NonIntegrableWeight(format!("ρ^{g} underflows")));
            }
        let d = self.homogeneous_dim();
        let s_hi = hi * (1.0 + 1e-12);
        let s_lo = if lo > 0.0 { lo } else { 1e-6 * ball.radius.min(hi) };
        let scale = if g < 0.0 { -g } else { g };
        let integrand = |u: f64| {
            let s = u.exp();
            let m = self.level_measure(ball, s);
            let part = if g < 0.0 { m } else { vol - m };
            scale * (g * u).exp() * part
        };
        let (a, b) = (s_lo.ln(), s_hi.ln());
        let mut kinks: Vec<f64> = vec![a, b];
        for k in self.kinks(ball) {
            if k > s_lo && k < s_hi {
                kinks.push(k.ln());
            }
        }
        kinks.sort_by(|x, y| x.total_cmp(y));
        let peak = if g < 0.0 { vol * s_lo.powf(g) } else { vol * s_hi.powf(g) };
        let tol = 1e-11 * peak.max(1e-300);
        let mut total = 0.0;
        for w in kinks.windows(2) {
            total += quadrature::adaptive(integrand, w[0], w[1], tol)?;
        }
        let m_lo = self.level_measure(ball, s_lo);
        if g > 0.0 {
            let c = m_lo / s_lo.powf(d);
            total += vol * s_lo.powf(g) - g * c * s_lo.powf(g + d) / (g + d);
            return Ok(total / vol);
        }
        total += vol * s_hi.powf(g);
        if m_lo > 0.0 {
            if g + d <= 0.0 {
                return Err(Error::NonIntegrableWeight(format!(
                    "ρ^{g} is not integrable near the origin in homogeneous dimension {d}"
                )));
            }
            let c = m_lo / s_lo.powf(d);
            total += -g * c * s_lo.powf(g + d) / (g + d);
        }
        let avg = total / vol;
        if !avg.is_finite() {
            return Err(Error::NonIntegrableWeight(format!("average of ρ^{g} overflows")));
        }
        Ok(avg)
    }

    /// Radii where the level measure changes form.
    fn kinks(&self, ball: &Ball) -> Vec<f64> {
        let r = ball.radius;
        let c = &ball.center;
        match self.domain {
            WeightDomain::Time => vec![(c[0].abs() - r).abs(), c[0].abs() + r],
            WeightDomain::Space => {
                let d = norm(c);
                vec![(d - r).abs(), d + r]
            }
            WeightDomain::Spacetime => {
                let d = norm(&c[1..]);
                vec![
                    (c[0].abs() - r * r).abs().sqrt(),
                    (c[0].abs() + r * r).sqrt(),
                    (d - r).abs(),
                    d + r,
                ]
            }
        }
    }

    fn sampled_nodes<F: FnMut(usize)>(&self, axes: &[Axis], ball: &Ball, mut visit: F) {
        let total: usize = axes.iter().map(|a| a.count).product();
        for i in 0..total {
            let mut rem = i;
            let mut x = vec![0.0; axes.len()];
            for d in (0..axes.len()).rev() {
                x[d] = axes[d].node(rem % axes[d].count);
                rem /= axes[d].count;
            }
            if self.in_ball(&x, ball) {
                visit(i);
            }
        }
    }

    fn in_ball(&self, x: &[f64], ball: &Ball) -> bool {
        let r = ball.radius;
        let c = &ball.center;
        match self.domain {
            WeightDomain::Time => (x[0] - c[0]).abs() <= r,
            WeightDomain::Space => dist(x, c) <= r,
            WeightDomain::Spacetime => (x[0] - c[0]).abs() <= r * r && dist(&x[1..], &c[1..]) <= r,
        }
    }
}

fn sampled_index(axes: &[Axis], x: &[f64]) -> usize {
    axes.iter().zip(x).fold(0, |acc, (a, &v)| {
        let i = ((v - a.lo) / a.step).round().clamp(0.0, (a.count - 1) as f64) as usize;
        acc * a.count + i
    })
}

fn split_ball(ball: &Ball) -> (Ball, Ball) {
    let r = ball.radius;
    (
        Ball { center: vec![ball.center[0]], radius: r * r },
        Ball { center: ball.center[1..].to_vec(), radius: r },
    )
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

/// `ω_n = |{|y| ≤ 1}|`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// `|[c−r, c+r] ∩ [−s, s]|`.
fn interval_overlap(c: f64, r: f64, s: f64) -> f64 {
    ((c + r).min(s) - (c - r).max(-s)).max(0.0)
}

/// `|B(c, r) ∩ B(0, s)|` in `ℝⁿ` with `d = |c|`.
fn lens(n: usize, d: f64, r: f64, s: f64) -> f64 {
    if n == 1 {
        return interval_overlap(d, r, s);
    }
    if d >= r + s {
        return 0.0;
    }
    if d <= (r - s).abs() {
        return unit_ball_volume(n) * r.min(s).powi(n as i32);
    }
    match n {
        2 => {
            let a1 = ((d * d + r * r - s * s) / (2.0 * d * r)).clamp(-1.0, 1.0).acos();
            let a2 = ((d * d + s * s - r * r) / (2.0 * d * s)).clamp(-1.0, 1.0).acos();
            let k = ((-d + r + s) * (d + r - s) * (d - r + s) * (d + r + s)).max(0.0).sqrt();
            r * r * a1 + s * s * a2 - 0.5 * k
        }
        3 => PI * (r + s - d).powi(2) * (d * d + 2.0 * d * s - 3.0 * s * s + 2.0 * d * r + 6.0 * s * r - 3.0 * r * r) / (12.0 * d),
        _ => f64::NAN,
    }
}

/// Balls centred on a lattice of the window with dyadic radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSampler {
    /// Lower corner of the window in domain coordinates.
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Centres per coordinate; odd counts on symmetric windows include the origin.
    pub centers_per_axis: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub max_balls: usize,
    pub seed: u64,
}

impl BallSampler {
    /// Window `[−half, half]` per coordinate, radii `r_min·2^k ≤ half/2`.
    pub fn symmetric(coords: usize, half: f64, centers_per_axis: usize, r_min: f64, seed: u64) -> Self {
        Self {
            lo: vec![-half; coords],
            hi: vec![half; coords],
            centers_per_axis,
            r_min,
            r_max: 0.5 * half,
            max_balls: 10_000,
            seed,
        }
    }

    /// Same window and radii with twice the centre resolution.
    pub fn doubled(&self) -> Self {
        Self { centers_per_axis: 2 * self.centers_per_axis - 1, max_balls: 2 * self.max_balls, ..self.clone() }
    }

    pub fn balls(&self) -> Result<Vec<Ball>> {
        if self.lo.len() != self.hi.len() || self.lo.is_empty() {
            return Err(Error::InvalidArgument("sampler window needs matching bounds".into()));
        }
        if !(self.r_min > 0.0) || self.r_max < self.r_min || self.centers_per_axis == 0 {
            return Err(Error::InvalidArgument("sampler radii or centre count invalid".into()));
        }
        let m = self.centers_per_axis;
        let axes: Vec<Vec<f64>> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(&a, &b)| {
                if m == 1 {
                    vec![0.5 * (a + b)]
                } else {
                    (0..m).map(|i| a + (b - a) * i as f64 / (m - 1) as f64).collect()
                }
            })
            .collect();
        let mut radii = Vec::new();
        let mut r = self.r_min;
        while r <= self.r_max * (1.0 + 1e-12) {
            radii.push(r);
            r *= 2.0;
        }
        let dims = axes.len();
        let total_centers = m.pow(dims as u32);
        let mut balls = Vec::with_capacity(total_centers * radii.len());
        for c in 0..total_centers {
            let mut rem = c;
            let mut center = vec![0.0; dims];
            for d in (0..dims).rev() {
                center[d] = axes[d][rem % m];
                rem /= m;
            }
            for &r in &radii {
                balls.push(Ball { center: center.clone(), radius: r });
            }
        }
        if balls.len() > self.max_balls {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            balls.shuffle(&mut rng);
            balls.truncate(self.max_balls);
        }
        Ok(balls)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuckenhouptReport {
    pub constant: f64,
    pub balls: usize,
    pub worst: Ball,
}

/// `sup_B (⨍w)(⨍w^{1/(1−p)})^{p−1}`, or `sup_B ⨍w / inf_B w` for `p = 1`.
pub fn muckenhoupt_constant(w: &WeightSpec, p: f64, sampler: &BallSampler) -> Result<MuckenhouptReport> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("A_p needs p ≥ 1, got {p}")));
    }
    w.validate()?;
    let balls = sampler.balls()?;
    let values: Vec<Result<f64>> = balls
        .par_iter()
        .map(|ball| {
            let avg = w.ball_average(1.0, ball)?;
            let v = if p == 1.0 {
                let inf = w.ball_inf(ball);
                if !(inf > 0.0) {
                    return Err(Error::NonIntegrableWeight("weight vanishes on a sampled ball".into()));
                }
                avg / inf
            } else {
                avg * w.ball_average(1.0 / (1.0 - p), ball)?.powf(p - 1.0)
            };
            if !v.is_finite() {
                return Err(Error::NonIntegrableWeight("ball product overflows".into()));
            }
            Ok(v)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(MuckenhouptReport { constant: best.0, balls: balls.len(), worst: balls[best.1].clone() })
}

/// `sup_B (⨍(w⁻¹)^r)^{1/r} / inf_B w⁻¹` after checking `w⁻¹ ∈ A₁`.
pub fn reverse_holder_probe(w: &WeightSpec, r: f64, sampler: &BallSampler) -> Result<f64> {
    if !(r > 1.0) {
        return Err(Error::InvalidArgument(format!("reverse Hölder exponent must exceed 1, got {r}")));
    }
    let inv = w.reciprocal();
    muckenhoupt_constant(&inv, 1.0, sampler)?;
    let balls = sampler.balls()?;
    let mut best = 0.0f64;
    for ball in &balls {
        let v = inv.ball_average(r, ball)?.powf(1.0 / r) / inv.ball_inf(ball);
        if !v.is_finite() {
            return Err(Error::NonIntegrableWeight("reverse Hölder average overflows".into()));
        }
        best = best.max(v);
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolderBracket {
    /// Largest probed exponent with a finite probe.
    pub finite: f64,
    /// Smallest probed exponent where the probe diverges.
    pub divergent: f64,
    pub log: Vec<(f64, Option<f64>)>,
}

/// Bisection on `r ∈ (1, r_max]` between finite and divergent probes.
pub fn reverse_holder_bracket(w: &WeightSpec, sampler: &BallSampler, r_max: f64, steps: usize) -> Result<ReverseHolderBracket> {
    let mut log = Vec::new();
    let probe = |r: f64, log: &mut Vec<(f64, Option<f64>)>| -> Result<Option<f64>> {
        match reverse_holder_probe(w, r, sampler) {
            Ok(v) => {
                log.push((r, Some(v)));
                Ok(Some(v))
            }
            Err(Error::NonIntegrableWeight(_)) => {
                log.push((r, None));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    let mut lo = 1.0 + 1e-3;
    if probe(lo, &mut log)?.is_none() {
        return Err(Error::NonIntegrableWeight("reverse Hölder fails just above r = 1".into()));
    }
    let mut hi = r_max;
    if probe(hi, &mut log)?.is_some() {
        return Ok(ReverseHolderBracket { finite: hi, divergent: f64::INFINITY, log });
    }
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut log)?.is_some() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(ReverseHolderBracket { finite: lo, divergent: hi, log })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedNormSpec {
    pub q: f64,
    pub p: f64,
    pub nu: WeightSpec,
    pub omega: WeightSpec,
    /// Hölder exponent replacing the inner Lebesgue norm.
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl MixedNormSpec {
    pub fn unweighted(dim: usize, q: f64, p: f64) -> Self {
        Self { q, p, nu: WeightSpec::unit(WeightDomain::Time, dim), omega: WeightSpec::unit(WeightDomain::Space, dim), alpha: None }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, e) in [("q", self.q), ("p", self.p)] {
            if !(e >= 1.0) {
                return Err(Error::InvalidArgument(format!("{name} must lie in [1, ∞], got {e}")));
            }
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0,1), got {a}")));
            }
        }
        if self.nu.domain != WeightDomain::Time || self.omega.domain != WeightDomain::Space {
            return Err(Error::InvalidArgument("mixed norms take a time weight and a space weight".into()));
        }
        self.nu.validate()?;
        self.omega.validate()
    }
}

/// Per-node weights of a spatial lattice.
fn space_weights(f: &SampledField, omega: &WeightSpec) -> Vec<f64> {
    space_weight_values(&f.grid.space, omega)
}

/// Node values of a space weight, singular nodes replaced by half-cell averages.
pub fn space_weight_values(lattice: &Lattice, omega: &WeightSpec) -> Vec<f64> {
    let half = 0.5 * lattice.max_step();
    (0..lattice.len()).map(|q| omega.node_value(&lattice.coords(q), half)).collect()
}

/// Node values of a time weight.
pub fn time_weight_values(axis: &Axis, nu: &WeightSpec) -> Vec<f64> {
    let half = 0.5 * axis.step;
    (0..axis.count).map(|k| nu.node_value(&[axis.node(k)], half)).collect()
}

/// Node values of a space-time weight in `(time, space)` order.
pub fn spacetime_weight_values(grid: &GridSpec, w: &WeightSpec) -> Result<Vec<f64>> {
    if w.domain != WeightDomain::Spacetime {
        return Err(Error::InvalidArgument("expected a space-time weight".into()));
    }
    if w.dim != grid.dim() {
        return Err(Error::DimensionMismatch { expected: grid.dim(), found: w.dim });
    }
    let half = 0.5 * grid.h_x().min(grid.h_t());
    let m = grid.space.len();
    let mut out = Vec::with_capacity(grid.len());
    let mut x = vec![0.0; grid.dim() + 1];
    for k in 0..grid.time.count {
        x[0] = grid.time.node(k);
        for q in 0..m {
            x[1..].copy_from_slice(&grid.space.coords(q));
            out.push(w.node_value(&x, half));
        }
    }
    Ok(out)
}

/// `(Σ |f|^p w h_t hⁿ)^{1/p}`; for `p = ∞` the weighted sup `max |f| w`.
pub fn weighted_lp_norm(f: &SampledField, w: &WeightSpec, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("p must lie in [1, ∞], got {p}")));
    }
    w.validate()?;
    let weights = spacetime_weight_values(&f.grid, w)?;
    if p.is_infinite() {
        return Ok(f.values.iter().zip(&weights).fold(0.0, |m, (v, w)| m.max(v.abs() * w)));
    }
    Ok(weighted_lp(&f.values, &weights, p, f.grid.space_time_volume()))
}

fn weighted_lp(values: &[f64], weights: &[f64], p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    (values.iter().zip(weights).map(|(v, w)| v.abs().powf(p) * w).sum::<f64>() * cell).powf(1.0 / p)
}

/// `‖f‖_{L^q(ν; L^p(ω))}`, or `‖[f(t,·)]_{C^α}‖_{L^q(ν)}`.
pub fn mixed_norm(f: &SampledField, spec: &MixedNormSpec) -> Result<f64> {
    spec.validate()?;
    let grid = &f.grid;
    let omega = space_weights(f, &spec.omega);
    let cell = grid.space.cell_volume();
    let inner: Vec<f64> = (0..grid.time.count)
        .into_par_iter()
        .map(|k| match spec.alpha {
            Some(a) => holder_seminorm(&f.spatial(k), a),
            None => Ok(weighted_lp(f.slice(k), &omega, spec.p, cell)),
        })
        .collect::<Result<_>>()?;
    let half = 0.5 * grid.h_t();
    let nu: Vec<f64> = (0..grid.time.count).map(|k| spec.nu.node_value(&[grid.time.node(k)], half)).collect();
    Ok(weighted_lp(&inner, &nu, spec.q, grid.h_t()))
}

/// Pair budget of [`holder_seminorm`].
pub const HOLDER_PAIRS: usize = 1_000_000;

pub fn holder_seminorm(phi: &SpatialField, alpha: f64) -> Result<f64> {
    holder_seminorm_with(phi, alpha, 0, HOLDER_PAIRS)
}

/// `max |φ(x)−φ(y)|/|x−y|^α` over all node pairs when there are at most
/// `budget`, otherwise over all pairs at offsets `‖·‖_∞ ≤ 2` plus a sample
/// stratified by dyadic distance.
pub fn holder_seminorm_with(phi: &SpatialField, alpha: f64, seed: u64, budget: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("Hölder exponent must lie in (0,1), got {alpha}")));
    }
    let lat = &phi.lattice;
    let m = lat.len();
    let v = &phi.values;
    let quotient = |i: usize, j: usize| {
        let d = dist(&lat.coords(i), &lat.coords(j));
        (v[i] - v[j]).abs() / d.powf(alpha)
    };
    if m * (m.saturating_sub(1)) / 2 <= budget {
        let best = (0..m)
            .into_par_iter()
            .map(|i| (i + 1..m).map(|j| quotient(i, j)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        return Ok(best);
    }
    let n = lat.dim();
    let shape = lat.shape();
    let mut best = 0.0f64;
    let near: Vec<Vec<isize>> = {
        let mut out = Vec::new();
        let count = 5usize.pow(n as u32);
        for c in 0..count {
            let mut rem = c;
            let o: Vec<isize> = (0..n)
                .map(|_| {
                    let d = (rem % 5) as isize - 2;
                    rem /= 5;
                    d
                })
                .collect();
            if o.iter().any(|&d| d != 0) {
                out.push(o);
            }
        }
        out
    };
    let shift = |i: usize, o: &[isize]| -> Option<usize> {
        let idx = lat.multi_index(i);
        let mut moved = Vec::with_capacity(n);
        for d in 0..n {
            let k = idx[d] as isize + o[d];
            if k < 0 || k as usize >= shape[d] {
                return None;
            }
            moved.push(k as usize);
        }
        Some(lat.flat(&moved))
    };
    for i in 0..m {
        for o in &near {
            if let Some(j) = shift(i, o) {
                best = best.max(quotient(i, j));
            }
        }
    }
    let max_cells = *shape.iter().max().unwrap_or(&1) as f64;
    let shells = (max_cells.log2().ceil() as usize).max(1);
    let per_shell = (budget / shells).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..shells {
        let (r0, r1) = (2f64.powi(k as i32), 2f64.powi(k as i32 + 1));
        for _ in 0..per_shell {
            let i = rng.random_range(0..m);
            let radius = rng.random_range(r0..r1);
            let dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = norm(&dir).max(1e-12);
            let o: Vec<isize> = dir.iter().map(|d| (d / len * radius).round() as isize).collect();
            if o.iter().all(|&d| d == 0) {
                continue;
            }
            if let Some(j) = shift(i, &o) {
                best = best.max(quotient(i, j));
            }
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InnerNorm {
    /// Pointwise absolute value on parabolic balls.
    Abs,
    /// `L^p(ω)` norm of time slices on time intervals.
    LpOmega { p: f64, omega: WeightSpec },
    /// Hölder seminorm of time slices on time intervals.
    Calpha { alpha: f64 },
}

/// Pair budget for Hölder seminorms inside sharp maximal functions.
const SHARP_HOLDER_PAIRS: usize = 20_000;

fn slice_norm(f: &SampledField, values: &[f64], inner: &InnerNorm, omega: &[f64]) -> Result<f64> {
    match inner {
        InnerNorm::Abs => Ok(values.iter().fold(0.0, |m, v| m.max(v.abs()))),
        InnerNorm::LpOmega { p, .. } => Ok(weighted_lp(values, omega, *p, f.grid.space.cell_volume())),
        InnerNorm::Calpha { alpha } => {
            let phi = SpatialField { lattice: f.grid.space.clone(), values: values.to_vec() };
            holder_seminorm_with(&phi, *alpha, 0, SHARP_HOLDER_PAIRS)
        }
    }
}

fn inner_weights(f: &SampledField, inner: &InnerNorm) -> Vec<f64> {
    match inner {
        InnerNorm::LpOmega { omega, .. } => space_weights(f, omega),
        _ => vec![1.0; f.grid.space.len()],
    }
}

/// `sup_{B ∋ point} ⨍_B ‖g − g_B‖_F`. For `Abs` the balls are parabolic
/// balls with centres at offsets `{−½, 0, ½}·(r², r, …)` from the point;
/// otherwise they are time intervals `[t−r², t+r²]` shifted likewise, and
/// `g_B` is the mean slice.
pub fn sharp_maximal(g: &SampledField, point: &[f64], inner: &InnerNorm, radii: &[f64]) -> Result<f64> {
    check_point(g, point)?;
    let m = g.grid.space.len();
    let mut best = 0.0f64;
    match inner {
        InnerNorm::Abs => {
            let dims = point.len();
            for &r in radii {
                check_radius(g, r)?;
                for c in 0..3usize.pow(dims as u32) {
                    let mut rem = c;
                    let center: Vec<f64> = (0..dims)
                        .map(|d| {
                            let o = (rem % 3) as f64 - 1.0;
                            rem /= 3;
                            point[d] + 0.5 * o * if d == 0 { r * r } else { r }
                        })
                        .collect();
                    let mut nodes = Vec::new();
                    ball_nodes(g, &center, r, |k, q| nodes.push(g.values[k * m + q]));
                    if nodes.is_empty() {
                        continue;
                    }
                    let mean = nodes.iter().sum::<f64>() / nodes.len() as f64;
                    let osc = nodes.iter().map(|v| (v - mean).abs()).sum::<f64>() / nodes.len() as f64;
                    best = best.max(osc);
                }
            }
        }
        _ => {
            let omega = inner_weights(g, inner);
            let axis = &g.grid.time;
            for &r in radii {
                check_radius(g, r)?;
                for o in [-0.5, 0.0, 0.5] {
                    let c = point[0] + o * r * r;
                    let (a, b) = index_range(axis, c - r * r, c + r * r);
                    let ks: Vec<usize> = (a.max(0)..=b.min(axis.count as isize - 1)).map(|k| k as usize).collect();
                    if ks.is_empty() {
                        continue;
                    }
                    let mut mean = vec![0.0; m];
                    for &k in &ks {
                        for (s, v) in mean.iter_mut().zip(g.slice(k)) {
                            *s += v / ks.len() as f64;
                        }
                    }
                    let mut total = 0.0;
                    for &k in &ks {
                        let diff: Vec<f64> = g.slice(k).iter().zip(&mean).map(|(v, s)| v - s).collect();
                        total += slice_norm(g, &diff, inner, &omega)?;
                    }
                    best = best.max(total / ks.len() as f64);
                }
            }
        }
    }
    Ok(best)
}

/// Weighted measure of `{|g| > λ}` (space-time weight, `Abs`) or of
/// `{t : ‖g(t,·)‖_F > λ}` (time weight, slice norms).
pub fn distribution_weighted(g: &SampledField, lambda: f64, w: &WeightSpec, level: &InnerNorm) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("level must be positive, got {lambda}")));
    }
    w.validate()?;
    let grid = &g.grid;
    let m = grid.space.len();
    match level {
        InnerNorm::Abs => {
            if w.domain != WeightDomain::Spacetime {
                return Err(Error::InvalidArgument("pointwise levels take a space-time weight".into()));
            }
            let half = 0.5 * grid.h_x().min(grid.h_t());
            let vol = grid.space_time_volume();
            let mut total = 0.0;
            for k in 0..grid.time.count {
                let t = grid.time.node(k);
                for q in 0..m {
                    if g.values[k * m + q].abs() > lambda {
                        let mut x = vec![t];
                        x.extend(grid.space.coords(q));
                        total += w.node_value(&x, half) * vol;
                    }
                }
            }
            Ok(total)
        }
        _ => {
            if w.domain != WeightDomain::Time {
                return Err(Error::InvalidArgument("slice levels take a time weight".into()));
            }
            let omega = inner_weights(g, level);
            let half = 0.5 * grid.h_t();
            let mut total = 0.0;
            for k in 0..grid.time.count {
                if slice_norm(g, g.slice(k), level, &omega)? > lambda {
                    total += w.node_value(&[grid.time.node(k)], half) * grid.h_t();
                }
            }
            Ok(total)
        }
    }
}

/// `count` logarithmically spaced levels from `top·10⁻³` to `top`.
pub fn lambda_levels(top: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![top];
    }
    (0..count).map(|i| top * 10f64.powf(-3.0 + 3.0 * i as f64 / (count - 1) as f64)).collect()
}

/// `(λ, w-measure of the super-level set)` over the level grid.
pub fn weak_type_profile(g: &SampledField, w: &WeightSpec, level: &InnerNorm, top: f64, count: usize) -> Result<Vec<(f64, f64)>> {
    lambda_levels(top, count)
        .into_iter()
        .map(|l| Ok((l, distribution_weighted(g, l, w, level)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, nt: usize, nx: usize) -> GridSpec {
        GridSpec::new(Axis::cells(-1.0, 1.0, nt), Lattice::cube(n, -1.0, 1.0, nx), 0).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(parabolic_distance(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(parabolic_distance(&[1.0, 0.0], &[0.0, 0.0]).unwrap(), 1.0);
        assert!((parabolic_distance(&[0.04, 0.3], &[0.0, 0.0]).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(parabolic_distance(&[0.0], &[0.0, 1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn maximal_of_constant_is_one() {
        let f = SampledField::from_fn(grid(1, 64, 64), |_, _| 1.0);
        let m = parabolic_maximal(&f, &[0.0, 0.0], &[0.1, 0.2, 0.4]).unwrap();
        assert!((m - 1.0).abs() < 1e-12);
        assert!(matches!(parabolic_maximal(&f, &[0.0, 0.0], &[0.01]), Err(Error::RadiusBelowGrid { .. })));
    }

    #[test]
    fn power_average_matches_closed_form() {
        // ⨍_{[0,2]} |t|^γ = 2^γ/(γ+1)
        let w = WeightSpec::power(WeightDomain::Time, 1, -0.5);
        let avg = w.ball_average(1.0, &Ball { center: vec![1.0], radius: 1.0 }).unwrap();
        assert!((avg - 2f64.powf(-0.5) / 0.5).abs() < 1e-9, "{avg}");
        let w = WeightSpec::power(WeightDomain::Space, 2, 0.7);
        // ⨍_{|x|≤1} |x|^γ = 2/(γ+2)
        let avg = w.ball_average(1.0, &Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        assert!((avg - 2.0 / 2.7).abs() < 1e-9, "{avg}");
        let w = WeightSpec::power(WeightDomain::Space, 2, -1.5);
        let avg = w.ball_average(1.0, &Ball { center: vec![0.0, 0.0], radius: 1.0 }).unwrap();
        assert!((avg - 2.0 / 0.5).abs() < 1e-8, "{avg}");
        let w = WeightSpec::power(WeightDomain::Space, 1, -1.0);
        assert!(matches!(
            w.ball_average(1.0, &Ball { center: vec![0.2], radius: 1.0 }),
            Err(Error::NonIntegrableWeight(_))
        ));
    }

    #[test]
    fn power_average_off_center_matches_dense_sum() {
        let w = WeightSpec::power(WeightDomain::Spacetime, 1, -1.3);
        let ball = Ball { center: vec![0.1, 0.3], radius: 0.5 };
        let exact = w.ball_average(1.0, &ball).unwrap();
        let m = 800;
        let mut sum = 0.0;
        let mut count = 0;
        for i in 0..m {
            for j in 0..m {
                let t = ball.center[0] - 0.25 + 0.5 * (i as f64 + 0.5) / m as f64;
                let x = ball.center[1] - 0.5 + (j as f64 + 0.5) / m as f64;
                sum += w.value(&[t, x]);
                count += 1;
            }
        }
        let dense = sum / count as f64;
        assert!(((exact - dense) / exact).abs() < 1e-2, "{exact} vs {dense}");
    }

    #[test]
    fn trivial_weight_constants() {
        let w = WeightSpec::unit(WeightDomain::Spacetime, 1);
        let s = BallSampler::symmetric(2, 1.0, 5, 0.05, 0);
        for p in [1.0, 2.0, 3.5] {
            assert!((muckenhoupt_constant(&w, p, &s).unwrap().constant - 1.0).abs() < 1e-12);
        }
        assert!((reverse_holder_probe(&w, 2.0, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reverse_holder_brackets_critical_exponent() {
        // w⁻¹ = |x|^{−1/2}: (w⁻¹)^r integrable iff r < 2
        let w = WeightSpec::power(WeightDomain::Space, 1, 0.5);
        let s = BallSampler::symmetric(1, 1.0, 9, 0.05, 0);
        let b = reverse_holder_bracket(&w, &s, 4.0, 20).unwrap();
        assert!(b.finite < 2.0 && b.divergent >= 2.0 && b.divergent - b.finite < 1e-4, "{b:?}");
    }

    #[test]
    fn mixed_norm_box_and_plain() {
        let g = GridSpec::new(Axis::cells(0.0, 1.0, 16), Lattice::cube(1, 0.0, 1.0, 16), 0).unwrap();
        let f = SampledField::from_fn(g, |_, _| 1.0);
        assert!((mixed_norm(&f, &MixedNormSpec::unweighted(1, 1.0, 1.0)).unwrap() - 1.0).abs() < 1e-12);
        let f = SampledField::from_fn(grid(2, 12, 16), |t, x| (t + x[0] * x[1]).sin());
        let plain = f.lp_norm(3.0);
        let mixed = mixed_norm(&f, &MixedNormSpec::unweighted(2, 3.0, 3.0)).unwrap();
        assert!((plain - mixed).abs() < 1e-12 * plain);
    }

    #[test]
    fn holder_examples() {
        let lat = Lattice::new(vec![Axis::closed(-1.0, 1.0, 201)]);
        let c = SpatialField::from_fn(lat.clone(), |_| 3.0);
        assert_eq!(holder_seminorm(&c, 0.5).unwrap(), 0.0);
        let phi = SpatialField::from_fn(lat, |x| x[0].abs().sqrt());
        let s = holder_seminorm(&phi, 0.5).unwrap();
        assert!((1.0 - 1e-9..1.5).contains(&s), "{s}");
        let lat = Lattice::cube(2, -1.0, 1.0, 64);
        let lin = SpatialField::from_fn(lat, |x| x[0]);
        let s = holder_seminorm_with(&lin, 0.5, 1, 50_000).unwrap();
        let diam: f64 = 2.0 * 63.0 / 64.0;
        assert!(s <= diam.sqrt() + 1e-12 && s > 0.5 * diam.sqrt());
    }

    #[test]
    fn sharp_maximal_examples() {
        let f = SampledField::from_fn(grid(1, 64, 64), |_, _| 2.0);
        assert_eq!(sharp_maximal(&f, &[0.0, 0.0], &InnerNorm::Abs, &[0.1, 0.3]).unwrap(), 0.0);
        let g = GridSpec::new(Axis::cells(-1.0, 1.0, 64), Lattice::cube(1, -1.0, 1.0, 32), 0).unwrap();
        let g = GridSpec::new(Axis { lo: -1.0 + 1.0 / 128.0, ..g.time }, g.space, 0).unwrap();
        let f = SampledField::from_fn(g, |t, _| t.signum());
        let v = sharp_maximal(&f, &[0.0, 0.0], &InnerNorm::Abs, &[0.25, 0.5]).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn distribution_examples() {
        let f = SampledField::from_fn(grid(1, 32, 32), |_, x| if x[0].abs() < 0.5 { 2.0 } else { 0.0 });
        let w = WeightSpec::unit(WeightDomain::Spacetime, 1);
        let m = distribution_weighted(&f, 1.0, &w, &InnerNorm::Abs).unwrap();
        // 15 spatial nodes in |x| < 1/2, 32 time nodes
        assert!((m - 2.0 * 15.0 / 16.0).abs() < 1e-12, "{m}");
        let z = SampledField::zeros(grid(1, 8, 8));
        assert_eq!(distribution_weighted(&z, 0.5, &w, &InnerNorm::Abs).unwrap(), 0.0);
    }
}
