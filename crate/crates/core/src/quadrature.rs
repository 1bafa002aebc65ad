//! Gaussian quadrature rules and an adaptive Gauss–Legendre integrator.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// A rule on a reference interval: `∫ f ≈ Σ wᵢ f(xᵢ)`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Maps a rule on `[-1, 1]` to `[a, b]` and integrates `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights of the rule mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, w * half))
    }
}

/// Gauss–Legendre rule with `n` nodes on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n > 0, "rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Rule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Hermite rule for the weight `e^{-x²}` on ℝ.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n > 0, "rule needs at least one node");
    let pim4 = PI.powf(-0.25);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[0],
            3 => 1.91 * z - 0.91 * nodes[1],
            _ => 2.0 * z - nodes[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        nodes[i] = z;
        nodes[n - 1 - i] = -z;
        weights[i] = 2.0 / (pp * pp);
        weights[n - 1 - i] = weights[i];
    }
    nodes.reverse();
    weights.reverse();
    Rule { nodes, weights }
}

/// Composite Gauss–Legendre nodes on `[a, b]` split into `panels` equal panels.
pub fn composite_gauss_legendre(rule: &Rule, a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(panels * rule.len());
    let w = (b - a) / panels as f64;
    for k in 0..panels {
        let lo = a + k as f64 * w;
        out.extend(rule.mapped(lo, lo + w));
    }
    out
}

const ADAPTIVE_ORDER: usize = 15;
const MAX_DEPTH: u32 = 40;

/// Adaptive Gauss–Legendre integration of a vector-valued integrand.
///
/// `f(x, out)` writes the integrand at `x` into `out`. Panels are bisected
/// until the panel estimate and the sum of its halves agree to `abs_tol`
/// scaled by the panel's share of the interval.
pub fn adaptive_vec<F>(mut f: F, dim: usize, a: f64, b: f64, abs_tol: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let rule = gauss_legendre(ADAPTIVE_ORDER);
    let mut total = vec![0.0; dim];
    if a == b {
        return Ok(total);
    }
    let mut scratch = vec![0.0; dim];
    let mut panel = |lo: f64, hi: f64, f: &mut F| {
        let mut acc = vec![0.0; dim];
        for (x, w) in rule.mapped(lo, hi) {
            f(x, &mut scratch);
            for (s, v) in acc.iter_mut().zip(&scratch) {
                *s += w * v;
            }
        }
        acc
    };
    let len = (b - a).abs();
    let mut stack = vec![(a, b, panel(a, b, &mut f), 0u32)];
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(lo, mid, &mut f);
        let right = panel(mid, hi, &mut f);
        let err = whole
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(w, (l, r))| (w - l - r).abs())
            .fold(0.0, f64::max);
        let share = abs_tol * (hi - lo).abs() / len;
        let negligible = (hi - lo).abs() <= 1e-12 * len && err <= abs_tol;
        if negligible || err <= share.max(1e-15 * whole.iter().fold(0.0f64, |m, v| m.max(v.abs()))) {
            for (t, (l, r)) in total.iter_mut().zip(left.iter().zip(&right)) {
                *t += l + r;
            }
        } else if depth >= MAX_DEPTH {
            return Err(Error::QuadratureFailure(format!(
                "adaptive Gauss–Legendre stalled on [{lo}, {hi}] with error {err:.3e}"
            )));
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(total)
}

/// Scalar form of [`adaptive_vec`].
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    adaptive_vec(|x, out| out[0] = f(x), 1, a, b, abs_tol).map(|v| v[0])
}

/// Lagrange weights of the four-point stencil at offsets `-1, 0, 1, 2` for
/// fractional position `s ∈ [0, 1)`.
pub fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(6);
        for k in 0..12 {
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            let got = rule.integrate(-1.0, 1.0, |x| x.powi(k));
            assert!((got - exact).abs() < 1e-14, "degree {k}: {got} vs {exact}");
        }
    }

    #[test]
    fn hermite_moments() {
        let rule = gauss_hermite(64);
        let m0: f64 = rule.weights.iter().sum();
        assert!((m0 - PI.sqrt()).abs() < 1e-13);
        let m2: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x * x).sum();
        assert!((m2 - 0.5 * PI.sqrt()).abs() < 1e-13);
        let m4: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.75 * PI.sqrt()).abs() < 1e-12);
        assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive(|x: f64| x.abs().sqrt(), -1.0, 1.0, 1e-12).unwrap();
        assert!((v - 4.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(|x: f64| 1.0 / x, 0.0, 1.0, 1e-14);
        assert!(matches!(r, Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn cubic_weights_reproduce_cubics() {
        for &s in &[0.0, 0.3, 0.77] {
            let w = cubic_weights(s);
            let p = |x: f64| 2.0 - x + 0.5 * x * x - 0.25 * x * x * x;
            let got: f64 = (0..4).map(|k| w[k] * p(k as f64 - 1.0)).sum();
            assert!((got - p(s)).abs() < 1e-13);
        }
    }
}
