//! Multi-dimensional FFTs on periodic lattices and Fourier multipliers.

use crate::grid::Lattice;
use nalgebra::DMatrix;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

pub struct Spectral {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
    /// Angular wavenumbers per axis in FFT order.
    wavenumbers: Vec<Vec<f64>>,
}

impl Spectral {
    pub fn new(lattice: &Lattice) -> Self {
        let mut planner = FftPlanner::new();
        let shape = lattice.shape();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        let wavenumbers = lattice
            .axes
            .iter()
            .map(|a| {
                let n = a.count;
                (0..n)
                    .map(|k| {
                        let s = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                        2.0 * PI * s / (n as f64 * a.step)
                    })
                    .collect()
            })
            .collect();
        Self { shape, forward, inverse, wavenumbers }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn forward(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, &self.forward);
        buf
    }

    pub fn forward_complex(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        self.transform(&mut buf, &self.forward);
        buf
    }

    /// Inverse transform, normalized, real part.
    pub fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut buf, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }

    fn transform(&self, buf: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let n = self.dim();
        let mut stride = 1;
        for d in (0..n).rev() {
            let len = self.shape[d];
            let plan = &plans[d];
            if stride == 1 {
                plan.process(buf);
            } else {
                let block = len * stride;
                let mut line = vec![Complex64::new(0.0, 0.0); len];
                for outer in 0..buf.len() / block {
                    for inner in 0..stride {
                        let base = outer * block + inner;
                        for (k, l) in line.iter_mut().enumerate() {
                            *l = buf[base + k * stride];
                        }
                        plan.process(&mut line);
                        for (k, l) in line.iter().enumerate() {
                            buf[base + k * stride] = *l;
                        }
                    }
                }
            }
            stride *= len;
        }
    }

    /// Wavevector at a flat spectral index.
    pub fn wavevector(&self, flat: usize) -> Vec<f64> {
        let mut idx = flat;
        let mut xi = vec![0.0; self.dim()];
        for d in (0..self.dim()).rev() {
            xi[d] = self.wavenumbers[d][idx % self.shape[d]];
            idx /= self.shape[d];
        }
        xi
    }

    /// `ξᵢξⱼ` for every spectral index.
    pub fn products(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let xi = self.wavevector(k);
                xi[i] * xi[j]
            })
            .collect()
    }

    /// Precomputed quadratic monomials for fast `⟨Mξ,ξ⟩`.
    pub fn quadratic(&self) -> Quadratic {
        let n = self.dim();
        let mut pairs = Vec::new();
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                pairs.push((i, j));
                terms.push(self.products(i, j));
            }
        }
        Quadratic { n, pairs, terms }
    }
}

pub struct Quadratic {
    n: usize,
    pairs: Vec<(usize, usize)>,
    terms: Vec<Vec<f64>>,
}

impl Quadratic {
    /// Coefficients `cₖ` with `⟨Mξ,ξ⟩ = Σ cₖ termₖ(ξ)`.
    pub fn coefficients(&self, m: &DMatrix<f64>) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|&(i, j)| if i == j { m[(i, i)] } else { m[(i, j)] + m[(j, i)] })
            .collect()
    }

    pub fn term(&self, i: usize, j: usize) -> &[f64] {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        let k = self.pairs.iter().position(|&p| p == (i, j)).expect("pair in range");
        &self.terms[k]
    }

    pub fn eval(&self, coeffs: &[f64], k: usize) -> f64 {
        match self.n {
            1 => coeffs[0] * self.terms[0][k],
            2 => coeffs[0] * self.terms[0][k] + coeffs[1] * self.terms[1][k] + coeffs[2] * self.terms[2][k],
            _ => coeffs.iter().zip(&self.terms).map(|(c, t)| c * t[k]).sum(),
        }
    }

    pub fn len(&self) -> usize {
        self.terms.first().map_or(0, |t| t.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let lat = Lattice::cube(2, 0.0, 1.0, 8);
        let s = Spectral::new(&lat);
        let data: Vec<f64> = (0..64).map(|k| (k as f64 * 0.37).sin()).collect();
        let back = s.inverse(s.forward(&data));
        for (a, b) in data.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_multiplier() {
        let lat = Lattice::cube(1, 0.0, 2.0 * PI, 32);
        let s = Spectral::new(&lat);
        let data: Vec<f64> = (0..32).map(|k| (3.0 * lat.coords(k)[0]).sin()).collect();
        let q = s.quadratic();
        let spec: Vec<_> = s.forward(&data).iter().enumerate().map(|(k, c)| -c * q.term(0, 0)[k]).collect();
        let d2 = s.inverse(spec);
        for (k, v) in d2.iter().enumerate() {
            assert!((v + 9.0 * (3.0 * lat.coords(k)[0]).sin()).abs() < 1e-11);
        }
    }
}
