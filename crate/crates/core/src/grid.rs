//! Rectangular space-time grids, sampled fields and their file formats.
//!
//! Binary layout (all integers and floats little-endian):
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 4    | magic `PKSF`                              |
//! | 4      | 4    | format version `u32` (= 1)                |
//! | 8      | 4    | space dimension `n` as `u32`              |
//! | 12     | 4    | flags `u32`: bit 0 compact support, bits 8–15 smoothness code |
//! | 16     | 24   | time axis: `lo f64`, `step f64`, `count u64` |
//! | 40     | 24·n | space axes, same triple each               |
//! | 40+24n | 8    | padding cells `u64`                        |
//! | 48+24n | 8·N  | values `f64`, time-major, then space row-major (last axis fastest) |

use crate::error::{Error, Result};
use crate::quadrature::cubic_weights;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Nodes `lo + i·step` for `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    /// `count` cells of `[lo, hi)`, nodes at the left cell edges.
    pub fn cells(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, step: (hi - lo) / count as f64, count }
    }

    /// `count` nodes including both endpoints.
    pub fn closed(lo: f64, hi: f64, count: usize) -> Self {
        Self { lo, step: (hi - lo) / (count.max(2) - 1) as f64, count }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.step
    }

    pub fn last(&self) -> f64 {
        self.node(self.count - 1)
    }

    /// Floor index and fractional offset of `x`.
    pub fn locate(&self, x: f64) -> (isize, f64) {
        let s = (x - self.lo) / self.step;
        let i = s.floor();
        (i as isize, s - i)
    }

    pub fn nearest(&self, x: f64) -> Option<usize> {
        let i = ((x - self.lo) / self.step).round();
        (i >= 0.0 && (i as usize) < self.count).then_some(i as usize)
    }
}

/// Row-major product of spatial axes, last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub axes: Vec<Axis>,
}

impl Lattice {
    pub fn new(axes: Vec<Axis>) -> Self {
        Self { axes }
    }

    /// The same cell axis in every dimension.
    pub fn cube(dim: usize, lo: f64, hi: f64, count: usize) -> Self {
        Self { axes: vec![Axis::cells(lo, hi, count); dim] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }

    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    pub fn min_step(&self) -> f64 {
        self.axes.iter().map(|a| a.step).fold(f64::INFINITY, f64::min)
    }

    pub fn max_step(&self) -> f64 {
        self.axes.iter().map(|a| a.step).fold(0.0, f64::max)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for d in (0..self.dim()).rev() {
            idx[d] = flat % self.axes[d].count;
            flat /= self.axes[d].count;
        }
        idx
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.count + i)
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat).iter().zip(&self.axes).map(|(&i, a)| a.node(i)).collect()
    }

    pub fn nearest_node(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let idx: Option<Vec<usize>> = self.axes.iter().zip(x).map(|(a, &v)| a.nearest(v)).collect();
        idx.map(|i| self.flat(&i))
    }

    /// Extends every axis by at least `pad` cells per side, rounding each
    /// total count up to a power of two. The original nodes stay nodes.
    pub fn padded_pow2(&self, pad: usize) -> Lattice {
        Lattice {
            axes: self
                .axes
                .iter()
                .map(|a| {
                    let total = (a.count + 2 * pad).next_power_of_two();
                    let left = (total - a.count) / 2;
                    Axis { lo: a.lo - left as f64 * a.step, step: a.step, count: total }
                })
                .collect(),
        }
    }

    /// Offset of `inner`'s first node within `self`, per axis.
    fn offsets_of(&self, inner: &Lattice) -> Vec<usize> {
        self.axes
            .iter()
            .zip(&inner.axes)
            .map(|(o, i)| ((i.lo - o.lo) / o.step).round() as usize)
            .collect()
    }

    /// Places values of a sub-lattice into a zero array on `self`.
    pub fn embed(&self, inner: &Lattice, values: &[f64]) -> Vec<f64> {
        let off = self.offsets_of(inner);
        let mut out = vec![0.0; self.len()];
        for k in 0..inner.len() {
            let idx: Vec<usize> = inner.multi_index(k).iter().zip(&off).map(|(i, o)| i + o).collect();
            out[self.flat(&idx)] = values[k];
        }
        out
    }

    /// Reads the nodes of a sub-lattice out of an array on `self`.
    pub fn restrict<T: Copy>(&self, inner: &Lattice, values: &[T]) -> Vec<T> {
        let off = self.offsets_of(inner);
        (0..inner.len())
            .map(|k| {
                let idx: Vec<usize> = inner.multi_index(k).iter().zip(&off).map(|(i, o)| i + o).collect();
                values[self.flat(&idx)]
            })
            .collect()
    }

    /// Evaluates `g` at the periodic offsets `kᵢ·stepᵢ`, `kᵢ ∈ [−N/2, N/2)`,
    /// stored in FFT order.
    pub fn periodic_offsets_map<F: FnMut(&[f64]) -> f64>(&self, mut g: F) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        (0..self.len())
            .map(|k| {
                for (d, (&i, a)) in self.multi_index(k).iter().zip(&self.axes).enumerate() {
                    let s = if i < a.count / 2 { i as f64 } else { i as f64 - a.count as f64 };
                    y[d] = s * a.step;
                }
                g(&y)
            })
            .collect()
    }

    /// Tensor cubic interpolation of nodal `values` at `x`, zero outside.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let n = self.dim();
        let mut base = [0isize; 3];
        let mut w = [[0.0; 4]; 3];
        for d in 0..n {
            let (i, s) = self.axes[d].locate(x[d]);
            base[d] = i - 1;
            w[d] = cubic_weights(s);
        }
        let mut total = 0.0;
        match n {
            1 => {
                for a in 0..4 {
                    total += w[0][a] * self.value_or_zero(values, &[base[0] + a as isize]);
                }
            }
            2 => {
                let c1 = self.axes[1].count as isize;
                let c0 = self.axes[0].count as isize;
                for a in 0..4 {
                    let i = base[0] + a as isize;
                    if i < 0 || i >= c0 {
                        continue;
                    }
                    let mut row = 0.0;
                    for b in 0..4 {
                        let j = base[1] + b as isize;
                        if j >= 0 && j < c1 {
                            row += w[1][b] * values[(i * c1 + j) as usize];
                        }
                    }
                    total += w[0][a] * row;
                }
            }
            _ => {
                let mut idx = vec![0isize; n];
                for combo in 0..4usize.pow(n as u32) {
                    let mut c = combo;
                    let mut weight = 1.0;
                    for d in (0..n).rev() {
                        let o = c % 4;
                        c /= 4;
                        idx[d] = base[d] + o as isize;
                        weight *= w[d][o];
                    }
                    total += weight * self.value_or_zero(values, &idx);
                }
            }
        }
        total
    }

    fn value_or_zero(&self, values: &[f64], idx: &[isize]) -> f64 {
        let mut flat = 0usize;
        for (&i, a) in idx.iter().zip(&self.axes) {
            if i < 0 || i as usize >= a.count {
                return 0.0;
            }
            flat = flat * a.count + i as usize;
        }
        values[flat]
    }
}

/// Time axis, spatial lattice and convolution padding (cells per side).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub time: Axis,
    pub space: Lattice,
    pub padding: usize,
}

impl GridSpec {
    pub fn new(time: Axis, space: Lattice, padding: usize) -> Result<Self> {
        let axes = std::iter::once(&time).chain(&space.axes);
        for a in axes {
            if !(a.step > 0.0) || a.count == 0 || !a.lo.is_finite() {
                return Err(Error::InvalidArgument(format!("degenerate axis {a:?}")));
            }
        }
        if space.dim() == 0 {
            return Err(Error::InvalidArgument("space dimension must be positive".into()));
        }
        Ok(Self { time, space, padding })
    }

    /// Closed time window with `nt` nodes, cube `[x0, x1)ⁿ` with `nx` cells per axis.
    pub fn uniform(dim: usize, t: (f64, f64), nt: usize, x: (f64, f64), nx: usize, padding: usize) -> Result<Self> {
        Self::new(Axis::closed(t.0, t.1, nt), Lattice::cube(dim, x.0, x.1, nx), padding)
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn len(&self) -> usize {
        self.time.count * self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h_x(&self) -> f64 {
        self.space.max_step()
    }

    pub fn h_t(&self) -> f64 {
        self.time.step
    }

    pub fn space_time_volume(&self) -> f64 {
        self.time.step * self.space.cell_volume()
    }

    /// Spatial lattice extended by the padding, power-of-two sized.
    pub fn padded_space(&self) -> Lattice {
        self.space.padded_pow2(self.padding)
    }

    /// Padding in cells covering `4` Gaussian standard widths of a kernel
    /// with largest eigenvalue `1/Λ` at duration `tau_max`, plus the
    /// exponential tail `e^{−|x|√Λ}` of the resolvent down to `1e-12`.
    pub fn recommended_padding(&self, lambda: f64, tau_max: f64) -> usize {
        let width = 4.0 * (2.0 * tau_max / lambda).sqrt();
        let tail = 12.0 * 10f64.ln() / lambda.sqrt();
        (width.min(tail).max(4.0 * (2.0 / lambda).sqrt()) / self.h_x()).ceil() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    #[default]
    Unknown,
    Discontinuous,
    C0,
    C1,
    C2,
    Smooth,
}

impl Smoothness {
    fn code(self) -> u32 {
        match self {
            Smoothness::Unknown => 0,
            Smoothness::Discontinuous => 1,
            Smoothness::C0 => 2,
            Smoothness::C1 => 3,
            Smoothness::C2 => 4,
            Smoothness::Smooth => 5,
        }
    }

    fn from_code(c: u32) -> Result<Self> {
        Ok(match c {
            0 => Smoothness::Unknown,
            1 => Smoothness::Discontinuous,
            2 => Smoothness::C0,
            3 => Smoothness::C1,
            4 => Smoothness::C2,
            5 => Smoothness::Smooth,
            _ => return Err(Error::Format(format!("unknown smoothness code {c}"))),
        })
    }
}

/// Values on a space-time grid, indexed `(time, space…)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub smoothness: Smoothness,
    pub compact_support: bool,
}

/// Values on a spatial lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialField {
    pub lattice: Lattice,
    pub values: Vec<f64>,
}

impl SpatialField {
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(lattice: Lattice, mut g: F) -> Self {
        let values = (0..lattice.len()).map(|k| g(&lattice.coords(k))).collect();
        Self { lattice, values }
    }

    pub fn zeros(lattice: Lattice) -> Self {
        let values = vec![0.0; lattice.len()];
        Self { lattice, values }
    }

    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.lattice.interpolate(&self.values, x)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Boundary collar width in cells used by the compact-support check.
pub const COLLAR: usize = 2;

impl SampledField {
    pub fn zeros(grid: GridSpec) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values, smoothness: Smoothness::Smooth, compact_support: true }
    }

    pub fn from_fn<F: Fn(f64, &[f64]) -> f64 + Sync>(grid: GridSpec, g: F) -> Self {
        let m = grid.space.len();
        let mut values = vec![0.0; grid.len()];
        {
            use rayon::prelude::*;
            values.par_chunks_mut(m).enumerate().for_each(|(k, slice)| {
                let t = grid.time.node(k);
                for (j, v) in slice.iter_mut().enumerate() {
                    *v = g(t, &grid.space.coords(j));
                }
            });
        }
        let mut field = Self { grid, values, smoothness: Smoothness::Unknown, compact_support: false };
        field.compact_support = field.vanishes_on_collar(1e-12);
        field
    }

    pub fn with_smoothness(mut self, s: Smoothness) -> Self {
        self.smoothness = s;
        self
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        let m = self.grid.space.len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn slice_mut(&mut self, k: usize) -> &mut [f64] {
        let m = self.grid.space.len();
        &mut self.values[k * m..(k + 1) * m]
    }

    pub fn time_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.grid.time.count).map(|k| self.grid.time.node(k))
    }

    pub fn spatial(&self, k: usize) -> SpatialField {
        SpatialField { lattice: self.grid.space.clone(), values: self.slice(k).to_vec() }
    }

    /// Cubic-in-time combination of slices at time `t`, zero outside the window.
    pub fn slice_at_time(&self, t: f64) -> Vec<f64> {
        let m = self.grid.space.len();
        let mut out = vec![0.0; m];
        for (k, w) in self.time_stencil(t) {
            for (o, v) in out.iter_mut().zip(self.slice(k)) {
                *o += w * v;
            }
        }
        out
    }

    /// Slice indices and cubic weights for time `t`.
    pub fn time_stencil(&self, t: f64) -> Vec<(usize, f64)> {
        let axis = &self.grid.time;
        let (i, s) = axis.locate(t);
        if s.abs() < 1e-9 && i >= 0 && (i as usize) < axis.count {
            return vec![(i as usize, 1.0)];
        }
        if (s - 1.0).abs() < 1e-9 && i + 1 >= 0 && ((i + 1) as usize) < axis.count {
            return vec![((i + 1) as usize, 1.0)];
        }
        if axis.count >= 4 && i >= 0 && (i as usize) < axis.count - 1 {
            // four nodes inside the window, one-sided at the ends
            let base = (i - 1).clamp(0, axis.count as isize - 4);
            let x = (i - base) as f64 + s;
            return (0..4)
                .map(|a| {
                    let w = (0..4).filter(|&b| b != a).map(|b| (x - b as f64) / (a as f64 - b as f64)).product();
                    ((base + a as isize) as usize, w)
                })
                .collect();
        }
        let w = cubic_weights(s);
        (0..4)
            .filter_map(|a| {
                let k = i - 1 + a as isize;
                (k >= 0 && (k as usize) < axis.count).then_some((k as usize, w[a]))
            })
            .collect()
    }

    pub fn value_at(&self, t: f64, x: &[f64]) -> f64 {
        self.time_stencil(t)
            .into_iter()
            .map(|(k, w)| w * self.grid.space.interpolate(self.slice(k), x))
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Discrete `L^p` norm with the space-time cell volume; `p = ∞` is the max.
    pub fn lp_norm(&self, p: f64) -> f64 {
        lp(&self.values, p, self.grid.space_time_volume())
    }

    /// True when every value within [`COLLAR`] cells of the spatial boundary
    /// and on the first and last time slice is below `tol`.
    pub fn vanishes_on_collar(&self, tol: f64) -> bool {
        let lat = &self.grid.space;
        let nt = self.grid.time.count;
        for k in 0..nt {
            let s = self.slice(k);
            for (j, v) in s.iter().enumerate() {
                let edge = k == 0
                    || k + 1 == nt
                    || lat.multi_index(j).iter().zip(&lat.axes).any(|(&i, a)| i < COLLAR || i + COLLAR >= a.count);
                if edge && v.abs() > tol {
                    return false;
                }
            }
        }
        true
    }

    pub fn write_binary<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut out = Vec::with_capacity(64 + 8 * self.values.len());
        out.extend_from_slice(b"PKSF");
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.dim() as u32).to_le_bytes());
        let flags = (self.compact_support as u32) | (self.smoothness.code() << 8);
        out.extend_from_slice(&flags.to_le_bytes());
        for a in std::iter::once(&self.grid.time).chain(&self.grid.space.axes) {
            out.extend_from_slice(&a.lo.to_le_bytes());
            out.extend_from_slice(&a.step.to_le_bytes());
            out.extend_from_slice(&(a.count as u64).to_le_bytes());
        }
        out.extend_from_slice(&(self.grid.padding as u64).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::File::create(path)?.write_all(&out)?;
        Ok(())
    }

    pub fn read_binary<P: AsRef<Path>>(path: P) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        let mut cur = Cursor { bytes: &bytes, pos: 0 };
        if cur.take(4)? != b"PKSF" {
            return Err(Error::Format("bad magic".into()));
        }
        let version = cur.u32()?;
        if version != 1 {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let n = cur.u32()? as usize;
        let flags = cur.u32()?;
        let axis = |cur: &mut Cursor| -> Result<Axis> {
            Ok(Axis { lo: cur.f64()?, step: cur.f64()?, count: cur.u64()? as usize })
        };
        let time = axis(&mut cur)?;
        let space = Lattice::new((0..n).map(|_| axis(&mut cur)).collect::<Result<_>>()?);
        let padding = cur.u64()? as usize;
        let grid = GridSpec::new(time, space, padding)?;
        let len = grid.len();
        if bytes.len() != cur.pos + 8 * len {
            return Err(Error::Format(format!(
                "payload holds {} bytes, header promises {}",
                bytes.len() - cur.pos,
                8 * len
            )));
        }
        let values = (0..len).map(|_| cur.f64()).collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid,
            values,
            smoothness: Smoothness::from_code((flags >> 8) & 0xff)?,
            compact_support: flags & 1 == 1,
        })
    }

    /// CSV with columns `t, x1, …, xn, value`.
    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((1..=self.dim()).map(|d| format!("x{d}")))
            .chain(std::iter::once("value".to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        let m = self.grid.space.len();
        for k in 0..self.grid.time.count {
            let t = self.grid.time.node(k);
            for j in 0..m {
                let x = self.grid.space.coords(j);
                let xs: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
                writeln!(w, "{t},{},{}", xs.join(","), self.values[k * m + j])?;
            }
        }
        Ok(())
    }
}

pub(crate) fn lp(values: &[f64], p: f64, volume: f64) -> f64 {
    if p.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * volume).powf(1.0 / p)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        if end > self.bytes.len() {
            return Err(Error::Format("truncated header or payload".into()));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_convention() {
        let a = Axis::cells(-4.0, 4.0, 256);
        assert_eq!(a.step, 1.0 / 32.0);
        assert_eq!(a.nearest(0.0), Some(128));
        assert_eq!(a.node(160), 1.0);
        let t = Axis::closed(0.0, 1.0, 5);
        assert_eq!(t.last(), 1.0);
    }

    #[test]
    fn padding_keeps_nodes() {
        let lat = Lattice::cube(2, -1.0, 1.0, 20);
        let big = lat.padded_pow2(3);
        assert_eq!(big.shape(), vec![32, 32]);
        let v: Vec<f64> = (0..lat.len()).map(|k| k as f64).collect();
        let e = big.embed(&lat, &v);
        assert_eq!(big.restrict(&lat, &e), v);
        let k = lat.flat(&[4, 7]);
        let kb = big.nearest_node(&lat.coords(k)).unwrap();
        assert_eq!(e[kb], k as f64);
    }

    #[test]
    fn cubic_interpolation_is_exact_on_cubics() {
        let lat = Lattice::cube(2, -2.0, 2.0, 40);
        let g = |x: &[f64]| x[0].powi(3) - 2.0 * x[0] * x[1] + x[1] * x[1];
        let f = SpatialField::from_fn(lat, g);
        let p = [0.123, -0.456];
        assert!((f.value_at(&p) - g(&p)).abs() < 1e-12);
    }

    #[test]
    fn time_stencil_hits_nodes() {
        let grid = GridSpec::uniform(1, (0.0, 1.0), 11, (-1.0, 1.0), 8, 0).unwrap();
        let f = SampledField::from_fn(grid, |t, x| t * t * t + x[0]);
        assert_eq!(f.time_stencil(0.3).len(), 1);
        let v = f.slice_at_time(0.35);
        let x = f.grid.space.coords(3);
        assert!((v[3] - (0.35f64.powi(3) + x[0])).abs() < 1e-13);
    }

    #[test]
    fn binary_roundtrip_and_corruption() {
        let grid = GridSpec::uniform(2, (0.0, 1.0), 3, (-1.0, 1.0), 4, 5).unwrap();
        let f = SampledField::from_fn(grid, |t, x| t + x[0] * x[1]).with_smoothness(Smoothness::Smooth);
        let dir = std::env::temp_dir().join(format!("pksf-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("f.bin");
        f.write_binary(&path).unwrap();
        let g = SampledField::read_binary(&path).unwrap();
        assert_eq!(f, g);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.pop();
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(SampledField::read_binary(&path), Err(Error::Format(_))));
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(SampledField::read_binary(&path), Err(Error::Format(_))));
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn compact_support_flag() {
        let grid = GridSpec::uniform(1, (0.0, 1.0), 5, (-2.0, 2.0), 32, 0).unwrap();
        let bump = SampledField::from_fn(grid.clone(), |t, x| (t * (1.0 - t)) * (1.0 - x[0] * x[0]).max(0.0));
        assert!(bump.compact_support);
        let flat = SampledField::from_fn(grid, |_, _| 1.0);
        assert!(!flat.compact_support);
    }
}
