//! Staggered space-time grids, sampled fields, discrete Fourier transforms
//! and weighted Riemann sums.

use crate::error::{Error, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;

/// Largest supported spatial dimension (fixed-size coordinate buffers).
pub const MAX_DIM: usize = 8;

/// Uniform grid on `[-L, L]^N x (-T_neg, T]`.
///
/// Spatial nodes sit at `-L + (j + 1/2) hx`, so none is at the origin.
/// Time nodes sit at `-T_neg + (k + 1) ht`, so the last node is `T`.
/// Flat index: time is the slowest axis, then spatial axes in row-major order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub dim: usize,
    pub half_width: f64,
    pub m: usize,
    pub t_neg: f64,
    pub t_end: f64,
    pub k: usize,
    /// Zero-padding factor applied by spectral operators on each spatial axis.
    pub pad_space: usize,
    /// Zero-padding factor applied by spectral operators on the time axis.
    pub pad_time: usize,
}

pub fn make_lattice(dim: usize, half_width: f64, m: usize, t_neg: f64, t_end: f64, k: usize) -> Result<Lattice> {
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::Lattice(format!("dimension {dim} outside 1..={MAX_DIM}")));
    }
    if m < 8 || !m.is_power_of_two() {
        return Err(Error::Lattice(format!("M = {m} must be a power of two >= 8")));
    }
    if k < 8 {
        return Err(Error::Lattice(format!("K = {k} must be >= 8")));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Lattice(format!("half width {half_width} must be positive")));
    }
    if !(t_neg >= 0.0 && t_end > 0.0 && (t_neg + t_end).is_finite()) {
        return Err(Error::Lattice(format!("time window (-{t_neg}, {t_end}] invalid")));
    }
    Ok(Lattice { dim, half_width, m, t_neg, t_end, k, pad_space: 2, pad_time: 2 })
}

impl Lattice {
    pub fn with_padding(mut self, pad_space: usize, pad_time: usize) -> Self {
        self.pad_space = pad_space.max(1);
        self.pad_time = pad_time.max(1);
        self
    }

    pub fn hx(&self) -> f64 {
        2.0 * self.half_width / self.m as f64
    }

    pub fn ht(&self) -> f64 {
        (self.t_end + self.t_neg) / self.k as f64
    }

    pub fn spatial_len(&self) -> usize {
        self.m.pow(self.dim as u32)
    }

    pub fn len(&self) -> usize {
        self.spatial_len() * self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn x_coord(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.hx()
    }

    pub fn t_coord(&self, k: usize) -> f64 {
        -self.t_neg + (k as f64 + 1.0) * self.ht()
    }

    /// Spatial cell volume `hx^N`.
    pub fn cell(&self) -> f64 {
        self.hx().powi(self.dim as i32)
    }

    /// Index of the first time node with `t > 0`.
    pub fn first_positive_time(&self) -> usize {
        let tol = 1e-9 * self.ht();
        (0..self.k).find(|&k| self.t_coord(k) > tol).unwrap_or(self.k)
    }

    /// Per-axis indices of a spatial flat index.
    pub fn spatial_indices(&self, mut idx: usize, out: &mut [usize]) {
        for d in (0..self.dim).rev() {
            out[d] = idx % self.m;
            idx /= self.m;
        }
    }

    /// Coordinates of a spatial flat index.
    pub fn spatial_point(&self, idx: usize, out: &mut [f64]) {
        let mut rest = idx;
        for d in (0..self.dim).rev() {
            out[d] = self.x_coord(rest % self.m);
            rest /= self.m;
        }
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let mut p = [0.0; MAX_DIM];
        self.spatial_point(idx, &mut p);
        p[..self.dim].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Radii of all spatial nodes, in flat order.
    pub fn radii(&self) -> Vec<f64> {
        (0..self.spatial_len()).map(|i| self.radius(i)).collect()
    }

    /// Shape of the transform array: time first, then spatial axes.
    pub fn shape(&self) -> Vec<usize> {
        let mut s = vec![self.k];
        s.extend(std::iter::repeat_n(self.m, self.dim));
        s
    }

    /// Signed DFT index for position `j` of an axis of length `n`.
    pub fn signed_index(j: usize, n: usize) -> f64 {
        if j <= n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        }
    }

    /// Angular spatial frequency on an axis of `n` points with spacing `hx`.
    pub fn space_frequency(&self, j: usize, n: usize) -> f64 {
        2.0 * PI * Self::signed_index(j, n) / (n as f64 * self.hx())
    }

    /// Angular time frequency on an axis of `n` points with spacing `ht`.
    pub fn time_frequency(&self, k: usize, n: usize) -> f64 {
        2.0 * PI * Self::signed_index(k, n) / (n as f64 * self.ht())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Physical,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq)]
enum Values {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

/// Values on every lattice node, either physical (real) or spectral (complex).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub lattice: Lattice,
    values: Values,
}

impl Field {
    pub fn physical(lattice: Lattice, values: Vec<f64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Lattice(format!("expected {} values, got {}", lattice.len(), values.len())));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { lattice, values: Values::Real(values) })
    }

    pub fn spectral(lattice: Lattice, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != lattice.len() {
            return Err(Error::Lattice(format!("expected {} values, got {}", lattice.len(), values.len())));
        }
        Ok(Self { lattice, values: Values::Complex(values) })
    }

    pub fn zeros(lattice: Lattice) -> Self {
        Self { lattice, values: Values::Real(vec![0.0; lattice.len()]) }
    }

    pub fn side(&self) -> Side {
        match self.values {
            Values::Real(_) => Side::Physical,
            Values::Complex(_) => Side::Spectral,
        }
    }

    pub fn real(&self) -> Result<&[f64]> {
        match &self.values {
            Values::Real(v) => Ok(v),
            Values::Complex(_) => Err(Error::SideMismatch { expected: "physical" }),
        }
    }

    pub fn complex(&self) -> Result<&[Complex64]> {
        match &self.values {
            Values::Complex(v) => Ok(v),
            Values::Real(_) => Err(Error::SideMismatch { expected: "spectral" }),
        }
    }

    pub fn into_real(self) -> Result<Vec<f64>> {
        match self.values {
            Values::Real(v) => Ok(v),
            Values::Complex(_) => Err(Error::SideMismatch { expected: "physical" }),
        }
    }

    /// Spatial slice at time index `k` of a physical field.
    pub fn slice(&self, k: usize) -> Result<&[f64]> {
        let n = self.lattice.spatial_len();
        Ok(&self.real()?[k * n..(k + 1) * n])
    }

    pub fn max_abs(&self) -> f64 {
        match &self.values {
            Values::Real(v) => v.iter().fold(0.0, |a, b| a.max(b.abs())),
            Values::Complex(v) => v.iter().fold(0.0, |a, b| a.max(b.norm())),
        }
    }

    /// Largest `|value|` over nodes with `t <= 0`.
    pub fn max_abs_nonpositive_time(&self) -> Result<f64> {
        let n = self.lattice.spatial_len();
        let upto = self.lattice.first_positive_time() * n;
        Ok(self.real()?[..upto].iter().fold(0.0, |a, b| a.max(b.abs())))
    }

    pub fn is_causal(&self) -> Result<bool> {
        Ok(self.max_abs_nonpositive_time()? == 0.0)
    }

    /// Pointwise map of a physical field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Field> {
        Field::physical(self.lattice, self.real()?.iter().map(|&v| f(v)).collect())
    }

    /// Write `axis indices, coordinates, value` rows with a fixed header.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let lat = &self.lattice;
        let mut header = vec!["it".to_string()];
        header.extend((0..lat.dim).map(|d| format!("ix{d}")));
        header.push("t".into());
        header.extend((0..lat.dim).map(|d| format!("x{d}")));
        match self.side() {
            Side::Physical => header.push("value".into()),
            Side::Spectral => header.extend(["value_re".to_string(), "value_im".to_string()]),
        }
        writeln!(out, "{}", header.join(","))?;
        let n = lat.spatial_len();
        let mut idx = [0usize; MAX_DIM];
        for flat in 0..lat.len() {
            let (kt, sp) = (flat / n, flat % n);
            lat.spatial_indices(sp, &mut idx);
            let mut row: Vec<String> = vec![kt.to_string()];
            row.extend(idx[..lat.dim].iter().map(|i| i.to_string()));
            row.push(format!("{:.12e}", lat.t_coord(kt)));
            row.extend(idx[..lat.dim].iter().map(|&i| format!("{:.12e}", lat.x_coord(i))));
            match &self.values {
                Values::Real(v) => row.push(format!("{:.15e}", v[flat])),
                Values::Complex(v) => {
                    row.push(format!("{:.15e}", v[flat].re));
                    row.push(format!("{:.15e}", v[flat].im));
                }
            }
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Evaluate a closed-form function at every node.
pub fn sample(lat: &Lattice, f: impl Fn(&[f64], f64) -> f64) -> Result<Field> {
    let n = lat.spatial_len();
    let mut values = Vec::with_capacity(lat.len());
    let mut p = [0.0; MAX_DIM];
    for kt in 0..lat.k {
        let t = lat.t_coord(kt);
        for sp in 0..n {
            lat.spatial_point(sp, &mut p);
            values.push(f(&p[..lat.dim], t));
        }
    }
    Field::physical(*lat, values)
}

/// Unitary discrete transform over all axes (time and space).
pub fn transform(fld: &Field, direction: Direction) -> Result<Field> {
    let lat = fld.lattice;
    let shape = lat.shape();
    let scale = 1.0 / (lat.len() as f64).sqrt();
    let mut data: Vec<Complex64> = match direction {
        Direction::Forward => fld.real()?.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        Direction::Inverse => fld.complex()?.to_vec(),
    };
    NdFft::new(&shape).process(&mut data, direction);
    data.iter_mut().for_each(|v| *v *= scale);
    match direction {
        Direction::Forward => Field::spectral(lat, data),
        Direction::Inverse => {
            let values = data.into_iter().map(|c| c.re).collect();
            Field::physical(lat, values)
        }
    }
}

/// Inverse transform that keeps the complex values (for residue diagnostics).
pub fn inverse_complex(fld: &Field) -> Result<Vec<Complex64>> {
    let lat = fld.lattice;
    let mut data = fld.complex()?.to_vec();
    NdFft::new(&lat.shape()).process(&mut data, Direction::Inverse);
    let scale = 1.0 / (lat.len() as f64).sqrt();
    data.iter_mut().for_each(|v| *v *= scale);
    Ok(data)
}

/// Riemann sum of `|x|^a fld^p` over the spatial slice at time index `k`.
pub fn weighted_integral(fld: &Field, a: f64, p: f64, k: usize) -> Result<f64> {
    let lat = fld.lattice;
    let slice = fld.slice(k)?;
    let integer_power = p == p.round();
    let mut sum = 0.0;
    let mut pt = [0.0; MAX_DIM];
    for (i, &v) in slice.iter().enumerate() {
        if v < 0.0 && !integer_power {
            return Err(Error::Negative { index: k * lat.spatial_len() + i, value: v });
        }
        if v == 0.0 {
            continue;
        }
        lat.spatial_point(i, &mut pt);
        let r2: f64 = pt[..lat.dim].iter().map(|c| c * c).sum();
        let weight = if a == 0.0 { 1.0 } else { r2.powf(0.5 * a) };
        sum += weight * if p == 1.0 { v } else { v.powf(p) };
    }
    Ok(sum * lat.cell())
}

/// Discrete `L^2` norm and `|i theta + |xi|^2|^s`-weighted spectral energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphNorm {
    pub l2: f64,
    pub multiplier_seminorm: f64,
}

/// Both terms use the discrete Plancherel normalization, so the seminorm at
/// `s = 0` equals `l2^2`.
pub fn graph_norm(fld: &Field, s: f64) -> Result<GraphNorm> {
    let lat = fld.lattice;
    let measure = lat.cell() * lat.ht();
    let l2 = (fld.real()?.iter().map(|v| v * v).sum::<f64>() * measure).sqrt();
    let spec = transform(fld, Direction::Forward)?;
    let values = spec.complex()?;
    let n = lat.spatial_len();
    let mut idx = [0usize; MAX_DIM];
    let mut total = 0.0;
    for (flat, v) in values.iter().enumerate() {
        let (kt, sp) = (flat / n, flat % n);
        lat.spatial_indices(sp, &mut idx);
        let xi2: f64 = idx[..lat.dim].iter().map(|&j| lat.space_frequency(j, lat.m).powi(2)).sum();
        let theta = lat.time_frequency(kt, lat.k);
        let modulus = (theta * theta + xi2 * xi2).sqrt();
        let weight = if s == 0.0 { 1.0 } else { modulus.powf(s) };
        total += weight * v.norm_sqr();
    }
    Ok(GraphNorm { l2, multiplier_seminorm: total * measure })
}

/// Cached per-axis FFT plans for a fixed array shape.
pub struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = shape.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = shape.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self { shape: shape.to_vec(), forward, inverse }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unnormalized transform over every axis.
    pub fn process(&self, data: &mut [Complex64], direction: Direction) {
        for axis in 0..self.shape.len() {
            self.process_axis(data, axis, direction);
        }
    }

    /// Unnormalized transform along a single axis.
    pub fn process_axis(&self, data: &mut [Complex64], axis: usize, direction: Direction) {
        let plan = match direction {
            Direction::Forward => &self.forward[axis],
            Direction::Inverse => &self.inverse[axis],
        };
        let n = self.shape[axis];
        if n == 1 {
            return;
        }
        let stride: usize = self.shape[axis + 1..].iter().product();
        if stride == 1 {
            plan.process(data);
            return;
        }
        let outer = data.len() / (n * stride);
        let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
        for o in 0..outer {
            let base = o * n * stride;
            for i in 0..stride {
                let line = &mut lines[(o * stride + i) * n..(o * stride + i + 1) * n];
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + j * stride + i];
                }
            }
        }
        plan.process(&mut lines);
        for o in 0..outer {
            let base = o * n * stride;
            for i in 0..stride {
                let line = &lines[(o * stride + i) * n..(o * stride + i + 1) * n];
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride + i] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small(dim: usize) -> Lattice {
        make_lattice(dim, 4.0, 16, 1.0, 3.0, 12).unwrap()
    }

    #[test]
    fn lattice_arithmetic() {
        let lat = make_lattice(2, 8.0, 64, 0.0, 4.0, 64).unwrap();
        assert_relative_eq!(lat.hx(), 0.25);
        assert_relative_eq!(lat.ht(), 0.0625);
        assert_eq!(lat.len(), 64 * 64 * 64);
        assert_relative_eq!(lat.t_coord(63), 4.0, epsilon = 1e-14);
        let min_r = lat.radii().into_iter().fold(f64::INFINITY, f64::min);
        assert!(min_r >= lat.hx() / 2.0);
        assert!(make_lattice(2, 8.0, 63, 0.0, 4.0, 64).is_err());
        assert!(make_lattice(2, 8.0, 4, 0.0, 4.0, 64).is_err());
        assert!(make_lattice(2, 8.0, 64, 0.0, 4.0, 7).is_err());
    }

    #[test]
    fn sampling_and_causality() {
        let lat = small(2);
        let g = sample(&lat, |x, t| (-x.iter().map(|v| v * v).sum::<f64>() - t * t).exp()).unwrap();
        assert!(g.real().unwrap().iter().all(|&v| v > 0.0));
        let mu = 0.4;
        let singular = sample(&lat, |x, _| x.iter().map(|v| v * v).sum::<f64>().powf(-mu / 2.0)).unwrap();
        assert!(singular.real().unwrap().iter().all(|v| v.is_finite()));
        let causal = sample(&lat, |x, t| if t > 0.0 { 1.0 + x[0].abs() } else { 0.0 }).unwrap();
        assert!(causal.is_causal().unwrap());
        assert!(!g.is_causal().unwrap());
    }

    #[test]
    fn nan_reported_with_index() {
        let lat = small(2);
        let err = sample(&lat, |x, _| if x[0] > 3.0 { f64::NAN } else { 0.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn transform_round_trip_and_plancherel() {
        let lat = small(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals: Vec<f64> = (0..lat.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let fld = Field::physical(lat, vals.clone()).unwrap();
        let spec = transform(&fld, Direction::Forward).unwrap();
        let back = transform(&spec, Direction::Inverse).unwrap();
        let scale = fld.max_abs();
        for (a, b) in back.real().unwrap().iter().zip(&vals) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
        let e1: f64 = vals.iter().map(|v| v * v).sum();
        let e2: f64 = spec.complex().unwrap().iter().map(|v| v.norm_sqr()).sum();
        assert_relative_eq!(e1, e2, max_relative = 1e-12);
        assert!(transform(&fld, Direction::Inverse).is_err());
        assert!(transform(&spec, Direction::Forward).is_err());
    }

    #[test]
    fn even_field_has_real_spectrum() {
        // staggered nodes are symmetric about 0, but the DFT origin is node 0,
        // so evenness is taken with respect to index reflection j -> -j mod M
        let lat = small(2);
        let m = lat.m;
        let k = lat.k;
        let n = lat.spatial_len();
        let mut vals = vec![0.0; lat.len()];
        for kt in 0..k {
            for sp in 0..n {
                let (i, j) = (sp / m, sp % m);
                let sym = |a: usize, len: usize| a.min(len - a) as f64;
                vals[kt * n + sp] = (-(sym(i, m).powi(2) + sym(j, m).powi(2)) / 9.0 - sym(kt, k).powi(2) / 4.0).exp();
            }
        }
        let spec = transform(&Field::physical(lat, vals).unwrap(), Direction::Forward).unwrap();
        let scale = spec.max_abs();
        assert!(spec.complex().unwrap().iter().all(|v| v.im.abs() <= 1e-12 * scale));
    }

    #[test]
    fn gaussian_maps_to_gaussian() {
        // a sampled Gaussian of width << box has DFT modulus e^{-|xi|^2/4}
        let lat = make_lattice(1, 16.0, 128, 8.0, 8.0, 8).unwrap();
        let fld = sample(&lat, |x, t| (-x[0] * x[0]).exp() * if t.abs() < 1e-12 { 1.0 } else { 0.0 }).unwrap();
        let spec = transform(&fld, Direction::Forward).unwrap();
        let v = spec.complex().unwrap();
        // continuous transform sqrt(pi) e^{-xi^2/4}, Riemann sum divides by hx
        let norm = 1.0 / (lat.hx() * ((lat.m * lat.k) as f64).sqrt());
        for j in 0..lat.m {
            let xi = lat.space_frequency(j, lat.m);
            let expected = PI.sqrt() * (-xi * xi / 4.0).exp() * norm;
            assert!((v[j].norm() - expected).abs() <= 1e-10, "j={j}");
        }
    }

    #[test]
    fn weighted_integral_oracles() {
        let lat = make_lattice(2, 8.0, 128, 0.0, 1.0, 8).unwrap();
        let zero = Field::zeros(lat);
        assert_eq!(weighted_integral(&zero, 0.3, 1.5, 2).unwrap(), 0.0);
        let ones = sample(&lat, |_, _| 1.0).unwrap();
        assert_relative_eq!(weighted_integral(&ones, 0.0, 1.0, 0).unwrap(), 256.0, max_relative = 1e-12);
        let gauss = sample(&lat, |x, _| (-x[0] * x[0] - x[1] * x[1]).exp()).unwrap();
        assert!((weighted_integral(&gauss, 0.0, 1.0, 3).unwrap() - PI).abs() < 1e-6);
        let neg = ones.map(|v| -v).unwrap();
        assert!(weighted_integral(&neg, 0.0, 0.5, 0).is_err());
    }

    #[test]
    fn graph_norm_basics() {
        let lat = small(2);
        let z = graph_norm(&Field::zeros(lat), 0.5).unwrap();
        assert_eq!((z.l2, z.multiplier_seminorm), (0.0, 0.0));
        let g = sample(&lat, |x, t| (-x[0] * x[0] - x[1] * x[1] - t * t).exp()).unwrap();
        let a = graph_norm(&g, 0.5).unwrap();
        let b = graph_norm(&g.map(|v| 3.0 * v).unwrap(), 0.5).unwrap();
        assert_relative_eq!(b.l2, 3.0 * a.l2, max_relative = 1e-12);
        assert_relative_eq!(b.multiplier_seminorm, 9.0 * a.multiplier_seminorm, max_relative = 1e-12);
        let at_zero = graph_norm(&g, 0.0).unwrap();
        assert_relative_eq!(at_zero.multiplier_seminorm, at_zero.l2 * at_zero.l2, max_relative = 1e-12);
    }

    #[test]
    fn graph_norm_matches_direct_sum() {
        // independent oracle: explicit DFT on a tiny 1D grid
        let lat = make_lattice(1, 3.0, 8, 1.0, 2.0, 8).unwrap();
        let g = sample(&lat, |x, t| (-x[0] * x[0] - (t - 0.5).powi(2)).exp()).unwrap();
        let vals = g.real().unwrap();
        let s = 0.7;
        let mut total = 0.0;
        for kt in 0..8 {
            for j in 0..8 {
                let mut acc = Complex64::new(0.0, 0.0);
                for kk in 0..8 {
                    for jj in 0..8 {
                        let phase = -2.0 * PI * ((kt * kk) as f64 / 8.0 + (j * jj) as f64 / 8.0);
                        acc += vals[kk * 8 + jj] * Complex64::from_polar(1.0, phase);
                    }
                }
                let xi = lat.space_frequency(j, 8);
                let th = lat.time_frequency(kt, 8);
                total += (th * th + xi.powi(4)).sqrt().powf(s) * acc.norm_sqr() / 64.0;
            }
        }
        total *= lat.hx() * lat.ht();
        assert_relative_eq!(graph_norm(&g, s).unwrap().multiplier_seminorm, total, max_relative = 1e-8);
    }

    #[test]
    fn csv_header_order() {
        let lat = small(2);
        let mut buf = Vec::new();
        Field::zeros(lat).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "it,ix0,ix1,t,x0,x1,value");
        assert_eq!(text.lines().count(), lat.len() + 1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn plancherel_property(seed in 0u64..1000) {
            let lat = make_lattice(2, 2.0, 8, 0.5, 1.0, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals: Vec<f64> = (0..lat.len()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let e1: f64 = vals.iter().map(|v| v * v).sum();
            let spec = transform(&Field::physical(lat, vals).unwrap(), Direction::Forward).unwrap();
            let e2: f64 = spec.complex().unwrap().iter().map(|v| v.norm_sqr()).sum();
            prop_assert!((e1 - e2).abs() <= 1e-12 * e1);
        }

        #[test]
        fn weighted_integral_monotone(seed in 0u64..1000, a in -1.5f64..0.5, p in 1.0f64..3.0) {
            let lat = make_lattice(2, 2.0, 8, 0.0, 1.0, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lo: Vec<f64> = (0..lat.len()).map(|_| rng.random_range(0.0..1.0)).collect();
            let hi: Vec<f64> = lo.iter().map(|v| v + rng.random_range(0.0..0.5)).collect();
            let f1 = Field::physical(lat, lo).unwrap();
            let f2 = Field::physical(lat, hi).unwrap();
            for k in 0..lat.k {
                prop_assert!(weighted_integral(&f1, a, p, k).unwrap() <= weighted_integral(&f2, a, p, k).unwrap());
            }
        }
    }
}
