//! Space-time Fourier multiplier application and the closed-form kernel objects.

use crate::error::{Error, Result};
use crate::kernel_ops::ground_state::SpaceTimeFn;
use crate::lattice::{sample, Direction, Field, Lattice, NdFft, MAX_DIM};
use crate::spectral_constants::gamma_fn;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative imaginary residue above which a spectral result is rejected.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

/// Causal heat-type kernel whose space-time convolution inverts the operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernelY {
    pub dim: usize,
    pub s: f64,
    prefactor: f64,
}

impl HeatKernelY {
    pub fn new(dim: usize, s: f64) -> Result<Self> {
        let prefactor = 1.0 / (gamma_fn(s)? * (4.0 * PI).powf(dim as f64 / 2.0));
        Ok(Self { dim, s, prefactor })
    }

    pub fn eval(&self, z: &[f64], tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        let z2: f64 = z.iter().map(|v| v * v).sum();
        self.prefactor * (-z2 / (4.0 * tau)).exp() * tau.powf(self.s - 1.0 - self.dim as f64 / 2.0)
    }
}

/// Principal branch of `(i theta + |xi|^2)^s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolHs {
    pub s: f64,
}

impl SymbolHs {
    pub fn eval(&self, xi: &[f64], theta: f64) -> Complex64 {
        self.eval_sq(xi.iter().map(|v| v * v).sum(), theta)
    }

    /// Symbol from `|xi|^2` directly.
    pub fn eval_sq(&self, xi2: f64, theta: f64) -> Complex64 {
        if xi2 == 0.0 && theta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let modulus = (theta * theta + xi2 * xi2).sqrt().powf(self.s);
        let arg = theta.atan2(xi2) * self.s;
        Complex64::from_polar(modulus, arg)
    }
}

/// Zero-padded space-time layout used by the spectral operators.
pub(crate) struct Padded {
    pub lat: Lattice,
    pub mp: usize,
    pub kp: usize,
    pub fft: NdFft,
}

impl Padded {
    pub fn new(lat: &Lattice) -> Self {
        let mp = lat.m * lat.pad_space;
        let kp = lat.k * lat.pad_time;
        let mut shape = vec![kp];
        shape.extend(std::iter::repeat_n(mp, lat.dim));
        Self { lat: *lat, mp, kp, fft: NdFft::new(&shape) }
    }

    pub fn spatial_len(&self) -> usize {
        self.mp.pow(self.lat.dim as u32)
    }

    /// Flat padded spatial index of an unpadded spatial index.
    pub fn embed_spatial(&self, idx: usize) -> usize {
        let mut ind = [0usize; MAX_DIM];
        self.lat.spatial_indices(idx, &mut ind);
        ind[..self.lat.dim].iter().fold(0, |acc, &j| acc * self.mp + j)
    }

    pub fn embed(&self, values: &[f64]) -> Vec<Complex64> {
        let n = self.lat.spatial_len();
        let np = self.spatial_len();
        let map: Vec<usize> = (0..n).map(|i| self.embed_spatial(i)).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); np * self.kp];
        for kt in 0..self.lat.k {
            for (i, &pi) in map.iter().enumerate() {
                out[kt * np + pi] = Complex64::new(values[kt * n + i], 0.0);
            }
        }
        out
    }

    pub fn crop(&self, data: &[Complex64]) -> Vec<Complex64> {
        let n = self.lat.spatial_len();
        let np = self.spatial_len();
        let map: Vec<usize> = (0..n).map(|i| self.embed_spatial(i)).collect();
        let mut out = Vec::with_capacity(self.lat.len());
        for kt in 0..self.lat.k {
            out.extend(map.iter().map(|&pi| data[kt * np + pi]));
        }
        out
    }

    /// `|xi|^2` on the padded spatial grid.
    pub fn xi_squared(&self) -> Vec<f64> {
        let dim = self.lat.dim;
        let axis: Vec<f64> = (0..self.mp).map(|j| self.lat.space_frequency(j, self.mp).powi(2)).collect();
        let np = self.spatial_len();
        let mut out = vec![0.0; np];
        for (flat, slot) in out.iter_mut().enumerate() {
            let mut rest = flat;
            for _ in 0..dim {
                *slot += axis[rest % self.mp];
                rest /= self.mp;
            }
        }
        out
    }

    /// Apply a real-output space-time multiplier; `nyquist_real` takes the real
    /// part of the multiplier at the unpaired time frequency.
    pub fn apply_multiplier(&self, values: &[f64], mult: impl Fn(f64, f64) -> Complex64) -> Result<Vec<f64>> {
        let mut data = self.embed(values);
        self.fft.process(&mut data, Direction::Forward);
        let xi2 = self.xi_squared();
        let np = self.spatial_len();
        for kt in 0..self.kp {
            let theta = self.lat.time_frequency(kt, self.kp);
            let nyquist = self.kp.is_multiple_of(2) && kt == self.kp / 2;
            for (i, &x2) in xi2.iter().enumerate() {
                let mut m = mult(x2, theta);
                if nyquist {
                    m = Complex64::new(m.re, 0.0);
                }
                data[kt * np + i] *= m;
            }
        }
        self.fft.process(&mut data, Direction::Inverse);
        let scale = 1.0 / (np * self.kp) as f64;
        let cropped = self.crop(&data);
        let max_re = cropped.iter().fold(0.0f64, |a, c| a.max(c.re.abs()));
        let max_im = cropped.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
        if max_im > IMAG_RESIDUE_TOL * max_re.max(f64::MIN_POSITIVE) {
            return Err(Error::Aliasing { residue: max_im / max_re });
        }
        Ok(cropped.into_iter().map(|c| c.re * scale).collect())
    }
}

/// Spectral application of `(d_t - Laplacian)^s` on the zero-padded lattice.
pub fn apply_hs_spectral(fld: &Field, s: f64) -> Result<Field> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("order s = {s} outside (0, 1]")));
    }
    let padded = Padded::new(&fld.lattice);
    let symbol = SymbolHs { s };
    let out = padded.apply_multiplier(fld.real()?, |x2, th| symbol.eval_sq(x2, th))?;
    Field::physical(fld.lattice, out)
}

/// Slice-wise fractional Laplacian `(-Laplacian)^s` (the symbol at `theta = 0`).
pub fn apply_frac_laplacian(fld: &Field, s: f64) -> Result<Field> {
    let lat = fld.lattice;
    // one slice at a time keeps time frequencies out of the multiplier
    let slice_pad = Padded::new(&Lattice { k: 1, pad_time: 1, ..lat });
    let values = fld.real()?;
    let n = lat.spatial_len();
    let mut out = Vec::with_capacity(values.len());
    for kt in 0..lat.k {
        let part = slice_pad.apply_multiplier(&values[kt * n..(kt + 1) * n], |x2, _| Complex64::new(x2.powf(s), 0.0))?;
        out.extend(part);
    }
    Field::physical(lat, out)
}

/// Relative gap `|<H^s f, g> - <f~, H^s g~>| / max(|.|)` where `~` is the
/// reflection `(x, t) -> (-x, -t)`, sampled directly. The lattice should have a
/// symmetric time window so the reflected samples stay on the same nodes.
pub fn adjoint_gap(lat: &Lattice, f: &SpaceTimeFn, g: &SpaceTimeFn, s: f64) -> Result<f64> {
    let reflect = |h: &SpaceTimeFn| {
        sample(lat, |x, t| {
            let mut neg = [0.0; MAX_DIM];
            x.iter().zip(neg.iter_mut()).for_each(|(a, b)| *b = -a);
            h(&neg[..x.len()], -t)
        })
    };
    let (ff, gg) = (sample(lat, f)?, sample(lat, g)?);
    let (f_ref, g_ref) = (reflect(f)?, reflect(g)?);
    let dot = |a: &Field, b: &Field| -> Result<f64> { Ok(a.real()?.iter().zip(b.real()?).map(|(u, v)| u * v).sum()) };
    let lhs = dot(&apply_hs_spectral(&ff, s)?, &gg)?;
    let rhs = dot(&f_ref, &apply_hs_spectral(&g_ref, s)?)?;
    let scale = lhs.abs().max(rhs.abs());
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gaussian(x: &[f64], t: f64) -> f64 {
        (-x.iter().map(|v| v * v).sum::<f64>() - 2.0 * (t - 1.0).powi(2)).exp()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn kernel_is_causal_and_positive() {
        let y = HeatKernelY::new(2, 0.5).unwrap();
        assert_eq!(y.eval(&[0.1, 0.2], 0.0), 0.0);
        assert_eq!(y.eval(&[0.1, 0.2], -1.0), 0.0);
        assert!(y.eval(&[3.0, 0.0], 0.5) > 0.0);
        // 1/(Gamma(1/2) 4 pi) at z = 0, tau = 1
        assert_relative_eq!(y.eval(&[0.0, 0.0], 1.0), 1.0 / (PI.sqrt() * 4.0 * PI), max_relative = 1e-13);
    }

    #[test]
    fn symbol_modulus_and_branch() {
        let sym = SymbolHs { s: 0.5 };
        let v = sym.eval(&[0.0, 0.0], 1.0);
        assert_relative_eq!(v.re, (PI / 4.0).cos(), epsilon = 1e-14);
        assert_relative_eq!(v.im, (PI / 4.0).sin(), epsilon = 1e-14);
        assert_eq!(sym.eval(&[0.0], 0.0), Complex64::new(0.0, 0.0));
    }

    proptest! {
        #[test]
        fn symbol_has_nonnegative_real_part(xi in -5.0f64..5.0, theta in -50.0f64..50.0, s in 0.05f64..1.0) {
            let v = SymbolHs { s }.eval(&[xi], theta);
            prop_assert!(v.re >= 0.0);
            prop_assert!((v.norm() - (theta * theta + xi.powi(4)).powf(s / 2.0)).abs() <= 1e-12 * v.norm().max(1.0));
        }
    }

    #[test]
    fn time_constant_field_matches_fractional_laplacian() {
        // without time padding a constant-in-time field only sees theta = 0
        let lat = make_lattice(2, 6.0, 32, 1.0, 1.0, 8).unwrap().with_padding(2, 1);
        let fld = sample(&lat, |x, _| (-x[0] * x[0] - 0.5 * x[1] * x[1]).exp()).unwrap();
        let a = apply_hs_spectral(&fld, 0.6).unwrap();
        let b = apply_frac_laplacian(&fld, 0.6).unwrap();
        assert!(max_diff(a.real().unwrap(), b.real().unwrap()) <= 1e-12 * b.max_abs());
    }

    #[test]
    fn first_order_matches_finite_differences() {
        let lat = make_lattice(2, 6.0, 64, 3.0, 5.0, 64).unwrap();
        let fld = sample(&lat, gaussian).unwrap();
        let spec = apply_hs_spectral(&fld, 1.0).unwrap();
        let (hx, ht) = (lat.hx(), lat.ht());
        let mut worst = 0.0f64;
        let mut point = [0.0; 2];
        for kt in 1..lat.k - 1 {
            for idx in 0..lat.spatial_len() {
                lat.spatial_point(idx, &mut point);
                let t = lat.t_coord(kt);
                let (x, y) = (point[0], point[1]);
                let dt = (gaussian(&[x, y], t + ht) - gaussian(&[x, y], t - ht)) / (2.0 * ht);
                let c = gaussian(&[x, y], t);
                let lap = (gaussian(&[x + hx, y], t) + gaussian(&[x - hx, y], t) + gaussian(&[x, y + hx], t) + gaussian(&[x, y - hx], t) - 4.0 * c) / (hx * hx);
                worst = worst.max((spec.real().unwrap()[kt * lat.spatial_len() + idx] - (dt - lap)).abs());
            }
        }
        // second-order differences with hx = 0.1875, ht = 0.125
        assert!(worst < 0.1, "worst {worst}");
        assert!(worst > 1e-4);
    }

    #[test]
    fn finite_difference_gap_is_second_order() {
        let gap = |m: usize| {
            let lat = make_lattice(2, 6.0, m, 3.0, 5.0, m).unwrap();
            let fld = sample(&lat, gaussian).unwrap();
            let spec = apply_hs_spectral(&fld, 1.0).unwrap();
            let (hx, ht) = (lat.hx(), lat.ht());
            let mut worst = 0.0f64;
            let mut p = [0.0; 2];
            for kt in 1..lat.k - 1 {
                for idx in 0..lat.spatial_len() {
                    lat.spatial_point(idx, &mut p);
                    let t = lat.t_coord(kt);
                    let dt = (gaussian(&p, t + ht) - gaussian(&p, t - ht)) / (2.0 * ht);
                    let c = gaussian(&p, t);
                    let lap = (gaussian(&[p[0] + hx, p[1]], t) + gaussian(&[p[0] - hx, p[1]], t) + gaussian(&[p[0], p[1] + hx], t) + gaussian(&[p[0], p[1] - hx], t) - 4.0 * c) / (hx * hx);
                    worst = worst.max((spec.real().unwrap()[kt * lat.spatial_len() + idx] - (dt - lap)).abs());
                }
            }
            worst
        };
        let ratio = gap(32) / gap(64);
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }

    #[test]
    fn adjoint_identity_with_reflected_samples() {
        // symmetric time window so reflection maps nodes onto nodes
        let lat = make_lattice(2, 6.0, 32, 4.0, 4.0, 32).unwrap();
        let phi = |x: &[f64], t: f64| (-(x[0] - 0.5).powi(2) - x[1] * x[1] - 2.0 * (t - 0.5).powi(2)).exp();
        let psi = |x: &[f64], t: f64| (1.0 + 0.3 * x[1]) * (-x[0] * x[0] - 0.7 * (x[1] + 0.3).powi(2) - (t + 0.4).powi(2)).exp();
        for &s in &[0.3, 0.5, 0.8] {
            let gap = adjoint_gap(&lat, &phi, &psi, s).unwrap();
            assert!(gap <= 1e-8, "s={s}: {gap}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(8))]
        #[test]
        fn spectral_operator_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, s in 0.1f64..1.0) {
            let lat = make_lattice(1, 6.0, 32, 2.0, 4.0, 16).unwrap();
            let f = sample(&lat, |x, t| (-x[0] * x[0] - (t - 1.0).powi(2)).exp()).unwrap();
            let g = sample(&lat, |x, t| (-(x[0] - 1.0).powi(2) - 2.0 * t * t).exp() * x[0]).unwrap();
            let comb = sample(&lat, |x, t| {
                a * (-x[0] * x[0] - (t - 1.0).powi(2)).exp() + b * (-(x[0] - 1.0).powi(2) - 2.0 * t * t).exp() * x[0]
            }).unwrap();
            let hf = apply_hs_spectral(&f, s).unwrap();
            let hg = apply_hs_spectral(&g, s).unwrap();
            let hc = apply_hs_spectral(&comb, s).unwrap();
            let expected: Vec<f64> = hf.real().unwrap().iter().zip(hg.real().unwrap()).map(|(x, y)| a * x + b * y).collect();
            let scale = hc.max_abs().max(1.0);
            prop_assert!(max_diff(hc.real().unwrap(), &expected) <= 1e-12 * scale);
        }
    }

    #[test]
    fn rejects_bad_order() {
        let lat = make_lattice(1, 4.0, 16, 1.0, 1.0, 8).unwrap();
        let f = Field::zeros(lat);
        assert!(apply_hs_spectral(&f, 0.0).is_err());
        assert!(apply_hs_spectral(&f, 1.5).is_err());
    }
}
