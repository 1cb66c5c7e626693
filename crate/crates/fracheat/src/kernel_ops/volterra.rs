//! Causal space-time convolution with the inverse kernel, marched slab by slab.
//!
//! For every time lag `m` the kernel is integrated in `tau` against the linear
//! hat function of that lag, so `g(t - tau)` is replaced by its piecewise-linear
//! interpolant. The spatial factor at each quadrature time is a non-negative
//! stencil: a 3-point heat step for `tau < hx^2/2` (exact mean and variance) and
//! a sampled Gaussian above. Every lag kernel is therefore a non-negative
//! combination of non-negative stencils, which makes the discrete operator
//! positive and monotone.

use crate::error::{Error, Result};
use crate::kernel_ops::spectral::{apply_hs_spectral, Padded};
use crate::lattice::{Direction, Field, Lattice};
use crate::quad::{geometric_edges, Rule};
use crate::spectral_constants::gamma_fn;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Number of halvings used to resolve the integrable `tau^{s-1}` endpoint.
const SMALL_TAU_LEVELS: i32 = 48;
const NODES_PER_PANEL: usize = 8;

/// Causal convolution in time with per-lag spatial Fourier multipliers:
/// `out(t_i) = sum_m K_m * g(t_i - m ht)`, marched forward in time.
pub struct LagConvolution {
    pub(crate) lattice: Lattice,
    pub(crate) padded: Padded,
    /// Spatial DFT of each lag kernel on the padded grid.
    pub(crate) lag_symbols: Vec<Vec<f64>>,
}

impl LagConvolution {
    pub(crate) fn new(lattice: &Lattice, lag_symbols: Vec<Vec<f64>>) -> Self {
        let padded = Padded::new(&lattice.with_padding(lattice.pad_space, 1));
        Self { lattice: *lattice, padded, lag_symbols }
    }

    pub(crate) fn padded_for(lattice: &Lattice) -> Padded {
        Padded::new(&lattice.with_padding(lattice.pad_space, 1))
    }

    /// Convolve a causal field; values at `t <= 0` must vanish to `1e-12` relative.
    pub fn apply(&self, g: &Field) -> Result<Field> {
        let lat = &self.lattice;
        if g.lattice.dim != lat.dim || g.lattice.m != lat.m || g.lattice.k != lat.k {
            return Err(Error::Lattice("field lattice does not match the operator".into()));
        }
        let values = g.real()?;
        let scale = values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let early = g.max_abs_nonpositive_time()?;
        if early > 1e-12 * scale {
            return Err(Error::NonCausal(early));
        }
        let n = lat.spatial_len();
        let np = self.padded.spatial_len();
        let start = lat.first_positive_time();
        let map: Vec<usize> = (0..n).map(|i| self.padded.embed_spatial(i)).collect();
        let slab_fft = |kt: usize| -> Vec<Complex64> {
            let mut buf = vec![Complex64::new(0.0, 0.0); np];
            for (i, &pi) in map.iter().enumerate() {
                buf[pi] = Complex64::new(values[kt * n + i], 0.0);
            }
            for axis in 1..=lat.dim {
                self.padded.fft.process_axis(&mut buf, axis, Direction::Forward);
            }
            buf
        };
        let spectra: Vec<Vec<Complex64>> = (start..lat.k).map(slab_fft).collect();
        let mut out = vec![0.0; lat.len()];
        let inv = 1.0 / np as f64;
        let mut acc = vec![Complex64::new(0.0, 0.0); np];
        for i in start..lat.k {
            acc.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for m in 0..=(i - start).min(self.lag_symbols.len() - 1) {
                let src = &spectra[i - m - start];
                let sym = &self.lag_symbols[m];
                for ((a, &gv), &kv) in acc.iter_mut().zip(src).zip(sym) {
                    *a += gv * kv;
                }
            }
            for axis in 1..=lat.dim {
                self.padded.fft.process_axis(&mut acc, axis, Direction::Inverse);
            }
            for (i_sp, &pi) in map.iter().enumerate() {
                out[i * n + i_sp] = acc[pi].re * inv;
            }
        }
        Field::physical(*lat, out)
    }
}

/// Precomputed lag kernels of the inverse operator for one lattice and order.
pub struct JsOperator {
    s: f64,
    conv: LagConvolution,
}

/// Quadrature node in `tau` with its weight already containing `tau^{s-1}/Gamma(s)`.
struct TauNode {
    tau: f64,
    weight: f64,
}

impl JsOperator {
    pub fn new(lattice: &Lattice, s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(Error::Domain(format!("order s = {s} outside (0, 1]")));
        }
        let padded = LagConvolution::padded_for(lattice);
        let ht = lattice.ht();
        let hx = lattice.hx();
        let tau_switch = 0.5 * hx * hx;
        let inv_gamma = 1.0 / gamma_fn(s)?;
        let rule = Rule::legendre(NODES_PER_PANEL);
        let lags = lattice.k + 1;
        let mut per_lag: Vec<Vec<TauNode>> = (0..lags).map(|_| Vec::new()).collect();
        // delta mass from [0, eps], the stencil there is the identity
        let eps = ht * 2f64.powi(-SMALL_TAU_LEVELS);
        let delta_mass = eps.powf(s) / s * inv_gamma;
        for slab in 0..lattice.k {
            let a = slab as f64 * ht;
            let b = a + ht;
            let mut edges = if slab == 0 { geometric_edges(eps, ht, 2.0) } else { vec![a, b] };
            if tau_switch > edges[0] && tau_switch < *edges.last().unwrap() {
                edges.push(tau_switch);
                edges.sort_by(|x, y| x.partial_cmp(y).unwrap());
            }
            for w in edges.windows(2) {
                for (tau, wq) in rule.mapped(w[0], w[1]) {
                    let base = wq * tau.powf(s - 1.0) * inv_gamma;
                    let u = (tau - a) / ht;
                    per_lag[slab].push(TauNode { tau, weight: base * (1.0 - u) });
                    per_lag[slab + 1].push(TauNode { tau, weight: base * u });
                }
            }
        }
        // the delta piece belongs entirely to lag 0 up to O(eps/ht)
        let mp = padded.mp;
        let dim = lattice.dim;
        let np = padded.spatial_len();
        let mut lag_symbols = Vec::with_capacity(lags);
        for (m, nodes) in per_lag.iter().enumerate() {
            let mut sym = vec![if m == 0 { delta_mass } else { 0.0 }; np];
            for node in nodes {
                let axis = stencil_symbol(node.tau, hx, mp, tau_switch);
                accumulate_tensor(&mut sym, &axis, node.weight, dim, mp);
            }
            lag_symbols.push(sym);
        }
        Ok(Self { s, conv: LagConvolution::new(lattice, lag_symbols) })
    }

    pub fn order(&self) -> f64 {
        self.s
    }

    pub fn lattice(&self) -> &Lattice {
        &self.conv.lattice
    }

    /// Total weight of lag `m` (the DFT of its kernel at zero frequency).
    pub fn lag_mass(&self, m: usize) -> f64 {
        self.conv.lag_symbols[m][0]
    }

    pub fn apply(&self, g: &Field) -> Result<Field> {
        self.conv.apply(g)
    }
}

/// One-dimensional DFT of the non-negative spatial stencil at time `tau`.
fn stencil_symbol(tau: f64, hx: f64, mp: usize, tau_switch: f64) -> Vec<f64> {
    if tau <= tau_switch {
        let r = tau / (hx * hx);
        return (0..mp).map(|j| 1.0 - 2.0 * r * (1.0 - (2.0 * PI * j as f64 / mp as f64).cos())).collect();
    }
    let half = (mp / 2) as i64;
    let norm = hx / (4.0 * PI * tau).sqrt();
    let taps: Vec<(i64, f64)> = (-half..half)
        .map(|d| (d, norm * (-((d as f64) * hx).powi(2) / (4.0 * tau)).exp()))
        .filter(|(_, c)| *c > 1e-300)
        .collect();
    (0..mp)
        .map(|j| {
            let w = 2.0 * PI * j as f64 / mp as f64;
            taps.iter().map(|&(d, c)| c * (w * d as f64).cos()).sum()
        })
        .collect()
}

/// `sym[k] += weight * prod_d axis[k_d]` over the padded spatial grid.
fn accumulate_tensor(sym: &mut [f64], axis: &[f64], weight: f64, dim: usize, mp: usize) {
    let mut prods = vec![weight];
    for _ in 0..dim {
        let mut next = Vec::with_capacity(prods.len() * mp);
        for p in &prods {
            next.extend(axis.iter().map(|a| p * a));
        }
        prods = next;
    }
    for (s, p) in sym.iter_mut().zip(&prods) {
        *s += p;
    }
}

/// One-shot convenience wrapper around [`JsOperator`].
pub fn apply_js(g: &Field, s: f64) -> Result<Field> {
    JsOperator::new(&g.lattice, s)?.apply(g)
}

fn rel_sup(a: &Field, b: &Field) -> Result<f64> {
    let d = a.real()?.iter().zip(b.real()?).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(d / b.max_abs())
}

/// `max |J_s(H^s phi) - phi| / max |phi|` for a causal `phi`. The spectral
/// image has a small tail at `t <= 0`; only its causal part is inverted.
pub fn inversion_error(phi: &Field, s: f64) -> Result<f64> {
    let lat = phi.lattice;
    let n = lat.spatial_len();
    let mut image = apply_hs_spectral(phi, s)?.into_real()?;
    image[..lat.first_positive_time() * n].iter_mut().for_each(|v| *v = 0.0);
    let back = apply_js(&Field::physical(lat, image)?, s)?;
    rel_sup(&back, phi)
}

/// `max |J_b(J_a g) - J_{a+b} g| / max |J_{a+b} g|` for a causal `g`.
pub fn semigroup_error(g: &Field, a: f64, b: f64) -> Result<f64> {
    let composed = apply_js(&apply_js(g, a)?, b)?;
    rel_sup(&composed, &apply_js(g, a + b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_lattice, sample};
    use proptest::prelude::*;

    fn bump(x: &[f64], t: f64) -> f64 {
        if t > 0.0 {
            (-x.iter().map(|v| v * v).sum::<f64>() - 2.0 * (t - 2.0).powi(2)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let lat = make_lattice(1, 4.0, 16, 1.0, 2.0, 16).unwrap();
        let out = apply_js(&Field::zeros(lat), 0.5).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn rejects_non_causal_input() {
        let lat = make_lattice(1, 4.0, 16, 1.0, 2.0, 16).unwrap();
        let g = sample(&lat, |x, t| (-x[0] * x[0] - t * t).exp()).unwrap();
        assert!(matches!(apply_js(&g, 0.5), Err(Error::NonCausal(_))));
    }

    #[test]
    fn inverts_the_spectral_operator() {
        let lat = make_lattice(2, 8.0, 64, 2.0, 6.0, 64).unwrap();
        let phi = sample(&lat, |x, t| (-(x[0] * x[0] + x[1] * x[1]) - 2.0 * (t - 2.5).powi(2)).exp()).unwrap();
        for &s in &[0.3, 0.7] {
            let err = inversion_error(&phi, s).unwrap();
            assert!(err <= 1e-2, "s={s}: {err}");
        }
    }

    #[test]
    fn semigroup_composition() {
        let lat = make_lattice(2, 8.0, 32, 2.0, 6.0, 32).unwrap();
        let g = sample(&lat, bump).unwrap();
        assert!(semigroup_error(&g, 0.2, 0.3).unwrap() <= 1e-2);
    }

    #[test]
    fn lag_masses_integrate_the_time_weight() {
        // at s = 1 every heat stencil has unit mass, so the lag masses sum to the hat integrals
        let lat = make_lattice(1, 12.0, 128, 1.0, 4.0, 40).unwrap();
        let op = JsOperator::new(&lat, 1.0).unwrap();
        let total: f64 = (0..=lat.k).map(|m| op.lag_mass(m)).sum();
        // hat functions integrate 1 over [0, (K+1) ht] minus the half hat at the end
        assert!((total - lat.k as f64 * lat.ht()).abs() < 1e-9, "{total}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]
        #[test]
        fn positive_causal_and_monotone(seed in 0u64..1000, s in 0.2f64..1.0) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let lat = make_lattice(1, 4.0, 16, 1.0, 3.0, 16).unwrap();
            let start = lat.first_positive_time() * lat.spatial_len();
            let lower: Vec<f64> = (0..lat.len()).map(|i| if i < start { 0.0 } else { rng.random::<f64>() }).collect();
            let upper: Vec<f64> = lower.iter().enumerate().map(|(i, v)| if i < start { 0.0 } else { v + rng.random::<f64>() }).collect();
            let op = JsOperator::new(&lat, s).unwrap();
            let jl = op.apply(&Field::physical(lat, lower).unwrap()).unwrap();
            let ju = op.apply(&Field::physical(lat, upper).unwrap()).unwrap();
            let slack = 1e-12 * ju.max_abs();
            prop_assert!(jl.real().unwrap().iter().all(|&v| v >= -slack));
            prop_assert!(jl.real().unwrap().iter().zip(ju.real().unwrap()).all(|(a, b)| a <= &(b + slack)));
            prop_assert!(jl.real().unwrap()[..start].iter().all(|&v| v == 0.0));
        }
    }
}
