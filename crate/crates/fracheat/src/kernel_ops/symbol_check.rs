//! Numerical space-time transform of the inverse kernel against its closed form.

use crate::error::Result;
use crate::lattice::Lattice;
use crate::quad::{geometric_edges, Rule};
use crate::spectral_constants::gamma_fn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest `|xi|` and `|theta|` compared.
pub const SYMBOL_BOX: f64 = 4.0;
const LAGUERRE_NODES: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymbolCheck {
    pub max_rel_error: f64,
    pub samples: usize,
    pub worst_xi: f64,
    pub worst_theta: f64,
}

/// Closed form `2^N pi^{N/2} Gamma(s) (i theta + |xi|^2)^{-s}`.
pub fn kernel_symbol_closed_form(dim: usize, s: f64, xi2: f64, theta: f64) -> Result<Complex64> {
    let omega = Complex64::new(xi2, theta);
    let c = 2f64.powi(dim as i32) * PI.powf(dim as f64 / 2.0) * gamma_fn(s)?;
    Ok(c * omega.powf(-s))
}

/// Transform of `chi_{tau>0} e^{-|z|^2/4tau} tau^{s-1-N/2}` at `(xi, theta)`.
///
/// The spatial Gaussian moment is taken in closed form, `(4 pi tau)^{N/2}
/// e^{-tau |xi|^2}`. The time integral runs over the lattice slabs up to `T`
/// (first slab through `tau = h v^{1/s}` on graded panels), and the tail
/// beyond `T` along the rotated ray `tau = T + v/omega` with Gauss-Laguerre.
pub struct KernelTransform {
    dim: usize,
    s: f64,
    t_end: f64,
    first: Vec<(f64, f64)>,
    slabs: Vec<(f64, f64)>,
    tail: Option<Rule>,
}

impl KernelTransform {
    pub fn new(dim: usize, s: f64, ht: f64, t_end: f64) -> Self {
        Self::build(dim, s, ht, t_end, true)
    }

    /// Transform of the kernel cut off at `tau = T`, without the tail term.
    pub fn truncated(dim: usize, s: f64, ht: f64, t_end: f64) -> Self {
        Self::build(dim, s, ht, t_end, false)
    }

    fn build(dim: usize, s: f64, ht: f64, t_end: f64, with_tail: bool) -> Self {
        let gl = Rule::legendre(12);
        let slabs_count = (t_end / ht).round().max(1.0) as usize;
        let h = t_end / slabs_count as f64;
        let mut first = Vec::new();
        for w in geometric_edges(1e-12, 1.0, 4.0).windows(2) {
            for (v, wv) in gl.mapped(w[0], w[1]) {
                // tau^{s-1} dtau = ht^s / s dv
                first.push((h * v.powf(1.0 / s), wv * h.powf(s) / s));
            }
        }
        let mut slabs = Vec::new();
        for j in 1..slabs_count {
            for (tau, wt) in gl.mapped(j as f64 * h, (j + 1) as f64 * h) {
                slabs.push((tau, wt * tau.powf(s - 1.0)));
            }
        }
        Self { dim, s, t_end, first, slabs, tail: with_tail.then(|| Rule::laguerre(LAGUERRE_NODES, 0.0)) }
    }

    pub fn eval(&self, xi2: f64, theta: f64) -> Complex64 {
        let omega = Complex64::new(xi2, theta);
        let mut acc = Complex64::new(0.0, 0.0);
        for &(tau, w) in self.first.iter().chain(&self.slabs) {
            acc += w * (-omega * tau).exp();
        }
        if let Some(rule) = &self.tail {
            let t = self.t_end;
            let mut tail = Complex64::new(0.0, 0.0);
            for (&v, &w) in rule.nodes.iter().zip(&rule.weights) {
                tail += w * (Complex64::new(t, 0.0) + v / omega).powf(self.s - 1.0);
            }
            acc += (-omega * t).exp() / omega * tail;
        }
        acc * (4.0 * PI).powf(self.dim as f64 / 2.0)
    }
}

/// Worst relative error over dual-grid frequencies with `|xi|, |theta| <= 4`
/// (origin excluded), using the lattice's `ht`, `T` and spatial dual grid.
pub fn symbol_of_kernel_check(s: f64, lat: &Lattice) -> Result<SymbolCheck> {
    compare_on_box(&KernelTransform::new(lat.dim, s, lat.ht(), lat.t_end), s, lat)
}

/// Same comparison for the kernel cut off at the horizon `T`; this error
/// carries the truncation and shrinks as `T` grows.
pub fn truncated_symbol_check(s: f64, lat: &Lattice) -> Result<SymbolCheck> {
    compare_on_box(&KernelTransform::truncated(lat.dim, s, lat.ht(), lat.t_end), s, lat)
}

fn compare_on_box(transform: &KernelTransform, s: f64, lat: &Lattice) -> Result<SymbolCheck> {
    let axis: Vec<f64> = (0..lat.m).map(|j| lat.space_frequency(j, lat.m)).filter(|x| x.abs() <= SYMBOL_BOX).collect();
    let thetas: Vec<f64> = (0..lat.k).map(|k| lat.time_frequency(k, lat.k)).filter(|t| t.abs() <= SYMBOL_BOX).collect();
    // enumerate |xi|^2 over the spatial dual grid inside the ball
    let mut xi2s = vec![0.0f64];
    for _ in 0..lat.dim {
        let mut next = Vec::new();
        for &base in &xi2s {
            for &x in &axis {
                let v = base + x * x;
                if v <= SYMBOL_BOX * SYMBOL_BOX {
                    next.push(v);
                }
            }
        }
        xi2s = next;
    }
    xi2s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xi2s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    let mut worst = SymbolCheck { max_rel_error: 0.0, samples: 0, worst_xi: 0.0, worst_theta: 0.0 };
    for &xi2 in &xi2s {
        for &theta in &thetas {
            if xi2 == 0.0 && theta == 0.0 {
                continue;
            }
            let exact = kernel_symbol_closed_form(lat.dim, s, xi2, theta)?;
            let err = (transform.eval(xi2, theta) - exact).norm() / exact.norm();
            worst.samples += 1;
            if err > worst.max_rel_error {
                worst.max_rel_error = err;
                worst.worst_xi = xi2.sqrt();
                worst.worst_theta = theta;
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use approx::assert_relative_eq;

    #[test]
    fn closed_form_at_unit_time_frequency() {
        // s = 1/2, xi = 0, theta = 1: 4 pi sqrt(pi) i^{-1/2}
        let v = kernel_symbol_closed_form(2, 0.5, 0.0, 1.0).unwrap();
        let modulus = 4.0 * PI * PI.sqrt();
        assert_relative_eq!(v.re, modulus * (PI / 4.0).cos(), max_relative = 1e-13);
        assert_relative_eq!(v.im, -modulus * (PI / 4.0).sin(), max_relative = 1e-13);
    }

    #[test]
    fn transform_matches_on_the_box() {
        let lat = make_lattice(2, 8.0, 32, 2.0, 6.0, 32).unwrap();
        for &s in &[0.3, 0.5, 0.7] {
            let check = symbol_of_kernel_check(s, &lat).unwrap();
            assert!(check.samples > 100);
            assert!(check.max_rel_error <= 1e-3, "s={s}: {check:?}");
        }
    }

    #[test]
    fn truncation_error_shrinks_with_horizon() {
        let freqs = [(0.0, 0.8), (0.15, 0.0), (1.0, 1.0), (0.4, -2.0)];
        let worst = |t_end: f64| {
            let tr = KernelTransform::truncated(2, 0.5, 0.125, t_end);
            freqs
                .iter()
                .map(|&(x2, th)| {
                    let exact = kernel_symbol_closed_form(2, 0.5, x2, th).unwrap();
                    (tr.eval(x2, th) - exact).norm() / exact.norm()
                })
                .fold(0.0, f64::max)
        };
        let (coarse, fine) = (worst(6.0), worst(14.0));
        assert!(fine < coarse, "{fine} !< {coarse}");
    }
}
