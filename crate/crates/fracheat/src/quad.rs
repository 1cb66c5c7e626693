//! Fixed Gauss rules on `[-1, 1]` and helpers to map them onto intervals.

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLaguerre, GaussLegendre};
use std::num::NonZeroUsize;

/// Nodes and weights of a fixed rule.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn degree(n: usize) -> NonZeroUsize {
    NonZeroUsize::new(n.max(2)).expect("positive degree")
}

fn exponent(v: f64) -> FiniteAboveNegOneF64 {
    FiniteAboveNegOneF64::new(v).expect("exponent must exceed -1")
}

impl Rule {
    /// Gauss-Legendre on `[-1, 1]`.
    pub fn legendre(n: usize) -> Self {
        let r = GaussLegendre::new(degree(n));
        Self::from_pairs(r.iter().copied())
    }

    /// Gauss-Jacobi for the weight `(1-x)^alpha (1+x)^beta` on `[-1, 1]`.
    pub fn jacobi(n: usize, alpha: f64, beta: f64) -> Self {
        if alpha == 0.0 && beta == 0.0 {
            return Self::legendre(n);
        }
        let r = GaussJacobi::new(degree(n), exponent(alpha), exponent(beta));
        Self::from_pairs(r.iter().copied())
    }

    /// Generalized Gauss-Laguerre for `x^alpha e^{-x}` on `[0, inf)`.
    pub fn laguerre(n: usize, alpha: f64) -> Self {
        let r = GaussLaguerre::new(degree(n), exponent(alpha));
        Self::from_pairs(r.iter().copied())
    }

    /// Composite-free trapezoid on the circle: `n` equispaced angles, weights `2pi/n`.
    pub fn periodic(n: usize) -> Self {
        let h = 2.0 * std::f64::consts::PI / n as f64;
        Self { nodes: (0..n).map(|k| k as f64 * h).collect(), weights: vec![h; n] }
    }

    fn from_pairs(it: impl Iterator<Item = (f64, f64)>) -> Self {
        let (nodes, weights) = it.unzip();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights of a `[-1,1]` rule affinely mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (mid + half * x, half * w))
    }

    /// Integral of `f` over `[a, b]` with the plain-weight mapping.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Rule for `int_0^len r^beta g(r) dr`: returns nodes `r` and weights that
    /// already contain `r^beta`.
    pub fn power_weighted(&self, len: f64, beta: f64) -> Vec<(f64, f64)> {
        // the rule is built for (1+x)^beta, r = len (1+x)/2
        let scale = (0.5 * len).powf(beta + 1.0);
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| (0.5 * len * (1.0 + x), scale * w)).collect()
    }
}

/// Product rule on the unit sphere of `R^dim`: unit vectors and weights
/// summing to the sphere area. Symmetric under `omega -> -omega`.
pub fn sphere_rule(dim: usize, n: usize) -> Vec<(Vec<f64>, f64)> {
    match dim {
        0 => Vec::new(),
        1 => vec![(vec![-1.0], 1.0), (vec![1.0], 1.0)],
        2 => {
            let m = n + n % 2;
            Rule::periodic(m).nodes.iter().map(|&a| (vec![a.cos(), a.sin()], 2.0 * std::f64::consts::PI / m as f64)).collect()
        }
        _ => {
            let expo = (dim as f64 - 3.0) / 2.0;
            let polar = Rule::jacobi((n / 2).max(4), expo, expo);
            let sub = sphere_rule(dim - 1, n);
            let mut out = Vec::with_capacity(polar.len() * sub.len());
            for (&c, &wc) in polar.nodes.iter().zip(&polar.weights) {
                let r = (1.0 - c * c).max(0.0).sqrt();
                for (v, wv) in &sub {
                    let mut p = Vec::with_capacity(dim);
                    p.push(c);
                    p.extend(v.iter().map(|x| r * x));
                    out.push((p, wc * wv));
                }
            }
            out
        }
    }
}

/// Sphere rule in polar form around the first axis, with Gauss-Legendre panels
/// in the polar angle graded toward the pole: `omega = cos(b) e_1 + sin(b) eta`.
pub fn polar_rule(dim: usize, per_panel: usize, sub_n: usize) -> Vec<(Vec<f64>, f64)> {
    use std::f64::consts::PI;
    let edges = [0.0, PI / 32.0, PI / 16.0, PI / 8.0, PI / 4.0, PI / 2.0, PI];
    let sub = sphere_rule(dim - 1, sub_n);
    let gl = Rule::legendre(per_panel);
    let mut out = Vec::new();
    for e in edges.windows(2) {
        for (b, wb) in gl.mapped(e[0], e[1]) {
            let (sb, cb) = b.sin_cos();
            let w = wb * sb.powi(dim as i32 - 2);
            for (eta, we) in &sub {
                let mut p = Vec::with_capacity(dim);
                p.push(cb);
                p.extend(eta.iter().map(|v| sb * v));
                out.push((p, w * we));
            }
        }
    }
    out
}

/// Area of the unit sphere in `R^dim`.
pub fn sphere_area(dim: usize) -> f64 {
    let n = dim as f64;
    2.0 * std::f64::consts::PI.powf(n / 2.0) / crate::spectral_constants::gamma_fn(n / 2.0).expect("positive argument")
}

/// Householder reflection mapping the first basis vector onto the unit vector `dir`.
pub fn frame_to(dir: &[f64]) -> impl Fn(&[f64], &mut [f64]) + '_ {
    let mut v: Vec<f64> = dir.iter().map(|x| -x).collect();
    v[0] += 1.0;
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    move |p: &[f64], out: &mut [f64]| {
        if norm2 < 1e-30 {
            out[..p.len()].copy_from_slice(p);
            return;
        }
        let dot: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
        for i in 0..p.len() {
            out[i] = p[i] - 2.0 * dot / norm2 * v[i];
        }
    }
}

/// Geometric panel edges `[lo, lo q, lo q^2, ..., hi]` with ratio at most `q`.
pub fn geometric_edges(lo: f64, hi: f64, q: f64) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && q > 1.0);
    let count = ((hi / lo).ln() / q.ln()).ceil().max(1.0) as usize;
    let ratio = (hi / lo).powf(1.0 / count as f64);
    let mut edges = Vec::with_capacity(count + 1);
    let mut x = lo;
    edges.push(lo);
    for _ in 1..count {
        x *= ratio;
        edges.push(x);
    }
    edges.push(hi);
    edges
}

/// Quintic smoothstep: 0 for `u <= 0`, 1 for `u >= 1`, C^2 in between.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    }
}

/// C-infinity transition: 0 for `u <= 0`, 1 for `u >= 1`, all derivatives
/// vanishing at both ends.
pub fn smooth_transition(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / u).exp();
        let b = (-1.0 / (1.0 - u)).exp();
        a / (a + b)
    }
}

/// Derivative of [`smoothstep`].
pub fn smoothstep_deriv(u: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        0.0
    } else {
        30.0 * u * u * (1.0 - u) * (1.0 - u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = Rule::legendre(6);
        assert_relative_eq!(r.integrate(0.0, 2.0, |x| x.powi(5)), 64.0 / 6.0, max_relative = 1e-13);
    }

    #[test]
    fn power_weighted_is_exact_for_powers() {
        let r = Rule::jacobi(8, 0.0, -0.4);
        let val: f64 = r.power_weighted(3.0, -0.4).iter().map(|(x, w)| w * x * x).sum();
        assert_relative_eq!(val, 3f64.powf(2.6) / 2.6, max_relative = 1e-12);
    }

    #[test]
    fn laguerre_gives_gamma() {
        let r = Rule::laguerre(12, 0.7);
        let total: f64 = r.weights.iter().sum();
        assert_relative_eq!(total, crate::spectral_constants::gamma_fn(1.7).unwrap(), max_relative = 1e-12);
    }

    #[test]
    fn geometric_edges_cover() {
        let e = geometric_edges(1e-6, 1.0, 2.0);
        assert_eq!(e[0], 1e-6);
        assert_eq!(*e.last().unwrap(), 1.0);
        assert!(e.windows(2).all(|w| w[1] / w[0] <= 2.0 + 1e-12));
    }

    #[test]
    fn sphere_rules_integrate_moments() {
        for dim in 1..=4 {
            let rule = sphere_rule(dim, 16);
            let area: f64 = rule.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(area, sphere_area(dim), max_relative = 1e-12);
            // int x_0^2 = area / dim
            let second: f64 = rule.iter().map(|(p, w)| w * p[0] * p[0]).sum();
            assert_relative_eq!(second, sphere_area(dim) / dim as f64, max_relative = 1e-12);
        }
    }

    #[test]
    fn polar_rule_integrates_moments() {
        for dim in 2..=4 {
            let rule = polar_rule(dim, 8, 16);
            let area: f64 = rule.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(area, sphere_area(dim), max_relative = 1e-12);
            // the polar angle integrand is smooth but not polynomial
            let second: f64 = rule.iter().map(|(p, w)| w * p[0] * p[0]).sum();
            assert_relative_eq!(second, sphere_area(dim) / dim as f64, max_relative = 1e-9);
        }
    }

    #[test]
    fn frame_maps_first_axis() {
        let dir = [0.6, 0.0, 0.8];
        let map = frame_to(&dir);
        let mut out = [0.0; 3];
        map(&[1.0, 0.0, 0.0], &mut out);
        for i in 0..3 {
            assert_relative_eq!(out[i], dir[i], epsilon = 1e-15);
        }
        map(&[0.0, 1.0, 0.0], &mut out);
        assert_relative_eq!(out.iter().map(|x| x * x).sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn transition_is_monotone_and_symmetric() {
        let mut prev = 0.0;
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let v = smooth_transition(u);
            assert!(v >= prev);
            assert_relative_eq!(v + smooth_transition(1.0 - u), 1.0, epsilon = 1e-14);
            prev = v;
        }
    }

    #[test]
    fn smoothstep_ends() {
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(2.0), 1.0);
        assert_relative_eq!(smoothstep(0.5), 0.5, epsilon = 1e-15);
    }
}
