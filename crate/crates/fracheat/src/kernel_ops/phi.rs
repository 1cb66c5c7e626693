//! The homogeneous profile `Phi_lambda(x, y)`: the elliptic extension of
//! `|x|^{-mu}` through the Poisson kernel `p y^{2s} (|x|^2 + y^2)^{-(N+2s)/2}`.
//!
//! With `r = |x|`, `Phi = r^{-mu} + int P(x - xi, y) (|xi|^{-mu} - r^{-mu}) dxi`,
//! since the kernel has unit mass. The integral is done in polar coordinates
//! around the origin: Jacobi rules absorb `|xi|^{-mu}` at `rho = 0` and the two
//! power tails at infinity, and Gauss-Legendre panels are graded toward
//! `rho = r` and toward the polar angle `0`, where the kernel peaks for small `y`.

use crate::error::{Error, Result};
use crate::quad::{sphere_area, Rule};
use crate::spectral_constants::{alpha_limit, gamma_fn, kappa_s, lambda_max, mu_of};
use std::f64::consts::PI;

const PANEL_NODES: usize = 10;
const JACOBI_NODES: usize = 24;

/// Numerical `Phi_lambda` at one `(N, s, lambda)`.
#[derive(Debug, Clone)]
pub struct PhiProfile {
    pub dim: usize,
    pub s: f64,
    pub lambda: f64,
    pub mu: f64,
    poisson: f64,
    sub_area: f64,
    panel: Rule,
    core_singular: Rule,
    core_smooth: Rule,
    tail_power: Rule,
    tail_const: Rule,
}

/// Profile for `lambda in (0, Lambda_{N,s})`.
pub fn phi_profile(lambda: f64, dim: usize, s: f64) -> Result<PhiProfile> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("order s = {s} outside (0, 1)")));
    }
    if dim < 2 {
        return Err(Error::Domain("the profile needs N >= 2".into()));
    }
    let top = lambda_max(dim, s)?;
    if !(lambda > 0.0 && lambda < top) {
        return Err(Error::Domain(format!("lambda = {lambda} outside (0, {top})")));
    }
    let n = dim as f64;
    let mu = mu_of(lambda, dim, s)?;
    Ok(PhiProfile {
        dim,
        s,
        lambda,
        mu,
        poisson: gamma_fn((n + 2.0 * s) / 2.0)? / (PI.powf(n / 2.0) * gamma_fn(s)?),
        sub_area: sphere_area(dim - 1),
        panel: Rule::legendre(PANEL_NODES),
        core_singular: Rule::jacobi(JACOBI_NODES, 0.0, n - 1.0 - mu),
        core_smooth: Rule::legendre(JACOBI_NODES),
        tail_power: Rule::jacobi(JACOBI_NODES, 0.0, mu + 2.0 * s - 1.0),
        tail_const: Rule::jacobi(JACOBI_NODES, 0.0, 2.0 * s - 1.0),
    })
}

/// Panel edges on `[lo, hi]` graded geometrically toward `lo` from width `first`.
fn graded(lo: f64, hi: f64, first: f64) -> Vec<f64> {
    let mut edges = vec![lo];
    let mut w = first;
    while lo + w < hi {
        edges.push(lo + w);
        w *= 2.0;
    }
    edges.push(hi);
    edges
}

impl PhiProfile {
    /// `A(rho) = int_{S^{N-1}} P(x - rho omega, y) domega` for `|x| = r`.
    fn shell(&self, r: f64, rho: f64, y: f64) -> f64 {
        let expo = -(self.dim as f64 + 2.0 * self.s) / 2.0;
        let base = r * r + rho * rho + y * y;
        // the kernel peaks at angle 0 with width about |r - rho| + y over r
        let width = (((r - rho).abs() + y) / r.max(rho)).min(PI);
        let edges = graded(0.0, PI, 0.05 * width);
        let mut acc = 0.0;
        for e in edges.windows(2) {
            for (b, wb) in self.panel.mapped(e[0], e[1]) {
                let d2 = (base - 2.0 * r * rho * b.cos()).max(0.0);
                acc += wb * b.sin().powi(self.dim as i32 - 2) * d2.powf(expo);
            }
        }
        self.poisson * y.powf(2.0 * self.s) * self.sub_area * acc
    }

    /// `Phi(x, y)`; exactly `|x|^{-mu}` on `y = 0`.
    pub fn eval(&self, x: &[f64], y: f64) -> Result<f64> {
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        self.eval_radial(r, y)
    }

    /// `Phi` as a function of `r = |x|` and `y`.
    pub fn eval_radial(&self, r: f64, y: f64) -> Result<f64> {
        if !(r >= 0.0 && y >= 0.0 && r.is_finite() && y.is_finite()) || (r == 0.0 && y == 0.0) {
            return Err(Error::Domain(format!("profile undefined at (|x|, y) = ({r}, {y})")));
        }
        if y == 0.0 {
            return Ok(r.powf(-self.mu));
        }
        let n = self.dim as f64;
        if r == 0.0 {
            let (a, b) = ((n - self.mu) / 2.0, (self.mu + 2.0 * self.s) / 2.0);
            let beta = gamma_fn(a)? * gamma_fn(b)? / gamma_fn(a + b)?;
            return Ok(y.powf(-self.mu) * self.poisson * sphere_area(self.dim) * beta / 2.0);
        }
        if y > r {
            return self.direct(r, y);
        }
        let mu = self.mu;
        let far = r.powf(-mu);
        let mut total = 0.0;
        // core [0, r/2]: the rho^{-mu} and r^{-mu} parts on their own rules
        let half = 0.5 * r;
        for (rho, w) in self.core_singular.power_weighted(half, n - 1.0 - mu) {
            total += w * self.shell(r, rho, y);
        }
        for (rho, w) in self.core_smooth.mapped(0.0, half) {
            total -= w * rho.powf(n - 1.0) * far * self.shell(r, rho, y);
        }
        // [r/2, 2r] graded toward rho = r
        let first = (0.05 * y).min(0.25 * r);
        let mut edges: Vec<f64> = graded(r, 2.0 * r, first);
        let below: Vec<f64> = graded(0.0, half, first).into_iter().map(|d| r - d).collect();
        edges.extend(below);
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        edges.dedup();
        for e in edges.windows(2) {
            for (rho, w) in self.panel.mapped(e[0], e[1]) {
                total += w * rho.powf(n - 1.0) * (rho.powf(-mu) - far) * self.shell(r, rho, y);
            }
        }
        // tail [2r, inf) with rho = 2r/u: two power laws at u -> 0
        let outer = 2.0 * r;
        let jac = |u: f64| outer / (u * u);
        let e1 = mu + 2.0 * self.s - 1.0;
        for (u, w) in self.tail_power.power_weighted(1.0, e1) {
            let rho = outer / u;
            total += w * rho.powf(n - 1.0 - mu) * self.shell(r, rho, y) * jac(u) / u.powf(e1);
        }
        let e2 = 2.0 * self.s - 1.0;
        for (u, w) in self.tail_const.power_weighted(1.0, e2) {
            let rho = outer / u;
            total -= w * rho.powf(n - 1.0) * far * self.shell(r, rho, y) * jac(u) / u.powf(e2);
        }
        let value = far + total;
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::Quadrature(format!("non-finite profile at (|x|, y) = ({r}, {y})")))
        }
    }

    /// Without subtraction, for `y > |x|`: the kernel is smooth on the scale
    /// `l = sqrt(r^2 + y^2)`.
    fn direct(&self, r: f64, y: f64) -> Result<f64> {
        let n = self.dim as f64;
        let mu = self.mu;
        let scale = (r * r + y * y).sqrt();
        let mut total = 0.0;
        for (rho, w) in self.core_singular.power_weighted(0.5 * scale, n - 1.0 - mu) {
            total += w * self.shell(r, rho, y);
        }
        let edges = [0.5, 0.75, 1.0, 1.25, 1.5, 2.0];
        for e in edges.windows(2) {
            for (rho, w) in self.panel.mapped(e[0] * scale, e[1] * scale) {
                total += w * rho.powf(n - 1.0 - mu) * self.shell(r, rho, y);
            }
        }
        let outer = 2.0 * scale;
        let e1 = mu + 2.0 * self.s - 1.0;
        for (u, w) in self.tail_power.power_weighted(1.0, e1) {
            let rho = outer / u;
            total += w * rho.powf(n - 1.0 - mu) * self.shell(r, rho, y) * outer / (u * u) / u.powf(e1);
        }
        if total.is_finite() {
            Ok(total)
        } else {
            Err(Error::Quadrature(format!("non-finite profile at (|x|, y) = ({r}, {y})")))
        }
    }

    /// `-y^{1-2s} dPhi/dy` at `y -> 0`. Near the boundary
    /// `Phi = |x|^{-mu} - c y^{2s} + d y^2 + ...`; the values at `y` and `y/2`
    /// eliminate `d`, and the estimate returned is `2s c`.
    pub fn neumann(&self, r: f64, y: f64) -> Result<f64> {
        let trace = r.powf(-self.mu);
        let two_s = 2.0 * self.s;
        let (d1, d2) = (self.eval_radial(r, y)? - trace, self.eval_radial(r, 0.5 * y)? - trace);
        // d1 = -c y^{2s} + d y^2, d2 = -c (y/2)^{2s} + d y^2 / 4
        let q = 0.5f64.powf(two_s);
        let c = -(d1 - 4.0 * d2) / (y.powf(two_s) * (1.0 - 4.0 * q));
        Ok(two_s * c)
    }

    /// The Neumann value the profile must carry, `kappa_s lambda |x|^{-2s-mu}`.
    pub fn neumann_exact(&self, r: f64) -> Result<f64> {
        Ok(kappa_s(self.s)? * self.lambda * r.powf(-2.0 * self.s - self.mu))
    }

    /// Largest exponent `(N-2s)/2` the weight may take.
    pub fn mu_ceiling(&self) -> f64 {
        alpha_limit(self.dim, self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn profile(dim: usize, s: f64) -> PhiProfile {
        phi_profile(lambda_max(dim, s).unwrap() / 2.0, dim, s).unwrap()
    }

    /// Points on the unit half circle in the `(|x|, y)` plane.
    fn half_circle(count: usize) -> Vec<(f64, f64)> {
        (0..=count).map(|i| (i as f64 / count as f64) * std::f64::consts::FRAC_PI_2).map(|a| (a.cos(), a.sin())).collect()
    }

    #[test]
    fn trace_is_the_power() {
        let p = profile(2, 0.5);
        assert_eq!(p.eval(&[0.3, 0.4], 0.0).unwrap(), 0.5f64.powf(-p.mu));
        assert_relative_eq!(p.eval(&[0.3, 0.4], 1e-7).unwrap(), 0.5f64.powf(-p.mu), max_relative = 1e-5);
    }

    #[test]
    fn homogeneity_and_euler_identity() {
        for &(dim, s) in &[(2usize, 0.5), (3, 0.3), (3, 0.8)] {
            let p = profile(dim, s);
            for (r, y) in half_circle(8) {
                let v = p.eval_radial(r, y).unwrap();
                assert_relative_eq!(p.eval_radial(2.0 * r, 2.0 * y).unwrap() * 2f64.powf(p.mu), v, max_relative = 1e-2);
                let h = 1e-3;
                let slope = (p.eval_radial(r * (1.0 + h), y * (1.0 + h)).unwrap() - p.eval_radial(r * (1.0 - h), y * (1.0 - h)).unwrap()) / (2.0 * h);
                assert_relative_eq!(slope, -p.mu * v, max_relative = 2e-2);
            }
        }
    }

    #[test]
    fn two_sided_power_bounds() {
        let p = profile(3, 0.5);
        let values: Vec<f64> = half_circle(24).into_iter().map(|(r, y)| p.eval_radial(r, y).unwrap()).collect();
        let lo = values.iter().cloned().fold(f64::MAX, f64::min);
        let hi = values.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.5 && hi <= 1.0 + 1e-9, "[{lo}, {hi}]");
    }

    #[test]
    fn axis_value_is_continuous() {
        let p = profile(2, 0.5);
        assert_relative_eq!(p.eval_radial(0.0, 1.0).unwrap(), p.eval_radial(1e-6, 1.0).unwrap(), max_relative = 1e-6);
    }

    #[test]
    fn neumann_trace_carries_the_potential() {
        for &(dim, s) in &[(2usize, 0.5), (3, 0.5), (2, 0.3), (3, 0.8)] {
            let p = profile(dim, s);
            assert_relative_eq!(p.neumann(1.0, 1e-3).unwrap(), p.neumann_exact(1.0).unwrap(), max_relative = 1e-4);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(phi_profile(0.0, 2, 0.5).is_err());
        assert!(phi_profile(lambda_max(2, 0.5).unwrap(), 2, 0.5).is_err());
        assert!(phi_profile(0.1, 1, 0.25).is_err());
        assert!(profile(2, 0.5).eval_radial(0.0, 0.0).is_err());
    }
}
