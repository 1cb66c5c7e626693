//! Gamma-function constants, critical exponents and the inversion of the
//! Gamma quotient that defines the singularity exponent.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Relative tolerance used to label `p == p_plus` as the open critical case.
pub const CRITICAL_TIE_TOL: f64 = 1e-12;

/// Gamma function (Lanczos, g = 7) with reflection below 1/2.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite {x}")));
    }
    if x <= 0.0 && x == x.round() {
        return Err(Error::Pole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
    }
}

fn check_dim_order(dim: usize, s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("order s = {s} outside (0, 1]")));
    }
    if (dim as f64) <= 2.0 * s {
        return Err(Error::Domain(format!("need N > 2s, got N = {dim}, s = {s}")));
    }
    Ok(())
}

/// Sharp constant of the fractional Hardy inequality.
pub fn lambda_max(dim: usize, s: f64) -> Result<f64> {
    check_dim_order(dim, s)?;
    let n = dim as f64;
    let ratio = gamma_fn((n + 2.0 * s) / 4.0)? / gamma_fn((n - 2.0 * s) / 4.0)?;
    Ok(4f64.powf(s) * ratio * ratio)
}

/// Upper end of the admissible `alpha` range, `(N - 2s)/2`.
pub fn alpha_limit(dim: usize, s: f64) -> f64 {
    (dim as f64 - 2.0 * s) / 2.0
}

/// The decreasing Gamma quotient mapping `alpha` to the Hardy coefficient.
pub fn upsilon(alpha: f64, dim: usize, s: f64) -> Result<f64> {
    check_dim_order(dim, s)?;
    let top = alpha_limit(dim, s);
    if !(alpha >= 0.0 && alpha < top) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [0, {top})")));
    }
    let n = dim as f64;
    let num = gamma_fn((n + 2.0 * s + 2.0 * alpha) / 4.0)? * gamma_fn((n + 2.0 * s - 2.0 * alpha) / 4.0)?;
    let den = gamma_fn((n - 2.0 * s - 2.0 * alpha) / 4.0)? * gamma_fn((n - 2.0 * s + 2.0 * alpha) / 4.0)?;
    Ok(4f64.powf(s) * num / den)
}

/// Bisection inverse of [`upsilon`] on `[0, (N-2s)/2 - 1e-14]`.
pub fn upsilon_inv(lambda: f64, dim: usize, s: f64) -> Result<f64> {
    let top_lambda = lambda_max(dim, s)?;
    if !(lambda > 0.0 && lambda <= top_lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} outside (0, {top_lambda}]")));
    }
    if lambda == top_lambda {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = alpha_limit(dim, s) - 1e-14;
    if upsilon(hi, dim, s)? >= lambda {
        return Ok(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if upsilon(mid, dim, s)? > lambda {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Singularity exponent `mu(lambda) = (N-2s)/2 - alpha_lambda`.
pub fn mu_of(lambda: f64, dim: usize, s: f64) -> Result<f64> {
    Ok(alpha_limit(dim, s) - upsilon_inv(lambda, dim, s)?)
}

/// Extension constant relating the weighted Neumann trace to the operator.
pub fn kappa_s(s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("kappa_s needs s in (0,1), got {s}")));
    }
    Ok(gamma_fn(1.0 - s)? / (2f64.powf(2.0 * s - 1.0) * gamma_fn(s)?))
}

/// Normalization constant of the singular-integral fractional Laplacian.
pub fn a_ns(dim: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("a_Ns needs s in (0,1), got {s}")));
    }
    let n = dim as f64;
    Ok(2f64.powf(2.0 * s - 1.0) * PI.powf(-n / 2.0) * gamma_fn((n + 2.0 * s) / 2.0)? / gamma_fn(-s)?.abs())
}

/// A full problem instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub dim: usize,
    pub s: f64,
    pub lambda: f64,
    pub p: f64,
}

impl ProblemSpec {
    pub fn new(dim: usize, s: f64, lambda: f64, p: f64) -> Result<Self> {
        let spec = Self { dim, s, lambda, p };
        spec.validate()?;
        Ok(spec)
    }

    /// Build from a fraction of the sharp Hardy constant.
    pub fn from_fraction(dim: usize, s: f64, fraction: f64, p: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction < 1.0) {
            return Err(Error::Domain(format!("lambda fraction {fraction} outside (0,1)")));
        }
        Self::new(dim, s, fraction * lambda_max(dim, s)?, p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Domain(format!("dimension {} < 2", self.dim)));
        }
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(Error::Domain(format!("s = {} outside (0,1)", self.s)));
        }
        let top = lambda_max(self.dim, self.s)?;
        if !(self.lambda > 0.0 && self.lambda < top) {
            return Err(Error::Domain(format!("lambda = {} outside (0, {top})", self.lambda)));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::Domain(format!("p = {} must exceed 1", self.p)));
        }
        Ok(())
    }
}

/// Every derived constant of a parameter point.
#[allow(non_snake_case)]
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentBundle {
    pub lambda_max: f64,
    pub alpha: f64,
    pub mu: f64,
    pub p_plus: f64,
    pub fujita_F: f64,
    pub fujita_F_tilde: f64,
    pub fujita_F0: f64,
    /// Absent at s = 1, where the extension constant degenerates.
    pub kappa_s: Option<f64>,
    /// Absent at s = 1.
    pub a_Ns: Option<f64>,
}

/// Exponents for `(N, s, lambda)` with `s` in `(0, 1]` and `lambda` in `(0, Lambda]`.
pub fn exponents_for(dim: usize, s: f64, lambda: f64) -> Result<ExponentBundle> {
    let top = lambda_max(dim, s)?;
    let alpha = upsilon_inv(lambda, dim, s)?;
    let n = dim as f64;
    let mu = alpha_limit(dim, s) - alpha;
    let (kappa, a) = if s < 1.0 { (Some(kappa_s(s)?), Some(a_ns(dim, s)?)) } else { (None, None) };
    Ok(ExponentBundle {
        lambda_max: top,
        alpha,
        mu,
        p_plus: 1.0 + 2.0 * s / mu,
        fujita_F: 1.0 + 2.0 * s / (n + 2.0 - 2.0 * s - mu),
        fujita_F_tilde: 1.0 + 2.0 * s / (n - mu),
        fujita_F0: 1.0 + 2.0 * s / (n + 2.0 - 2.0 * s),
        kappa_s: kappa,
        a_Ns: a,
    })
}

pub fn exponents(spec: &ProblemSpec) -> Result<ExponentBundle> {
    spec.validate()?;
    exponents_for(spec.dim, spec.s, spec.lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    BlowUp,
    ConditionalGlobal,
    NonExistence,
    CriticalOpen,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            RegimeLabel::BlowUp => "BlowUp",
            RegimeLabel::ConditionalGlobal => "ConditionalGlobal",
            RegimeLabel::NonExistence => "NonExistence",
            RegimeLabel::CriticalOpen => "CriticalOpen",
        };
        f.write_str(name)
    }
}

pub fn classify_regime(p: f64, bundle: &ExponentBundle) -> RegimeLabel {
    if (p - bundle.p_plus).abs() <= CRITICAL_TIE_TOL * bundle.p_plus {
        RegimeLabel::CriticalOpen
    } else if p > bundle.p_plus {
        RegimeLabel::NonExistence
    } else if p <= bundle.fujita_F * (1.0 + CRITICAL_TIE_TOL) {
        RegimeLabel::BlowUp
    } else {
        RegimeLabel::ConditionalGlobal
    }
}
