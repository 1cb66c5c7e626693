//! Identity checks, each reported as `allowed - observed` relative errors.

use super::families::TestFunction;
use super::{CheckConfig, CheckReport};
use crate::error::Result;
use crate::kernel_ops::{adjoint_gap, extension_check, ground_state_residual, inversion_error, radial_flap_check, semigroup_error, symbol_of_kernel_check};
use crate::lattice::{make_lattice, sample};
use crate::spectral_constants::{lambda_max, mu_of};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub const SYMBOL_TOL: f64 = 1e-3;
pub const INVERSION_TOL: f64 = 1e-2;
pub const ADJOINT_TOL: f64 = 1e-8;
pub const GROUND_STATE_TOL: f64 = 5e-2;
pub const FLAP_TOL: f64 = 5e-2;
pub const TRACE_TOL: f64 = 2e-2;
pub const NEUMANN_TOL: f64 = 5e-2;

fn orders(cfg: &CheckConfig) -> Vec<f64> {
    cfg.s.map(|s| vec![s]).unwrap_or_else(|| vec![0.3, 0.5, 0.7])
}

fn gaussian_bump(x: &[f64], t: f64, peak: f64) -> f64 {
    (-x.iter().map(|v| v * v).sum::<f64>() - 2.0 * (t - peak).powi(2)).exp()
}

pub(super) fn symbol(cfg: &CheckConfig) -> Result<CheckReport> {
    let lat = make_lattice(cfg.dim_or(2), 8.0, 32, 2.0, 6.0, 32)?;
    let mut errors = Vec::new();
    for s in orders(cfg) {
        errors.push((s, symbol_of_kernel_check(s, &lat)?.max_rel_error));
    }
    let margins: Vec<f64> = errors.iter().map(|e| SYMBOL_TOL - e.1).collect();
    Ok(CheckReport::from_margins("symbol", &margins, 0.0, json!({"lattice": lat, "order_and_error": errors})))
}

pub(super) fn inversion(cfg: &CheckConfig) -> Result<CheckReport> {
    let lat = make_lattice(cfg.dim_or(2), 8.0, 64, 2.0, 6.0, 64)?;
    let phi = sample(&lat, |x, t| gaussian_bump(x, t, 2.5))?;
    let mut errors = Vec::new();
    for s in orders(cfg) {
        errors.push((s, inversion_error(&phi, s)?));
    }
    let margins: Vec<f64> = errors.iter().map(|e| INVERSION_TOL - e.1).collect();
    Ok(CheckReport::from_margins("inversion", &margins, 0.0, json!({"lattice": lat, "order_and_error": errors})))
}

pub(super) fn semigroup(cfg: &CheckConfig) -> Result<CheckReport> {
    let lat = make_lattice(cfg.dim_or(2), 8.0, 64, 2.0, 6.0, 64)?;
    let g = sample(&lat, |x, t| if t > 0.0 { gaussian_bump(x, t, 2.0) } else { 0.0 })?;
    let splits = [(0.3, 0.2), (0.1, 0.4), (0.25, 0.25)];
    let mut errors = Vec::new();
    for (a, b) in splits {
        errors.push((a, b, semigroup_error(&g, a, b)?));
    }
    let margins: Vec<f64> = errors.iter().map(|e| INVERSION_TOL - e.2).collect();
    Ok(CheckReport::from_margins("semigroup", &margins, 0.0, json!({"lattice": lat, "split_and_error": errors})))
}

/// `<H^s f, g> = <f~, H^s g~>` on seeded pairs, at a random order per pair.
pub(super) fn adjoint(cfg: &CheckConfig, rng: &mut ChaCha8Rng) -> Result<CheckReport> {
    use rand::Rng;
    let dim = cfg.dim_or(2);
    // the slice at t = T has no reflected partner, so the window must outlast every test function
    let lat = make_lattice(dim, 6.0, 32, 8.0, 8.0, 64)?;
    let mut margins = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let f = TestFunction::draw(rng, i, dim + 1, 1.0);
        let g = TestFunction::draw(rng, i + 1, dim + 1, 1.0);
        let s = cfg.s.unwrap_or_else(|| rng.random_range(0.1..0.95));
        let gap = adjoint_gap(&lat, &|x, t| f.value_at(x, t), &|x, t| g.value_at(x, t), s)?;
        margins.push(ADJOINT_TOL - gap);
    }
    Ok(CheckReport::from_margins("adjoint", &margins, 0.0, json!({"lattice": lat})))
}

/// Residual on the annulus at `M = 64` and `M = 128`; the finer one must meet
/// the tolerance and improve on the coarser one.
pub(super) fn ground_state(cfg: &CheckConfig) -> Result<CheckReport> {
    let (dim, s) = (cfg.dim_or(2), cfg.s_or(0.5));
    let lambda = cfg.fraction()? * lambda_max(dim, s)?;
    let phi = |x: &[f64], t: f64| gaussian_bump(x, t, 2.5);
    let coarse = ground_state_residual(&phi, &make_lattice(dim, 8.0, 64, 2.0, 6.0, 32)?, s, lambda)?.residual;
    let fine = ground_state_residual(&phi, &make_lattice(dim, 8.0, 128, 2.0, 6.0, 32)?, s, lambda)?.residual;
    let margins = [GROUND_STATE_TOL - fine, coarse - fine];
    Ok(CheckReport::from_margins("ground_state", &margins, 0.0, json!({"dim": dim, "s": s, "lambda": lambda, "residual_64": coarse, "residual_128": fine})))
}

pub(super) fn radial_flap(cfg: &CheckConfig) -> Result<CheckReport> {
    let (dim, s) = (cfg.dim_or(2), cfg.s_or(0.5));
    let lambda = cfg.fraction()? * lambda_max(dim, s)?;
    let mu = mu_of(lambda, dim, s)?;
    let lat = make_lattice(dim, 8.0, 128, 1.0, 1.0, 8)?;
    let check = radial_flap_check(mu, s, &lat)?;
    Ok(CheckReport::from_margins("radial_flap", &[FLAP_TOL - check.max_rel_error], 0.0, json!({"dim": dim, "s": s, "mu": mu, "check": check})))
}

pub(super) fn extension(cfg: &CheckConfig) -> Result<CheckReport> {
    let s = cfg.s_or(0.5);
    let lat = make_lattice(cfg.dim_or(2), 8.0, 64, 1.0, 6.0, 64)?;
    let w = sample(&lat, |x, t| if t > 0.0 { gaussian_bump(x, t, 2.5) } else { 0.0 })?;
    let check = extension_check(&w, s, &[1e-2, 2e-2])?;
    let margins = [TRACE_TOL - check.trace_error, NEUMANN_TOL - check.neumann_error];
    Ok(CheckReport::from_margins("extension", &margins, 0.0, json!({"s": s, "check": check})))
}
