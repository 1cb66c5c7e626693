//! Parabolic extension `W(x, y, t)` of a causal field and its weighted
//! Neumann trace.
//!
//! In spatial Fourier variables the extension is a causal time convolution,
//! `W^(k, y, t) = int_0^inf P_y(tau) e^{-tau |k|^2} w^(k, t - tau) dtau` with
//! `P_y(tau) = y^{2s} e^{-y^2/4tau} tau^{-1-s} / (4^s Gamma(s))`, a probability
//! density in `tau`. Each level is marched with the same hat-function lag
//! weights as the inverse operator.

use crate::error::{Error, Result};
use crate::kernel_ops::spectral::apply_hs_spectral;
use crate::kernel_ops::volterra::LagConvolution;
use crate::lattice::{Field, Lattice};
use crate::quad::{geometric_edges, Rule};
use crate::spectral_constants::{gamma_fn, kappa_s};
use serde::{Deserialize, Serialize};

const NODES_PER_PANEL: usize = 8;
/// Below `y^2 * SMALL_TAU` the density is below `e^{-250}`.
const SMALL_TAU: f64 = 1e-3;

/// Extension values at the requested `y` levels, ascending.
pub struct Extension {
    pub s: f64,
    pub levels: Vec<f64>,
    pub fields: Vec<Field>,
}

impl Extension {
    /// `-y^{1-2s} dW/dy` at `y -> 0`, from `W ~ w - c y^{2s}` fitted on the two smallest levels.
    pub fn neumann_estimate(&self) -> Result<Field> {
        if self.levels.len() < 2 {
            return Err(Error::Domain("the Neumann estimate needs two levels".into()));
        }
        let (y1, y2) = (self.levels[0], self.levels[1]);
        let denom = y2.powf(2.0 * self.s) - y1.powf(2.0 * self.s);
        let (a, b) = (self.fields[0].real()?, self.fields[1].real()?);
        let values = a.iter().zip(b).map(|(w1, w2)| -2.0 * self.s * (w2 - w1) / denom).collect();
        Field::physical(self.fields[0].lattice, values)
    }
}

/// Lag symbols of `P_y` on the padded spatial grid of `lat`.
fn level_symbols(lat: &Lattice, s: f64, y: f64, xi2: &[f64]) -> Result<Vec<Vec<f64>>> {
    let ht = lat.ht();
    let rule = Rule::legendre(NODES_PER_PANEL);
    let norm = y.powf(2.0 * s) / (4f64.powf(s) * gamma_fn(s)?);
    let mut lags = vec![vec![0.0; xi2.len()]; lat.k + 1];
    let mut push = |slab: usize, tau: f64, weight: f64| {
        let u = (tau - slab as f64 * ht) / ht;
        for (k, &x2) in xi2.iter().enumerate() {
            let e = weight * (-tau * x2).exp();
            lags[slab][k] += (1.0 - u) * e;
            lags[slab + 1][k] += u * e;
        }
    };
    let start = SMALL_TAU * y * y;
    for slab in 0..lat.k {
        let (a, b) = (slab as f64 * ht, (slab + 1) as f64 * ht);
        if b <= start {
            continue;
        }
        let edges = if a < start * 2.0 { geometric_edges(start.max(a), b, 2.0) } else { vec![a, b] };
        for e in edges.windows(2) {
            for (tau, w) in rule.mapped(e[0], e[1]) {
                push(slab, tau, w * norm * (-y * y / (4.0 * tau)).exp() * tau.powf(-1.0 - s));
            }
        }
    }
    Ok(lags)
}

/// Extension of a causal field at positive `y` levels.
pub fn extend_parabolic(w: &Field, s: f64, levels: &[f64]) -> Result<Extension> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!("order s = {s} outside (0, 1)")));
    }
    if levels.is_empty() || levels.iter().any(|y| !(y.is_finite() && *y > 0.0)) {
        return Err(Error::Domain("levels must be positive and finite".into()));
    }
    let mut sorted = levels.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lat = w.lattice;
    let xi2 = LagConvolution::padded_for(&lat).xi_squared();
    let mut fields = Vec::with_capacity(sorted.len());
    for &y in &sorted {
        let conv = LagConvolution::new(&lat, level_symbols(&lat, s, y, &xi2)?);
        fields.push(conv.apply(w)?);
    }
    Ok(Extension { s, levels: sorted, fields })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionCheck {
    /// `max |W(y_1) - w| / max |w|` at the smallest level.
    pub trace_error: f64,
    /// `max |neumann - kappa_s H^s w| / max |kappa_s H^s w|` on interior nodes.
    pub neumann_error: f64,
    pub smallest_level: f64,
}

/// Trace recovery and Neumann agreement on nodes with `|x| <= L/2`, `t > 0`.
pub fn extension_check(w: &Field, s: f64, levels: &[f64]) -> Result<ExtensionCheck> {
    let ext = extend_parabolic(w, s, levels)?;
    let lat = w.lattice;
    let n = lat.spatial_len();
    let start = lat.first_positive_time();
    let interior: Vec<usize> = (0..n).filter(|&i| lat.radius(i) <= 0.5 * lat.half_width).collect();
    let values = w.real()?;
    let trace = ext.fields[0].real()?;
    let scale = w.max_abs();
    let trace_error = values.iter().zip(trace).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
    let neumann = ext.neumann_estimate()?;
    let reference = apply_hs_spectral(w, s)?;
    let kappa = kappa_s(s)?;
    let (mut gap, mut top) = (0.0f64, 0.0f64);
    for kt in start..lat.k {
        for &i in &interior {
            let r = kappa * reference.real()?[kt * n + i];
            gap = gap.max((neumann.real()?[kt * n + i] - r).abs());
            top = top.max(r.abs());
        }
    }
    Ok(ExtensionCheck { trace_error, neumann_error: gap / top, smallest_level: ext.levels[0] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_lattice, sample};

    fn datum(lat: &Lattice) -> Field {
        sample(lat, |x, t| if t > 0.0 { (-(x[0] * x[0] + x[1] * x[1]) - 2.0 * (t - 2.5).powi(2)).exp() } else { 0.0 }).unwrap()
    }

    #[test]
    fn zero_extends_to_zero() {
        let lat = make_lattice(2, 4.0, 16, 1.0, 2.0, 16).unwrap();
        let ext = extend_parabolic(&Field::zeros(lat), 0.5, &[0.1, 0.2]).unwrap();
        assert!(ext.fields.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn trace_and_neumann_for_a_gaussian() {
        let lat = make_lattice(2, 8.0, 64, 1.0, 6.0, 64).unwrap();
        let check = extension_check(&datum(&lat), 0.5, &[0.01, 0.02]).unwrap();
        assert!(check.trace_error <= 2e-2, "{check:?}");
        assert!(check.neumann_error <= 5e-2, "{check:?}");
    }

    #[test]
    fn levels_are_sorted_and_positive() {
        let lat = make_lattice(2, 4.0, 16, 1.0, 2.0, 16).unwrap();
        let w = datum(&lat);
        let ext = extend_parabolic(&w, 0.5, &[0.4, 0.1]).unwrap();
        assert_eq!(ext.levels, vec![0.1, 0.4]);
        assert!(extend_parabolic(&w, 0.5, &[0.0]).is_err());
        assert!(extend_parabolic(&w, 0.5, &[]).is_err());
        assert!(extend_parabolic(&w, 1.0, &[0.1]).is_err());
    }

    #[test]
    fn extension_is_positive_and_decays_in_y() {
        let lat = make_lattice(2, 6.0, 32, 1.0, 4.0, 32).unwrap();
        let ext = extend_parabolic(&datum(&lat), 0.4, &[0.05, 0.5, 2.0]).unwrap();
        let scale = ext.fields[0].max_abs();
        for f in &ext.fields {
            assert!(f.real().unwrap().iter().all(|&v| v >= -1e-12 * scale));
        }
        assert!(ext.fields[2].max_abs() < ext.fields[1].max_abs());
        assert!(ext.fields[1].max_abs() < ext.fields[0].max_abs());
    }
}
