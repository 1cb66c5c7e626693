//! Explicit global supersolutions `U = eps (1+t)^{-theta} Phi_{lambda_1}(z) e^{-|z|^2/4(t+1)}`,
//! their certificates, and the very weak supersolution built from them.

use crate::error::{Error, Result};
use crate::kernel_ops::{phi_profile, JsOperator, PhiProfile};
use crate::lattice::{sample, Field};
use crate::spectral_constants::{exponents, exponents_for, lambda_max, ProblemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const LAMBDA_HALVINGS: usize = 40;
const EPS_HALVINGS: usize = 80;
/// Relative tolerance when re-verifying a stored certificate.
const RELOAD_TOL: f64 = 1e-9;

/// Log-spaced `|xi|` samples for the boundary inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XiGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for XiGrid {
    fn default() -> Self {
        Self { lo: 1e-6, hi: 50.0, count: 400 }
    }
}

impl XiGrid {
    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi / self.lo).ln() / (self.count - 1) as f64;
        (0..self.count).map(|i| self.lo * (step * i as f64).exp()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupersolutionCertificate {
    pub eps: f64,
    pub lambda1: f64,
    pub mu1: f64,
    pub theta: f64,
    pub interior_margin: f64,
    pub boundary_min_gap: f64,
    /// Data-bound amplitude `(lambda_1 - lambda) / 2`.
    pub delta1: f64,
    pub xi_grid: XiGrid,
    pub params: ProblemSpec,
}

/// `theta = s/(p-1) - mu_1/2`.
pub fn theta_for(spec: &ProblemSpec, mu1: f64) -> f64 {
    spec.s / (spec.p - 1.0) - 0.5 * mu1
}

/// `-theta - mu_1 + (N + 2 - 2s)/2`.
pub fn interior_sign_check(theta: f64, mu1: f64, dim: usize, s: f64) -> f64 {
    -theta - mu1 + 0.5 * (dim as f64 + 2.0 - 2.0 * s)
}

/// Minimum of the boundary inequality over the grid plus its two limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryGap {
    pub min_gap: f64,
    /// `xi -> 0`: the left side dominates (negative exponent, or equal constants won by the left).
    pub small_xi_ok: bool,
    /// `xi -> inf`: the right side decays like a Gaussian.
    pub large_xi_ok: bool,
}

impl BoundaryGap {
    pub fn holds(&self) -> bool {
        self.min_gap > 0.0 && self.small_xi_ok && self.large_xi_ok
    }
}

/// `min_xi (lambda_1 - lambda)|xi|^{(p-1)mu_1 - 2s} - eps^{p-1} e^{-(p-1)|xi|^2/4}`.
pub fn boundary_gap_check(eps: f64, lambda1: f64, mu1: f64, spec: &ProblemSpec, grid: &XiGrid) -> BoundaryGap {
    let slack = lambda1 - spec.lambda;
    let exponent = (spec.p - 1.0) * mu1 - 2.0 * spec.s;
    let scale = eps.powf(spec.p - 1.0);
    let min_gap = grid
        .points()
        .into_iter()
        .map(|xi| slack * xi.powf(exponent) - scale * (-(spec.p - 1.0) * xi * xi / 4.0).exp())
        .fold(f64::INFINITY, f64::min);
    let small_xi_ok = slack > 0.0 && (exponent < 0.0 || (exponent == 0.0 && slack > scale));
    BoundaryGap { min_gap, small_xi_ok, large_xi_ok: slack > 0.0 }
}

impl SupersolutionCertificate {
    fn assemble(spec: &ProblemSpec, eps: f64, lambda1: f64, grid: XiGrid) -> Result<(Self, BoundaryGap)> {
        let mu1 = exponents_for(spec.dim, spec.s, lambda1)?.mu;
        let theta = theta_for(spec, mu1);
        let gap = boundary_gap_check(eps, lambda1, mu1, spec, &grid);
        let cert = Self {
            eps,
            lambda1,
            mu1,
            theta,
            interior_margin: interior_sign_check(theta, mu1, spec.dim, spec.s),
            boundary_min_gap: gap.min_gap,
            delta1: 0.5 * (lambda1 - spec.lambda),
            xi_grid: grid,
            params: *spec,
        };
        Ok((cert, gap))
    }

    /// Recompute every derived field and the validity conditions.
    pub fn verify(&self) -> Result<()> {
        let spec = self.params;
        spec.validate()?;
        if !(self.lambda1 > spec.lambda && self.lambda1 < lambda_max(spec.dim, spec.s)?) {
            return Err(Error::Refused(format!("lambda1 = {} outside (lambda, Lambda)", self.lambda1)));
        }
        let (fresh, gap) = Self::assemble(&spec, self.eps, self.lambda1, self.xi_grid)?;
        let close = |a: f64, b: f64| (a - b).abs() <= RELOAD_TOL * a.abs().max(b.abs()).max(1e-300);
        let pairs = [
            ("mu1", self.mu1, fresh.mu1),
            ("theta", self.theta, fresh.theta),
            ("interior_margin", self.interior_margin, fresh.interior_margin),
            ("boundary_min_gap", self.boundary_min_gap, fresh.boundary_min_gap),
            ("delta1", self.delta1, fresh.delta1),
        ];
        if let Some((name, stored, computed)) = pairs.iter().find(|(_, a, b)| !close(*a, *b)) {
            return Err(Error::Refused(format!("stored {name} = {stored} but recomputed {computed}")));
        }
        let bundle = exponents_for(spec.dim, spec.s, self.lambda1)?;
        if !(spec.p < bundle.p_plus && spec.p > bundle.fujita_F) {
            return Err(Error::Refused(format!("p = {} outside (F, p_plus) at lambda1", spec.p)));
        }
        if !(fresh.interior_margin > 0.0 && gap.holds()) {
            return Err(Error::Refused("interior margin or boundary gap not positive".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse and re-verify.
    pub fn from_json(text: &str) -> Result<Self> {
        let cert: Self = serde_json::from_str(text)?;
        cert.verify()?;
        Ok(cert)
    }

    /// `u(x, t) = eps (1+t)^{-theta} |x|^{-mu_1} e^{-|x|^2/4(1+t)}`, the trace of `U`.
    pub fn trace_value(&self, radius: f64, t: f64) -> f64 {
        self.eps * (1.0 + t).powf(-self.theta) * radius.powf(-self.mu1) * (-radius * radius / (4.0 * (1.0 + t))).exp()
    }

    /// `delta_1 (1+t)^{-theta} |x|^{-mu_1-2s} e^{-|x|^2/4(1+t)}`, the admissible data envelope.
    pub fn data_envelope(&self, radius: f64, t: f64) -> f64 {
        let s = self.params.s;
        self.delta1 * (1.0 + t).powf(-self.theta) * radius.powf(-self.mu1 - 2.0 * s) * (-radius * radius / (4.0 * (1.0 + t))).exp()
    }
}

/// `phi = (1+t)^{(p-1) mu_1/2 - s} |x|^{2s - (p-1) mu_1} e^{-(p-1)|x|^2/4(1+t)}`,
/// the ratio of the data envelope to `u^p`, sampled on a log grid of
/// `|x| in [1e-4, 1e2]` and `t in [0, 1e4]`; infinite when it grows toward the origin.
pub fn envelope_ratio_sup(cert: &SupersolutionCertificate) -> f64 {
    let (p, s, mu1) = (cert.params.p, cert.params.s, cert.mu1);
    let radial_power = 2.0 * s - (p - 1.0) * mu1;
    if radial_power < 0.0 {
        return f64::INFINITY;
    }
    let log_grid = |lo: f64, hi: f64, n: usize| (0..n).map(move |i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64));
    let times = std::iter::once(0.0).chain(log_grid(1e-4, 1e4, 81));
    times
        .flat_map(|t| log_grid(1e-4, 1e2, 241).map(move |r| (r, t)))
        .map(|(r, t)| (1.0 + t).powf(0.5 * (p - 1.0) * mu1 - s) * r.powf(radial_power) * (-(p - 1.0) * r * r / (4.0 * (1.0 + t))).exp())
        .fold(0.0, f64::max)
}

/// Certificate search: `lambda_1 = lambda + delta 2^{-k}` with `delta = (Lambda - lambda)/4`,
/// then `eps = 2^{-j}` until the boundary gap is positive.
pub fn find_certificate(spec: &ProblemSpec) -> Result<SupersolutionCertificate> {
    let bundle = exponents(spec)?;
    if spec.p >= bundle.p_plus {
        return Err(Error::Refused(format!("p = {} is not below p_plus = {}", spec.p, bundle.p_plus)));
    }
    let grid = XiGrid::default();
    let delta = 0.25 * (bundle.lambda_max - spec.lambda);
    for k in 0..LAMBDA_HALVINGS {
        let lambda1 = spec.lambda + delta * 0.5f64.powi(k as i32);
        let at_lambda1 = exponents_for(spec.dim, spec.s, lambda1)?;
        if spec.p >= at_lambda1.p_plus || spec.p <= at_lambda1.fujita_F {
            continue;
        }
        let mut previous = f64::NEG_INFINITY;
        for j in 0..EPS_HALVINGS {
            let (cert, gap) = SupersolutionCertificate::assemble(spec, 0.5f64.powi(j as i32), lambda1, grid)?;
            if cert.interior_margin <= 0.0 {
                break;
            }
            if gap.min_gap < previous {
                return Err(Error::Comparison(format!("boundary gap fell from {previous} to {} as eps halved", gap.min_gap)));
            }
            previous = gap.min_gap;
            if gap.holds() {
                cert.verify()?;
                return Ok(cert);
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no certificate for p = {} (F = {}, p_plus = {})",
        spec.p, bundle.fujita_F, bundle.p_plus
    )))
}

/// Evaluator of the full extension `U(x, y, t)`.
pub struct Supersolution {
    pub cert: SupersolutionCertificate,
    profile: PhiProfile,
}

impl Supersolution {
    pub fn new(cert: SupersolutionCertificate) -> Result<Self> {
        let spec = cert.params;
        Ok(Self { profile: phi_profile(cert.lambda1, spec.dim, spec.s)?, cert })
    }

    pub fn value(&self, x: &[f64], y: f64, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::Domain(format!("time {t} is negative")));
        }
        let z2 = x.iter().map(|v| v * v).sum::<f64>() + y * y;
        if z2 == 0.0 {
            return Err(Error::Domain("the supersolution is singular at z = 0".into()));
        }
        let phi = self.profile.eval(x, y)?;
        Ok(self.cert.eps * (1.0 + t).powf(-self.cert.theta) * phi * (-z2 / (4.0 * (1.0 + t))).exp())
    }
}

/// `U(z, t)` from a certificate (builds the profile on every call).
pub fn supersol_value(cert: &SupersolutionCertificate, x: &[f64], y: f64, t: f64) -> Result<f64> {
    Supersolution::new(*cert)?.value(x, y, t)
}

/// `f` vanishes for `t <= 0` and lies under the data envelope at every other node.
pub fn data_bound(cert: &SupersolutionCertificate, f: &Field) -> Result<bool> {
    let lat = f.lattice;
    if f.max_abs_nonpositive_time()? != 0.0 {
        return Ok(false);
    }
    let radii = lat.radii();
    let n = radii.len();
    let values = f.real()?;
    for kt in lat.first_positive_time()..lat.k {
        let t = lat.t_coord(kt);
        for (i, &r) in radii.iter().enumerate() {
            let v = values[kt * n + i];
            if v < 0.0 || v > cert.data_envelope(r, t) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Sampled `u` on `t > 0`, zero before.
pub fn sample_trace(cert: &SupersolutionCertificate, lat: &crate::lattice::Lattice) -> Result<Field> {
    sample(lat, |x, t| if t > 0.0 { cert.trace_value(x.iter().map(|v| v * v).sum::<f64>().sqrt(), t) } else { 0.0 })
}

/// How many nodes the very weak inequality is checked on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpotCheck {
    Random { nodes: usize, seed: u64 },
    Full,
}

impl Default for SpotCheck {
    fn default() -> Self {
        SpotCheck::Random { nodes: 1000, seed: 7 }
    }
}

#[derive(Debug, Clone)]
pub struct SupersolutionBuild {
    pub w: Field,
    /// `max w / u` over nodes with `t > 0`.
    pub max_ratio: f64,
    /// `min (w - J_s(lambda|x|^{-2s} w + w^p + f)) / max w` over the checked nodes.
    pub very_weak_margin: f64,
    pub checked_nodes: usize,
}

fn source_of(values: &[f64], f: &[f64], spec: &ProblemSpec, radii: &[f64], start: usize) -> Vec<f64> {
    let n = radii.len();
    let mut out = vec![0.0; values.len()];
    for idx in start * n..values.len() {
        let (v, r) = (values[idx], radii[idx % n]);
        out[idx] = spec.lambda * v / r.powf(2.0 * spec.s) + v.powf(spec.p) + f[idx];
    }
    out
}

/// `w = J_s(lambda |x|^{-2s} u + u^p + f)`, checked against `w <= u` and the
/// discrete very weak inequality.
pub fn build_w_supersol(cert: &SupersolutionCertificate, f: &Field, check: SpotCheck) -> Result<SupersolutionBuild> {
    cert.verify()?;
    if !data_bound(cert, f)? {
        return Err(Error::Refused("datum exceeds the certificate envelope".into()));
    }
    let lat = f.lattice;
    let spec = cert.params;
    let radii = lat.radii();
    let start = lat.first_positive_time();
    let op = JsOperator::new(&lat, spec.s)?;
    let u = sample_trace(cert, &lat)?;
    let (uv, fv) = (u.real()?, f.real()?);
    let w = op.apply(&Field::physical(lat, source_of(uv, fv, &spec, &radii, start))?)?.map(|v| v.max(0.0))?;
    let wv = w.real()?;
    let mut max_ratio = 0.0f64;
    for idx in start * radii.len()..lat.len() {
        max_ratio = max_ratio.max(wv[idx] / uv[idx]);
    }
    if max_ratio > 1.0 + 1e-9 {
        return Err(Error::Comparison(format!("w exceeds u by a factor {max_ratio}")));
    }
    let again = op.apply(&Field::physical(lat, source_of(wv, fv, &spec, &radii, start))?)?;
    let av = again.real()?;
    let nodes: Vec<usize> = match check {
        SpotCheck::Full => (0..lat.len()).collect(),
        SpotCheck::Random { nodes, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..nodes).map(|_| rng.random_range(0..lat.len())).collect()
        }
    };
    let scale = w.max_abs().max(f64::MIN_POSITIVE);
    let very_weak_margin = nodes.iter().map(|&i| (wv[i] - av[i]) / scale).fold(f64::INFINITY, f64::min);
    if very_weak_margin < -1e-9 {
        return Err(Error::Comparison(format!("very weak inequality fails by {very_weak_margin:e}")));
    }
    Ok(SupersolutionBuild { max_ratio, very_weak_margin, checked_nodes: nodes.len(), w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::make_lattice;
    use approx::assert_relative_eq;

    fn conditional_spec() -> ProblemSpec {
        let top = lambda_max(3, 0.5).unwrap();
        let bundle = exponents_for(3, 0.5, top / 2.0).unwrap();
        ProblemSpec::new(3, 0.5, top / 2.0, 0.5 * (bundle.fujita_F + bundle.p_plus)).unwrap()
    }

    #[test]
    fn envelope_ratio_is_bounded_by_its_closed_form() {
        let cert = find_certificate(&conditional_spec()).unwrap();
        let (p, s) = (cert.params.p, cert.params.s);
        // with rho = |x|^2/(1+t) the ratio is rho^{a/2} e^{-(p-1) rho/4}, peaking at rho = 2a/(p-1)
        let a = 2.0 * s - (p - 1.0) * cert.mu1;
        let peak = (2.0 * a / ((p - 1.0) * std::f64::consts::E)).powf(0.5 * a);
        let sampled = envelope_ratio_sup(&cert);
        assert!(sampled <= peak * (1.0 + 1e-12));
        assert_relative_eq!(sampled, peak, max_relative = 1e-3);
    }

    #[test]
    fn certificate_found_at_the_conditional_midpoint() {
        let spec = conditional_spec();
        let cert = find_certificate(&spec).unwrap();
        assert!(cert.interior_margin > 0.0 && cert.boundary_min_gap > 0.0);
        assert_eq!(cert.theta, theta_for(&spec, cert.mu1));
        let at = exponents_for(3, 0.5, cert.lambda1).unwrap();
        assert!(spec.p < at.p_plus && spec.p > at.fujita_F);
        assert_relative_eq!(cert.delta1, 0.5 * (cert.lambda1 - spec.lambda));
    }

    #[test]
    fn refusals_and_exhaustion() {
        let top = lambda_max(3, 0.5).unwrap();
        let bundle = exponents_for(3, 0.5, top / 2.0).unwrap();
        let above = ProblemSpec::new(3, 0.5, top / 2.0, bundle.p_plus + 0.1).unwrap();
        assert!(matches!(find_certificate(&above), Err(Error::Refused(_))));
        let below = ProblemSpec::new(3, 0.5, top / 2.0, 0.5 * (1.0 + bundle.fujita_F)).unwrap();
        assert!(matches!(find_certificate(&below), Err(Error::SearchExhausted(_))));
    }

    #[test]
    fn interior_margin_tracks_the_fujita_exponent() {
        let spec = conditional_spec();
        let mu1 = exponents_for(3, 0.5, spec.lambda * 1.1).unwrap().mu;
        let f1 = 1.0 + 2.0 * spec.s / (3.0 + 2.0 - 2.0 * spec.s - mu1);
        let at = |p: f64| interior_sign_check(theta_for(&ProblemSpec { p, ..spec }, mu1), mu1, 3, 0.5);
        assert!(at(f1 * 1.001) > 0.0);
        assert!(at(f1 * 0.999) < 0.0);
        let theta = theta_for(&spec, mu1);
        assert_relative_eq!(interior_sign_check(theta + 0.3, mu1, 3, 0.5), interior_sign_check(theta, mu1, 3, 0.5) - 0.3, epsilon = 1e-14);
    }

    #[test]
    fn boundary_gap_limits() {
        let spec = conditional_spec();
        let grid = XiGrid::default();
        let mu1 = exponents_for(3, 0.5, spec.lambda * 1.1).unwrap().mu;
        let big = boundary_gap_check(1.0, spec.lambda * 1.1, mu1, &spec, &grid);
        let small = boundary_gap_check(1e-3, spec.lambda * 1.1, mu1, &spec, &grid);
        assert!(small.min_gap > big.min_gap);
        assert!(!boundary_gap_check(1e-3, spec.lambda, mu1, &spec, &grid).holds());
        // exponent zero: the left side is the constant lambda_1 - lambda
        let critical = ProblemSpec { p: 1.0 + 2.0 * spec.s / mu1, ..spec };
        let gap = boundary_gap_check(0.1, spec.lambda * 1.1, mu1, &critical, &grid);
        let expected = 0.1 * spec.lambda - 0.1f64.powf(critical.p - 1.0) * (-(critical.p - 1.0) * 1e-12 / 4.0).exp();
        assert_relative_eq!(gap.min_gap, expected, max_relative = 1e-9);
    }

    #[test]
    fn json_round_trip_reverifies() {
        let cert = find_certificate(&conditional_spec()).unwrap();
        let back = SupersolutionCertificate::from_json(&cert.to_json().unwrap()).unwrap();
        assert_eq!(back, cert);
        let mut tampered = cert;
        tampered.theta += 0.1;
        assert!(SupersolutionCertificate::from_json(&tampered.to_json().unwrap()).is_err());
    }

    #[test]
    fn supersolution_values() {
        let cert = find_certificate(&conditional_spec()).unwrap();
        let sup = Supersolution::new(cert).unwrap();
        let x = [0.3, 0.4, 0.0];
        assert_relative_eq!(sup.value(&x, 0.0, 0.0).unwrap(), cert.eps * 0.5f64.powf(-cert.mu1) * (-0.25f64 / 4.0).exp(), max_relative = 1e-12);
        assert_relative_eq!(sup.value(&x, 0.0, 1.5).unwrap(), cert.trace_value(0.5, 1.5), max_relative = 1e-12);
        let doubled = Supersolution::new(SupersolutionCertificate { eps: 2.0 * cert.eps, ..cert }).unwrap();
        assert_relative_eq!(doubled.value(&x, 0.7, 1.0).unwrap(), 2.0 * sup.value(&x, 0.7, 1.0).unwrap(), max_relative = 1e-12);
        assert!(sup.value(&[20.0, 0.0, 0.0], 5.0, 1.0).unwrap() < 1e-20);
        assert!(sup.value(&[0.0; 3], 0.0, 1.0).is_err());
    }

    #[test]
    fn data_envelope_membership() {
        let cert = find_certificate(&conditional_spec()).unwrap();
        let lat = make_lattice(3, 2.0, 8, 0.5, 2.0, 8).unwrap();
        let envelope = |scale: f64| {
            sample(&lat, |x, t| if t > 0.0 { scale * cert.data_envelope(x.iter().map(|v| v * v).sum::<f64>().sqrt(), t) } else { 0.0 }).unwrap()
        };
        assert!(data_bound(&cert, &Field::zeros(lat)).unwrap());
        assert!(data_bound(&cert, &envelope(0.5)).unwrap());
        let mut values = envelope(0.5).into_real().unwrap();
        let last = values.len() - 1;
        values[last] *= 4.0;
        assert!(!data_bound(&cert, &Field::physical(lat, values).unwrap()).unwrap());
    }

    #[test]
    fn very_weak_supersolution_sits_below_u() {
        let cert = find_certificate(&conditional_spec()).unwrap();
        let lat = make_lattice(3, 4.0, 16, 0.5, 4.0, 16).unwrap();
        let built = build_w_supersol(&cert, &Field::zeros(lat), SpotCheck::default()).unwrap();
        assert!(built.max_ratio <= 1.0);
        assert!(built.very_weak_margin >= 0.0);
        assert!(built.w.is_causal().unwrap());
        let n = lat.spatial_len();
        assert!(built.w.real().unwrap()[lat.first_positive_time() * n..].iter().all(|&v| v > 0.0));
        let f = sample(&lat, |x, t| {
            if t > 0.0 { 0.25 * cert.data_envelope(x.iter().map(|v| v * v).sum::<f64>().sqrt(), t) } else { 0.0 }
        })
        .unwrap();
        let with_data = build_w_supersol(&cert, &f, SpotCheck::Full).unwrap();
        let doubled = build_w_supersol(&cert, &f.map(|v| 2.0 * v).unwrap(), SpotCheck::default()).unwrap();
        for (a, b) in with_data.w.real().unwrap().iter().zip(doubled.w.real().unwrap()) {
            assert!(a <= b);
        }
    }
}
