//! Monotone iteration `w_n = J_s(h_n(w_{n-1}))` with truncated right-hand
//! sides, norm-escape detection and the weighted blow-up functional.
//!
//! Index convention: `w_0 = J_s(eta_0 f / (1 + f))` and, for `n >= 1`,
//! `w_n = J_s(h_n)` with `h_n` built from `w_{n-1}` by [`rhs_truncated`].

use crate::error::{Error, Result};
use crate::kernel_ops::JsOperator;
use crate::lattice::{weighted_integral, Field, Lattice};
use crate::quad::smoothstep;
use crate::spectral_constants::{mu_of, ProblemSpec};
use serde::{Deserialize, Serialize};

/// Relative slack for monotonicity and for clamping rounding negatives.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// Smooth nested cutoffs `eta_n(x, t)`.
///
/// Space: 1 on `|x| <= n`, quintic blend to 0 on `[n, n + 1]`.
/// Time: 1 on `(1/(n+1), n+1)`, quintic blends to 0 at `1/(n+2)` and `n+2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub index: usize,
}

impl CutoffFamily {
    pub fn new(index: usize) -> Self {
        Self { index }
    }

    pub fn space(&self, radius: f64) -> f64 {
        1.0 - smoothstep(radius - self.index as f64)
    }

    pub fn time(&self, t: f64) -> f64 {
        let n = self.index as f64;
        let (start, full) = (1.0 / (n + 2.0), 1.0 / (n + 1.0));
        let (end, zero) = (n + 1.0, n + 2.0);
        if t <= start || t >= zero {
            0.0
        } else if t < full {
            smoothstep((t - start) / (full - start))
        } else if t <= end {
            1.0
        } else {
            1.0 - smoothstep(t - end)
        }
    }

    pub fn eval(&self, radius: f64, t: f64) -> f64 {
        self.space(radius) * self.time(t)
    }
}

fn check_pair(w: &Field, f: &Field) -> Result<()> {
    if w.lattice != f.lattice {
        return Err(Error::Lattice("iterate and datum live on different lattices".into()));
    }
    for fld in [w, f] {
        if let Some((index, &value)) = fld.real()?.iter().enumerate().find(|(_, v)| **v < 0.0) {
            return Err(Error::Negative { index, value });
        }
    }
    Ok(())
}

/// Truncated right-hand side `h_n(w)`; `n = 0` gives `eta_0 f / (1 + f)`.
pub fn rhs_truncated(w: &Field, f: &Field, spec: &ProblemSpec, n: usize) -> Result<Field> {
    check_pair(w, f)?;
    let lat = w.lattice;
    let cut = CutoffFamily::new(n);
    let radii = lat.radii();
    let (wv, fv) = (w.real()?, f.real()?);
    let sp = radii.len();
    let cap = n as f64;
    let mut out = vec![0.0; lat.len()];
    for kt in lat.first_positive_time()..lat.k {
        let eta_t = cut.time(lat.t_coord(kt));
        if eta_t == 0.0 {
            continue;
        }
        for (i, &r) in radii.iter().enumerate() {
            let eta = eta_t * cut.space(r);
            if eta == 0.0 {
                continue;
            }
            let idx = kt * sp + i;
            let (wi, fi) = (wv[idx], fv[idx]);
            out[idx] = if n == 0 {
                eta * fi / (1.0 + fi)
            } else {
                let power = wi.powf(spec.p);
                let hardy = spec.lambda * (wi / (1.0 + wi / cap)) / (r + 1.0 / cap).powf(2.0 * spec.s);
                eta * (hardy + power / (1.0 + power / cap) + fi / (1.0 + fi / cap))
            };
        }
    }
    Field::physical(lat, out)
}

/// `M(t) = int |x|^{-mu} w^p dx` on every time slice, as `(t, M)` pairs.
pub fn blowup_functional(w: &Field, mu: f64, p: f64) -> Result<Vec<(f64, f64)>> {
    let lat = w.lattice;
    (0..lat.k).map(|k| Ok((lat.t_coord(k), weighted_integral(w, -mu, p, k)?))).collect()
}

/// One stage of the monotone scheme.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub n: usize,
    pub w: Field,
    /// `M(t)` per slice of `w`.
    pub m_curve: Vec<(f64, f64)>,
    /// `sup |w_n - w_{n-1}|`; infinite for `w_0`.
    pub sup_diff: f64,
    pub monotone: bool,
}

/// Problem data and the prebuilt inverse operator for a run.
pub struct MonotoneScheme {
    pub spec: ProblemSpec,
    pub mu: f64,
    pub f: Field,
    op: JsOperator,
}

impl MonotoneScheme {
    pub fn new(spec: ProblemSpec, f: Field) -> Result<Self> {
        spec.validate()?;
        check_pair(&f, &f)?;
        if f.max_abs_nonpositive_time()? != 0.0 {
            return Err(Error::NonCausal(f.max_abs_nonpositive_time()?));
        }
        let op = JsOperator::new(&f.lattice, spec.s)?;
        Ok(Self { mu: mu_of(spec.lambda, spec.dim, spec.s)?, spec, f, op })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.f.lattice
    }

    /// `J_s` applied with rounding negatives clamped; larger negatives are errors.
    fn solve(&self, rhs: &Field) -> Result<Vec<f64>> {
        let mut values = self.op.apply(rhs)?.into_real()?;
        let slack = MONOTONE_SLACK * values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
        for (index, v) in values.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v < -slack {
                    return Err(Error::Negative { index, value: *v });
                }
                *v = 0.0;
            }
        }
        Ok(values)
    }

    fn state(&self, n: usize, values: Vec<f64>, sup_diff: f64) -> Result<IterationState> {
        let w = Field::physical(*self.lattice(), values)?;
        let m_curve = blowup_functional(&w, self.mu, self.spec.p)?;
        Ok(IterationState { n, w, m_curve, sup_diff, monotone: true })
    }

    pub fn initial(&self) -> Result<IterationState> {
        let rhs = rhs_truncated(&Field::zeros(*self.lattice()), &self.f, &self.spec, 0)?;
        self.state(0, self.solve(&rhs)?, f64::INFINITY)
    }

    /// Next iterate; a decrease beyond the slack is a monotonicity error.
    pub fn iterate(&self, state: &IterationState) -> Result<IterationState> {
        let n = state.n + 1;
        let rhs = rhs_truncated(&state.w, &self.f, &self.spec, n)?;
        let next = self.solve(&rhs)?;
        let prev = state.w.real()?;
        let slack = MONOTONE_SLACK * next.iter().fold(1.0f64, |a, v| a.max(*v));
        let mut sup_diff = 0.0f64;
        for (index, (&a, &b)) in prev.iter().zip(&next).enumerate() {
            if b < a - slack {
                return Err(Error::Monotonicity { n, index, excess: a - b });
            }
            sup_diff = sup_diff.max((b - a).abs());
        }
        self.state(n, next, sup_diff)
    }
}

/// One scheme step on a fresh operator.
pub fn iterate(state: &IterationState, f: &Field, spec: &ProblemSpec) -> Result<IterationState> {
    MonotoneScheme::new(*spec, f.clone())?.iterate(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    ConvergedBelowCap,
    NormEscape,
    Stalled,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::ConvergedBelowCap => "ConvergedBelowCap",
            Verdict::NormEscape => "NormEscape",
            Verdict::Stalled => "Stalled",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub max_iterations: usize,
    /// Late over early growth of `M` that counts as escape.
    pub escape_factor: f64,
    /// Escape once `max M` exceeds this multiple of `max M(w_0)`.
    pub cap_factor: f64,
    /// Sup-difference of consecutive iterates that counts as converged.
    pub tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self { max_iterations: 64, escape_factor: 10.0, cap_factor: 1e6, tolerance: 1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub spec: ProblemSpec,
    pub mu: f64,
    pub config: RunConfig,
    pub lattice: Lattice,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub verdict: Verdict,
    pub n_final: usize,
    #[serde(rename = "M_curve")]
    pub m_curve: Vec<(f64, f64)>,
    /// `max M` over `t > T/4` divided by `max M` over `t <= T/4`.
    pub growth_factor: f64,
    /// First time the escape threshold is crossed, if any.
    pub escape_time: Option<f64>,
    /// `max_t M(t)` of the last iterate.
    pub final_norm: f64,
    pub params: RunParams,
}

impl TrajectoryReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn split_maxima(curve: &[(f64, f64)], t_end: f64) -> (f64, f64) {
    let split = 0.25 * t_end;
    curve.iter().fold((0.0f64, 0.0f64), |(early, late), &(t, m)| {
        if t <= 0.0 {
            (early, late)
        } else if t <= split {
            (early.max(m), late)
        } else {
            (early, late.max(m))
        }
    })
}

fn growth_of(curve: &[(f64, f64)], t_end: f64) -> f64 {
    let (early, late) = split_maxima(curve, t_end);
    if late == 0.0 {
        0.0
    } else {
        late / early.max(f64::MIN_POSITIVE)
    }
}

/// Run the scheme to a verdict; `observe` sees every iterate, including `w_0`.
pub fn run_observed(
    scheme: &MonotoneScheme,
    config: &RunConfig,
    mut observe: impl FnMut(&IterationState) -> Result<()>,
) -> Result<TrajectoryReport> {
    let t_end = scheme.lattice().t_end;
    let peak = |curve: &[(f64, f64)]| curve.iter().fold(0.0f64, |a, &(_, m)| a.max(m));
    let mut state = scheme.initial()?;
    observe(&state)?;
    let reference = peak(&state.m_curve);
    let cap = config.cap_factor * reference;
    let verdict = loop {
        if reference > 0.0 && peak(&state.m_curve) > cap {
            break Verdict::NormEscape;
        }
        if growth_of(&state.m_curve, t_end) >= config.escape_factor {
            break Verdict::NormEscape;
        }
        if state.sup_diff < config.tolerance {
            break Verdict::ConvergedBelowCap;
        }
        if state.n + 1 >= config.max_iterations {
            break Verdict::Stalled;
        }
        state = scheme.iterate(&state)?;
        observe(&state)?;
    };
    let (early, _) = split_maxima(&state.m_curve, t_end);
    let threshold = if peak(&state.m_curve) > cap { cap } else { config.escape_factor * early };
    let escape_time = match verdict {
        Verdict::NormEscape => {
            state.m_curve.iter().find(|&&(t, m)| t > 0.25 * t_end && m >= threshold).map(|&(t, _)| t)
        }
        _ => None,
    };
    Ok(TrajectoryReport {
        verdict,
        n_final: state.n,
        growth_factor: growth_of(&state.m_curve, t_end),
        escape_time,
        final_norm: peak(&state.m_curve),
        m_curve: state.m_curve,
        params: RunParams { spec: scheme.spec, mu: scheme.mu, config: *config, lattice: *scheme.lattice() },
    })
}

pub fn run(spec: &ProblemSpec, f: &Field, config: &RunConfig) -> Result<TrajectoryReport> {
    run_observed(&MonotoneScheme::new(*spec, f.clone())?, config, |_| Ok(()))
}

/// Least-squares exponent of `w ~ |x|^slope` near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityFit {
    pub slope: f64,
    /// Two standard errors, combining fit residuals and spread across slices.
    pub band: f64,
    pub slices: usize,
    pub annuli: usize,
}

/// Fit window: time slices in `[t_lo, t_hi]` and radii up to `r_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
    pub r_max: f64,
}

/// Slope of `log w` against `log |x|` over annuli with `|x| <= r_max`,
/// one fit per slice, averaged over the window.
pub fn singularity_profile(w: &Field, window: &FitWindow) -> Result<SingularityFit> {
    let lat = w.lattice;
    let radii = lat.radii();
    let scale = w.max_abs();
    // annuli are the distinct node radii
    let mut shells: Vec<f64> = radii.iter().cloned().filter(|&r| r <= window.r_max).collect();
    shells.sort_by(|a, b| a.partial_cmp(b).unwrap());
    shells.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * *b);
    if shells.len() < 3 {
        return Err(Error::Domain(format!("fewer than three annuli inside radius {}", window.r_max)));
    }
    let shell_of = |r: f64| shells.iter().position(|&c| (c - r).abs() <= 1e-9 * c);
    let (mut slopes, mut variances) = (Vec::new(), Vec::new());
    for kt in 0..lat.k {
        let t = lat.t_coord(kt);
        if t < window.t_lo || t > window.t_hi {
            continue;
        }
        let slice = w.slice(kt)?;
        let mut sums = vec![(0.0, 0usize); shells.len()];
        for (i, &r) in radii.iter().enumerate() {
            if let Some(j) = shell_of(r) {
                if !(slice[i] > 1e-300 && slice[i] > 1e-12 * scale) {
                    return Err(Error::Domain(format!("degenerate fit: w = {:e} at |x| = {r}, t = {t}", slice[i])));
                }
                sums[j].0 += slice[i].ln();
                sums[j].1 += 1;
            }
        }
        let xs: Vec<f64> = shells.iter().map(|r| r.ln()).collect();
        let ys: Vec<f64> = sums.iter().map(|&(s, c)| s / c as f64).collect();
        let count = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / count, ys.iter().sum::<f64>() / count);
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = sxy / sxx;
        let resid: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
        slopes.push(slope);
        variances.push(resid / (count - 2.0).max(1.0) / sxx);
    }
    if slopes.is_empty() {
        return Err(Error::Domain("no time slice inside the fit window".into()));
    }
    let count = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / count;
    let spread = slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / count;
    let fit_var = variances.iter().sum::<f64>() / count;
    Ok(SingularityFit { slope: mean, band: 2.0 * (spread + fit_var).sqrt(), slices: slopes.len(), annuli: shells.len() })
}
