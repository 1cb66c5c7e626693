//! Configuration, the `(s, lambda, p)` phase-diagram sweep and its CSV/JSON output.

use crate::error::{Error, Result};
use crate::lattice::{make_lattice, sample, Field, Lattice};
use crate::monotone_solver::{run, RunConfig, TrajectoryReport, Verdict};
use crate::spectral_constants::{classify_regime, exponents, ExponentBundle, ProblemSpec, RegimeLabel};
use crate::supersolution_lab::{find_certificate, SupersolutionCertificate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Fixed CSV column order.
pub const CSV_HEADER: &str = "N,s,lambda,p,mu,p_plus,F_las,F_tilde,predicted,observed,escape_time,final_norm";
/// Sampled `p` keep at least this relative distance from `F` and `p_+`.
pub const BAND_GUARD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LatticeSpec {
    pub half_width: f64,
    pub m: usize,
    pub t_neg: f64,
    pub t_end: f64,
    pub k: usize,
}

impl Default for LatticeSpec {
    /// `ht = 1/4`, so the first positive node sits at `t = 1/4`.
    fn default() -> Self {
        Self { half_width: 4.0, m: 16, t_neg: 0.5, t_end: 8.0, k: 34 }
    }
}

impl LatticeSpec {
    pub fn build(&self, dim: usize) -> Result<Lattice> {
        make_lattice(dim, self.half_width, self.m, self.t_neg, self.t_end, self.k)
    }
}

/// Source term `f`: a space-time Gaussian, or a multiple of a certificate's
/// data envelope with the same time profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatumSpec {
    /// Peak of `exp(-|x|^2 - 4 (t - peak_time)^2)` for uncertified runs.
    pub amplitude: f64,
    /// Multiple of the data envelope for certified runs.
    pub envelope_scale: f64,
    pub peak_time: f64,
}

impl Default for DatumSpec {
    fn default() -> Self {
        Self { amplitude: 1.0, envelope_scale: 0.05, peak_time: 0.75 }
    }
}

impl DatumSpec {
    fn time_profile(&self, t: f64) -> f64 {
        (-4.0 * (t - self.peak_time).powi(2)).exp()
    }

    pub fn gaussian(&self, lat: &Lattice) -> Result<Field> {
        sample(lat, |x, t| if t > 0.0 { self.amplitude * (-x.iter().map(|v| v * v).sum::<f64>()).exp() * self.time_profile(t) } else { 0.0 })
    }

    pub fn certified(&self, lat: &Lattice, cert: &SupersolutionCertificate) -> Result<Field> {
        sample(lat, |x, t| {
            if t > 0.0 {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                self.envelope_scale * cert.data_envelope(r, t) * self.time_profile(t)
            } else {
                0.0
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(rename = "N")]
    pub dim: usize,
    pub s: Vec<f64>,
    pub lambda_fractions: Vec<f64>,
    pub p_per_band: usize,
    pub lattice: LatticeSpec,
    pub solver: RunConfig,
    pub datum: DatumSpec,
    pub output_dir: PathBuf,
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            s: vec![0.5],
            lambda_fractions: vec![0.5],
            p_per_band: 1,
            lattice: LatticeSpec::default(),
            solver: RunConfig::default(),
            datum: DatumSpec::default(),
            output_dir: PathBuf::from("sweep_out"),
            threads: None,
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.is_empty() || self.lambda_fractions.is_empty() {
            return Err(Error::Config("s and lambda_fractions must be nonempty".into()));
        }
        if let Some(f) = self.lambda_fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::Config(format!("lambda fraction {f} outside (0, 1)")));
        }
        if let Some(s) = self.s.iter().find(|s| !(**s > 0.0 && **s < 1.0)) {
            return Err(Error::Config(format!("s = {s} outside (0, 1)")));
        }
        if self.p_per_band == 0 {
            return Err(Error::Config("p_per_band must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        self.lattice.build(self.dim)?;
        Ok(())
    }
}

/// Single monotone run, as read by `solve`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(rename = "N")]
    pub dim: usize,
    pub s: f64,
    pub lambda_fraction: f64,
    pub p: f64,
    pub lattice: LatticeSpec,
    pub solver: RunConfig,
    pub datum: DatumSpec,
    /// Drive the run with a certified envelope datum instead of the Gaussian.
    pub certified: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self { dim: 3, s: 0.5, lambda_fraction: 0.5, p: 2.0, lattice: LatticeSpec::default(), solver: RunConfig::default(), datum: DatumSpec::default(), certified: false }
    }
}

impl SolveConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn spec(&self) -> Result<ProblemSpec> {
        ProblemSpec::from_fraction(self.dim, self.s, self.lambda_fraction, self.p)
    }

    /// Run to a verdict; a certified run fails if no certificate exists at this point.
    pub fn run(&self) -> Result<TrajectoryReport> {
        let spec = self.spec()?;
        let lat = self.lattice.build(self.dim)?;
        let f = if self.certified { self.datum.certified(&lat, &find_certificate(&spec)?)? } else { self.datum.gaussian(&lat)? };
        run(&spec, &f, &self.solver)
    }
}

/// Evenly spaced interior points of `(lo, hi)`, dropping any within
/// [`BAND_GUARD`] relative of a critical exponent.
fn band_points(lo: f64, hi: f64, count: usize, critical: &[f64]) -> Vec<f64> {
    (1..=count)
        .map(|j| lo + (hi - lo) * j as f64 / (count + 1) as f64)
        .filter(|p| critical.iter().all(|c| (p - c).abs() > BAND_GUARD * c))
        .collect()
}

/// `p` samples below `F`, between `F` and `p_+`, and in `(p_+, 2 p_+ - F)` above.
pub fn sample_p(bundle: &ExponentBundle, count: usize) -> Vec<f64> {
    let (f, top) = (bundle.fujita_F, bundle.p_plus);
    let critical = [f, top];
    let mut out = band_points(1.0, f, count, &critical);
    out.extend(band_points(f, top, count, &critical));
    out.extend(band_points(top, 2.0 * top - f, count, &critical));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DatumKind {
    Gaussian,
    Certified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spec: ProblemSpec,
    pub exponents: ExponentBundle,
    pub predicted: RegimeLabel,
    pub observed: Verdict,
    pub datum: DatumKind,
    pub escape_time: Option<f64>,
    pub final_norm: f64,
    pub n_final: usize,
    pub growth_factor: f64,
    /// Whether the observed verdict is the one the regime calls for.
    pub agrees: bool,
}

impl SweepRow {
    pub fn csv_line(&self) -> String {
        let b = &self.exponents;
        let escape = self.escape_time.map(|t| t.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.spec.dim, self.spec.s, self.spec.lambda, self.spec.p, b.mu, b.p_plus, b.fujita_F, b.fujita_F_tilde, self.predicted, self.observed, escape, self.final_norm
        )
    }
}

/// Verdict a regime calls for: escape where no global solution exists.
pub fn expected_verdict(label: RegimeLabel) -> Option<Verdict> {
    match label {
        RegimeLabel::BlowUp | RegimeLabel::NonExistence => Some(Verdict::NormEscape),
        RegimeLabel::ConditionalGlobal => Some(Verdict::ConvergedBelowCap),
        RegimeLabel::CriticalOpen => None,
    }
}

/// One sweep point. In the conditional band the datum comes from a certificate
/// when one is found, otherwise the Gaussian datum is used and recorded as such.
pub fn run_point(spec: &ProblemSpec, lattice: &LatticeSpec, datum: &DatumSpec, solver: &RunConfig) -> Result<(SweepRow, TrajectoryReport)> {
    let bundle = exponents(spec)?;
    let predicted = classify_regime(spec.p, &bundle);
    let lat = lattice.build(spec.dim)?;
    let cert = if predicted == RegimeLabel::ConditionalGlobal { find_certificate(spec).ok() } else { None };
    let (f, kind) = match &cert {
        Some(c) => (datum.certified(&lat, c)?, DatumKind::Certified),
        None => (datum.gaussian(&lat)?, DatumKind::Gaussian),
    };
    let report = run(spec, &f, solver)?;
    let row = SweepRow {
        spec: *spec,
        exponents: bundle,
        predicted,
        observed: report.verdict,
        datum: kind,
        escape_time: report.escape_time,
        final_norm: report.final_norm,
        n_final: report.n_final,
        growth_factor: report.growth_factor,
        agrees: expected_verdict(predicted) == Some(report.verdict),
    };
    Ok((row, report))
}

/// Every `(s, lambda, p)` point of the config, in output order.
pub fn sweep_points(cfg: &SweepConfig) -> Result<Vec<ProblemSpec>> {
    let mut points = Vec::new();
    for &s in &cfg.s {
        for &fraction in &cfg.lambda_fractions {
            let base = ProblemSpec::from_fraction(cfg.dim, s, fraction, 2.0)?;
            let bundle = exponents(&base)?;
            for p in sample_p(&bundle, cfg.p_per_band) {
                points.push(ProblemSpec { p, ..base });
            }
        }
    }
    Ok(points)
}

/// Run the sweep on a worker pool; rows come back in point order.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let points = sweep_points(cfg)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| points.par_iter().map(|spec| run_point(spec, &cfg.lattice, &cfg.datum, &cfg.solver).map(|r| r.0)).collect())
}

pub fn write_csv(rows: &[SweepRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(out, "{}", row.csv_line())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub mismatches: usize,
}

/// Write `sweep.csv` and `sweep.json` under the output directory.
pub fn persist(cfg: &SweepConfig, rows: &[SweepRow]) -> Result<SweepSummary> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    write_csv(rows, std::fs::File::create(cfg.output_dir.join("sweep.csv"))?)?;
    let summary = SweepSummary { config: cfg.clone(), rows: rows.to_vec(), mismatches: rows.iter().filter(|r| !r.agrees).count() };
    std::fs::write(cfg.output_dir.join("sweep.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}
