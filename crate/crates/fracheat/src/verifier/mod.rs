//! Named numeric checks of the inequalities and identities behind the model,
//! runnable one at a time or as a concurrent suite.

pub mod families;
pub mod identities;
pub mod inequalities;

use crate::error::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Absolute slack for pointwise inequalities on inputs normalized to `max = 1`.
pub const POINTWISE_SLACK: f64 = 1e-8;
/// Relative slack for inequalities between integrals.
pub const INTEGRAL_SLACK: f64 = 1e-3;

/// Every check id, in catalog order.
pub const CATALOG: &[&str] = &[
    "hardy",
    "hardy_extended",
    "kato",
    "algebra_ab",
    "algebra_abs",
    "radial_K",
    "symbol",
    "inversion",
    "semigroup",
    "adjoint",
    "ground_state",
    "radial_flap",
    "extension",
    "muckenhoupt",
    "picone",
    "ls_bound",
];

/// The inequality battery run by `verify --suite`.
pub const SUITE: &[&str] = &["hardy", "kato", "algebra_ab", "algebra_abs", "radial_K", "adjoint", "muckenhoupt", "picone", "ls_bound"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub passed: bool,
    /// Smallest margin over all samples; negative means a violation.
    pub worst_margin: f64,
    /// A margin counts as a pass when it is at least `-tolerance`.
    pub tolerance: f64,
    pub samples: usize,
    pub params: serde_json::Value,
}

impl CheckReport {
    /// Report from per-sample margins. A non-finite margin is a failure.
    pub fn from_margins(id: &str, margins: &[f64], tolerance: f64, params: serde_json::Value) -> Self {
        let worst = margins.iter().fold(f64::INFINITY, |acc, &m| if m.is_finite() { acc.min(m) } else { f64::MIN });
        let worst = if margins.is_empty() { f64::MIN } else { worst };
        Self { id: id.to_string(), passed: worst >= -tolerance, worst_margin: worst, tolerance, samples: margins.len(), params }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub seed: u64,
    /// Test functions (or parameter draws) per check.
    pub samples: usize,
    pub dim: Option<usize>,
    pub s: Option<f64>,
    /// `lambda / Lambda_{N,s}` for checks that need a potential.
    pub lambda_fraction: Option<f64>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self { seed: 20240501, samples: 20, dim: None, s: None, lambda_fraction: None }
    }
}

impl CheckConfig {
    fn rng_for(&self, id: &str) -> ChaCha8Rng {
        // FNV-1a keeps the per-check streams independent and stable across builds
        let hash = id.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
        ChaCha8Rng::seed_from_u64(self.seed ^ hash)
    }

    fn dim_or(&self, default: usize) -> usize {
        self.dim.unwrap_or(default)
    }

    fn s_or(&self, default: f64) -> f64 {
        self.s.unwrap_or(default)
    }

    fn fraction(&self) -> Result<f64> {
        let f = self.lambda_fraction.unwrap_or(0.5);
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Config(format!("lambda fraction {f} outside (0, 1)")));
        }
        Ok(f)
    }
}

/// Run one catalog check.
pub fn run_check(id: &str, config: &CheckConfig) -> Result<CheckReport> {
    if config.samples == 0 {
        return Err(Error::Config("samples must be positive".into()));
    }
    let mut rng = config.rng_for(id);
    match id {
        "hardy" => inequalities::hardy(config, &mut rng),
        "hardy_extended" => inequalities::hardy_extended(config, &mut rng),
        "kato" => inequalities::kato(config, &mut rng),
        "algebra_ab" => inequalities::algebra_ab(config, &mut rng),
        "algebra_abs" => inequalities::algebra_abs(config, &mut rng),
        "radial_K" => inequalities::radial_k(config, &mut rng),
        "muckenhoupt" => inequalities::muckenhoupt(config, &mut rng),
        "picone" => inequalities::picone(config, &mut rng),
        "ls_bound" => inequalities::ls_bound(config, &mut rng),
        "symbol" => identities::symbol(config),
        "inversion" => identities::inversion(config),
        "semigroup" => identities::semigroup(config),
        "adjoint" => identities::adjoint(config, &mut rng),
        "ground_state" => identities::ground_state(config),
        "radial_flap" => identities::radial_flap(config),
        "extension" => identities::extension(config),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

/// Run several checks concurrently; reports come back in the order of `ids`.
pub fn run_suite(ids: &[&str], config: &CheckConfig) -> Result<Vec<CheckReport>> {
    if let Some(bad) = ids.iter().find(|id| !CATALOG.contains(id)) {
        return Err(Error::UnknownCheck(bad.to_string()));
    }
    ids.par_iter().map(|id| run_check(id, config)).collect()
}

/// Suite report as a pretty JSON array.
pub fn suite_json(reports: &[CheckReport]) -> Result<String> {
    Ok(serde_json::to_string_pretty(reports)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CheckConfig {
        CheckConfig { samples: 3, ..Default::default() }
    }

    #[test]
    fn unknown_id_is_an_error() {
        assert!(matches!(run_check("unknown", &small()), Err(Error::UnknownCheck(_))));
        assert!(matches!(run_suite(&["hardy", "nope"], &small()), Err(Error::UnknownCheck(_))));
    }

    #[test]
    fn margins_fold_to_the_worst() {
        let r = CheckReport::from_margins("x", &[0.3, -1e-9, 0.1], 1e-8, serde_json::Value::Null);
        assert!(r.passed);
        assert_eq!(r.worst_margin, -1e-9);
        assert_eq!(r.samples, 3);
        let bad = CheckReport::from_margins("x", &[0.3, f64::NAN], 1e-8, serde_json::Value::Null);
        assert!(!bad.passed);
        assert!(!CheckReport::from_margins("x", &[], 1e-8, serde_json::Value::Null).passed);
    }

    #[test]
    fn seeds_differ_per_check() {
        use rand::Rng;
        let c = small();
        assert_ne!(c.rng_for("hardy").random::<u64>(), c.rng_for("kato").random::<u64>());
        assert_eq!(c.rng_for("hardy").random::<u64>(), c.rng_for("hardy").random::<u64>());
    }

    #[test]
    fn algebraic_checks_pass_and_repeat() {
        let a = run_suite(&["algebra_ab", "algebra_abs"], &small()).unwrap();
        let b = run_suite(&["algebra_ab", "algebra_abs"], &small()).unwrap();
        assert!(a.iter().all(|r| r.passed), "{a:?}");
        assert_eq!(suite_json(&a).unwrap(), suite_json(&b).unwrap());
    }

    #[test]
    fn bad_fraction_is_rejected() {
        let c = CheckConfig { lambda_fraction: Some(1.0), ..small() };
        assert!(matches!(run_check("kato", &c), Err(Error::Config(_))));
    }
}
