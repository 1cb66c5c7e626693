use fracheat::lattice::{make_lattice, sample};
use fracheat::monotone_solver::{run_observed, singularity_profile, FitWindow, MonotoneScheme, RunConfig, Verdict};
use fracheat::spectral_constants::{lambda_max, mu_of, ProblemSpec};

/// Late iterates of a bounded run inherit the `|x|^{-mu}` singularity of the potential.
#[test]
fn bounded_iterates_are_singular_at_the_origin() {
    let spec = ProblemSpec::new(2, 0.5, 0.5 * lambda_max(2, 0.5).unwrap(), 3.0).unwrap();
    let mu = mu_of(spec.lambda, 2, 0.5).unwrap();
    let lat = make_lattice(2, 4.0, 32, 0.5, 4.0, 18).unwrap();
    let f = sample(&lat, |x, t| if t > 0.0 { 0.05 * (-x.iter().map(|v| v * v).sum::<f64>() - 4.0 * (t - 0.75).powi(2)).exp() } else { 0.0 }).unwrap();
    let mut last = None;
    let report = run_observed(&MonotoneScheme::new(spec, f).unwrap(), &RunConfig::default(), |state| {
        last = Some(state.w.clone());
        Ok(())
    })
    .unwrap();
    assert_ne!(report.verdict, Verdict::NormEscape);
    let fit = singularity_profile(last.as_ref().unwrap(), &FitWindow { t_lo: 1.0, t_hi: 4.0, r_max: 4.0 * lat.hx() }).unwrap();
    assert!(fit.slope < 0.0 && fit.slope <= -mu + 0.1, "slope {} vs mu {mu}", fit.slope);
}
