use fracheat::cli_sweep::{persist, run_sweep, SweepConfig, CSV_HEADER};
use fracheat::monotone_solver::Verdict;
use fracheat::spectral_constants::RegimeLabel;

#[test]
fn default_sweep_matches_the_predicted_regimes_below_the_critical_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = SweepConfig { output_dir: dir.path().to_path_buf(), ..Default::default() };
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        match row.predicted {
            RegimeLabel::BlowUp => assert_eq!(row.observed, Verdict::NormEscape),
            RegimeLabel::ConditionalGlobal => assert_eq!(row.observed, Verdict::ConvergedBelowCap),
            // the grid cannot resolve the origin singularity above the critical exponent
            _ => assert!(!row.agrees),
        }
    }
    let summary = persist(&cfg, &rows).unwrap();
    assert_eq!(summary.mismatches, 1);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), CSV_HEADER);
    assert_eq!(csv.lines().count(), 4);
    assert!(dir.path().join("sweep.json").exists());
}
