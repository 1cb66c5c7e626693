use fracheat::verifier::{run_check, run_suite, suite_json, CheckConfig};

#[test]
fn same_seed_same_report() {
    let cfg = CheckConfig { samples: 4, ..Default::default() };
    let ids = ["hardy", "kato", "picone"];
    let a = suite_json(&run_suite(&ids, &cfg).unwrap()).unwrap();
    let b = suite_json(&run_suite(&ids, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn suite_order_follows_the_request() {
    let cfg = CheckConfig { samples: 3, ..Default::default() };
    let reports = run_suite(&["algebra_abs", "hardy", "algebra_ab"], &cfg).unwrap();
    let ids: Vec<&str> = reports.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["algebra_abs", "hardy", "algebra_ab"]);
}

#[test]
fn other_seeds_still_pass() {
    for seed in [1, 99, 4242] {
        let cfg = CheckConfig { seed, samples: 5, ..Default::default() };
        for id in ["hardy", "kato", "algebra_ab"] {
            let report = run_check(id, &cfg).unwrap();
            assert!(report.passed, "{id} seed {seed}: {report:?}");
        }
    }
}
