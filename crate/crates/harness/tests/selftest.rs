use std::fs;

use fibertherm_harness::selftest::{selftest, SelftestOptions};

#[test]
fn perturbed_unstable_eigenvalue_fails_the_entropy_check() {
    let dir = std::env::temp_dir().join(format!("fibertherm-perturbed-{}", std::process::id()));
    let opts = SelftestOptions {
        seed: 0,
        lambda_scale: 1.1,
        only: Some(vec!["cat_entropy".into()]),
    };
    let report = selftest(&opts, &dir).unwrap();
    assert!(!report.pass());
    let entropy = report.group("cat_entropy").unwrap();
    let c = entropy.checks.iter().find(|c| c.quantity.starts_with("entropy")).unwrap();
    assert!(!c.pass, "{c:?}");
    // The failure is reported in the written table, not only in memory.
    let csv = fs::read_to_string(dir.join("selftest.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("cat_entropy,entropy") && l.ends_with(",fail")));
    let summary = fs::read_to_string(dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"pass\": false"));
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn unknown_groups_are_refused() {
    let dir = std::env::temp_dir().join(format!("fibertherm-unknown-group-{}", std::process::id()));
    let opts = SelftestOptions {
        only: Some(vec!["entropy".into()]),
        ..SelftestOptions::default()
    };
    assert!(selftest(&opts, &dir).is_err());
}

#[test]
fn quick_groups_pass() {
    let dir = std::env::temp_dir().join(format!("fibertherm-quick-{}", std::process::id()));
    let only = ["oracle_pressure", "oracle_spectrum", "fiber_independence", "gibbs_ratio", "invariants"];
    let opts = SelftestOptions {
        only: Some(only.iter().map(|s| s.to_string()).collect()),
        ..SelftestOptions::default()
    };
    let report = selftest(&opts, &dir).unwrap();
    assert!(report.pass(), "{}", report.table());
    assert_eq!(report.groups.len(), only.len());
    let _ = fs::remove_dir_all(&dir);
}
