use std::fs;

use zlab_core::persist;
use zlab_core::pipeline::{self, RunConfig};
use zlab_core::verify::Status;
use zlab_core::Error;

fn config(dir: &std::path::Path, t_max: f64) -> RunConfig {
    RunConfig {
        t_max,
        out_dir: dir.to_path_buf(),
        workers: 2,
        ..RunConfig::default()
    }
}

#[test]
fn sieve_matches_floor_sum_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig {
        divisor_limit: Some(1_000_000),
        ..config(dir.path(), 100.0)
    };
    let path = pipeline::cmd_sieve(&cfg).unwrap();
    let (table, _) = persist::load_divisor_table(&path).unwrap();
    let n = 1_000_000u64;
    let oracle: u64 = (1..=n).map(|k| n / k).sum();
    assert_eq!(table.prefix_sum(n), oracle);
    assert_eq!(table.prefix_sum(n), 13_970_034);
}

#[test]
fn small_pipeline_passes_identities_and_is_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 2000.0);
    cfg.suite = "identities".into();
    let start = std::time::Instant::now();
    let report = pipeline::run_all(&cfg).unwrap();
    assert!(start.elapsed().as_secs() < 120);
    assert_eq!(report.exit_code(), 0);
    for c in report.checks.iter().filter(|c| c.status != Status::ReportOnly) {
        assert_eq!(c.status, Status::Pass, "{c:?}");
        assert!(!c.inputs.is_empty(), "{} names its inputs", c.name);
    }
    let paths = cfg.paths();
    let before: Vec<_> = [&paths.divisor_table, &paths.zeta_grid, &paths.error_terms]
        .iter()
        .map(|p| fs::metadata(p).unwrap().modified().unwrap())
        .collect();
    let first = fs::read(&paths.report_csv).unwrap();
    pipeline::run_all(&cfg).unwrap();
    let after: Vec<_> = [&paths.divisor_table, &paths.zeta_grid, &paths.error_terms]
        .iter()
        .map(|p| fs::metadata(p).unwrap().modified().unwrap())
        .collect();
    assert_eq!(before, after, "nothing is rewritten when inputs are unchanged");
    assert_eq!(first, fs::read(&paths.report_csv).unwrap());

    let plot = pipeline::cmd_export_plot(&cfg, 10).unwrap();
    let text = fs::read_to_string(plot).unwrap();
    assert!(text.starts_with("t,E,Estar,R\n"));
    assert!(pipeline::cmd_error_terms(&cfg, true).is_ok());
    assert!(fs::read_to_string(&paths.error_terms_csv).unwrap().starts_with("t,E,Estar,R,E1\n"));
}

#[test]
fn interrupted_grid_resumes_to_the_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut ca = config(a.path(), 1500.0);
    ca.checkpoint_every = 4000;
    let cb = config(b.path(), 1500.0);

    let partial = pipeline::cmd_grid_budget(&ca, 9000).unwrap();
    assert!(!partial.is_complete());
    assert_eq!(partial.points_done, 9000);
    assert!(ca.paths().checkpoint.exists());
    let resumed = pipeline::cmd_grid_budget(&ca, usize::MAX).unwrap();
    assert_eq!(resumed.resumed_from, Some(9000));
    assert!(resumed.is_complete());
    assert!(!ca.paths().checkpoint.exists());
    let again = pipeline::cmd_grid_budget(&ca, usize::MAX).unwrap();
    assert!(again.already_complete);

    pipeline::cmd_grid(&cb).unwrap();
    assert_eq!(
        fs::read(&ca.paths().zeta_grid).unwrap(),
        fs::read(&cb.paths().zeta_grid).unwrap()
    );
}

#[test]
fn verify_refuses_inputs_that_changed_underneath() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 800.0);
    pipeline::cmd_sieve(&cfg).unwrap();
    pipeline::cmd_grid(&cfg).unwrap();
    pipeline::cmd_error_terms(&cfg, false).unwrap();
    // a different but internally consistent divisor table
    let other = RunConfig {
        divisor_limit: Some(cfg.divisor_limit() + 1),
        ..cfg.clone()
    };
    pipeline::cmd_sieve(&other).unwrap();
    match pipeline::cmd_verify(&cfg) {
        Err(Error::Provenance { .. }) => {}
        other => panic!("expected a provenance error, got {other:?}"),
    }
}

#[test]
fn verify_with_no_inputs_skips_everything_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let report = pipeline::cmd_verify(&config(dir.path(), 100.0)).unwrap();
    assert!(report.checks.iter().all(|c| c.status == Status::Skipped));
    assert_ne!(report.exit_code(), 0);
}

#[test]
fn config_errors_name_the_field() {
    let cfg = RunConfig {
        c_step: -1.0,
        ..RunConfig::default()
    };
    match cfg.validate() {
        Err(Error::Config { field, .. }) => assert_eq!(field, "c_step"),
        other => panic!("{other:?}"),
    }
    let bad_suite = RunConfig {
        suite: "nope".into(),
        ..RunConfig::default()
    };
    assert!(matches!(bad_suite.validate(), Err(Error::Config { field, .. }) if field == "suite"));
}
