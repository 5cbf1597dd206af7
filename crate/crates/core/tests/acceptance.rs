//! End-to-end acceptance run: builds the full-size pipeline (zeta grid to
//! 1e5, divisor table to 4.1e6) twice with different worker counts, then
//! judges each acceptance criterion from the written report with its own
//! pinned tolerance and prints one PASS/FAIL line per criterion.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use zlab_core::pipeline::{self, RunConfig};
use zlab_core::verify::{Check, Status, VerificationReport};

const T_MAX: f64 = 1.0e5;
const DIVISOR_LIMIT: u64 = 4_100_000;

fn config(dir: &Path, workers: usize) -> RunConfig {
    RunConfig {
        t_max: T_MAX,
        divisor_limit: Some(DIVISOR_LIMIT),
        out_dir: dir.to_path_buf(),
        workers,
        ..RunConfig::default()
    }
}

struct Outcome {
    number: usize,
    title: &'static str,
    pass: bool,
    detail: String,
}

struct Rows(BTreeMap<String, Check>);

impl Rows {
    fn get(&self, name: &str) -> Option<&Check> {
        self.0.get(name)
    }

    /// Measured value of a row that must exist and must not be skipped.
    fn value(&self, name: &str) -> Option<f64> {
        self.get(name)
            .filter(|c| c.status != Status::Skipped)
            .map(|c| c.measured)
    }

    fn at_most(&self, name: &str, limit: f64) -> (bool, String) {
        match self.value(name) {
            Some(v) => (v <= limit, format!("{name} = {v:.6e} (limit {limit:e})")),
            None => (false, format!("{name} missing or skipped")),
        }
    }

    fn within(&self, name: &str, lo: f64, hi: f64) -> (bool, String) {
        match self.value(name) {
            Some(v) => (lo <= v && v <= hi, format!("{name} = {v:.6} (band [{lo}, {hi}])")),
            None => (false, format!("{name} missing or skipped")),
        }
    }

    fn reported(&self, names: &[&str]) -> (bool, String) {
        let mut ok = true;
        let parts: Vec<String> = names
            .iter()
            .map(|n| match self.get(n) {
                Some(c) if c.status == Status::ReportOnly && c.measured.is_finite() => {
                    format!("{n} = {:.6}", c.measured)
                }
                _ => {
                    ok = false;
                    format!("{n} missing")
                }
            })
            .collect();
        (ok, parts.join(", "))
    }
}

fn all_of(parts: Vec<(bool, String)>) -> (bool, String) {
    let pass = parts.iter().all(|p| p.0);
    let detail = parts.into_iter().map(|p| p.1).collect::<Vec<_>>().join("; ");
    (pass, detail)
}

fn judge(rows: &Rows, same_reports: bool, timing: &Timing) -> Vec<Outcome> {
    let verify_budget = Duration::from_secs(10);
    let fast = (timing.verify <= verify_budget, format!("verify stage {:.1?}", timing.verify));
    let mut out = Vec::new();
    let mut push = |number, title, (pass, detail): (bool, String)| {
        out.push(Outcome {
            number,
            title,
            pass,
            detail,
        })
    };
    push(1, "divisor oracle equivalence", all_of(vec![rows.at_most("c01_divisor_oracle", 0.0), fast.clone()]));
    push(2, "Delta* identity", all_of(vec![rows.at_most("c02_delta_star_identity", 1e-9), fast.clone()]));
    push(
        3,
        "zeta evaluator accuracy",
        all_of(vec![
            rows.at_most("c03_rs_vs_em", 2e-8),
            rows.within("c03_zero_bracket", 14.134725 - 1e-6, 14.134725 + 1e-6),
        ]),
    );
    push(
        4,
        "exact interval identity",
        all_of(vec![
            rows.at_most("c04_interval_identity", 2.0 * 1e-4),
            (timing.pipeline <= Duration::from_secs(300), format!("pipeline {:.1?}", timing.pipeline)),
        ]),
    );
    push(
        5,
        "E1 main term",
        all_of(vec![
            rows.at_most("c05_e1_main_term", 10.0),
            (timing.pipeline <= Duration::from_secs(1800), format!("pipeline {:.1?}", timing.pipeline)),
        ]),
    );
    push(
        6,
        "R definition and size",
        all_of(vec![
            rows.within("c06_r_at_zero", 0.0, 0.0),
            rows.reported(&["c06_r_growth_1e3", "c06_r_growth_1e4", "c06_r_omega_1e3", "c06_r_omega_1e4"]),
        ]),
    );
    push(
        7,
        "mean square growth of E*",
        all_of(vec![
            rows.within("c07_estar_meansq_exponent", 1.28, 1.55),
            rows.reported(&["c07_logpoly3_c0", "c07_logpoly3_c1", "c07_logpoly3_c2", "c07_logpoly3_c3"]),
        ]),
    );
    push(
        8,
        "nested moment k=1",
        all_of(vec![
            rows.at_most("c08_nested_k1", 10.0),
            rows.reported(&["c08_dev_form_2T_over_e_pi", "c08_dev_form_4T_over_e"]),
        ]),
    );
    push(
        9,
        "nested moment k=2 leading term (report only)",
        rows.reported(&["c09_nested_k2_ratio", "c09_fit_e1", "c09_fit_e0"]),
    );
    push(
        10,
        "divisor-difference mean square",
        all_of(vec![
            rows.within("c10_diff_meansq", 0.5, 2.0),
            rows.at_most("c10_delta_halving", 0.01),
            fast.clone(),
        ]),
    );
    push(11, "smoothed-moment bracket", rows.at_most("c11_smoothed_bracket", 1e-6));
    push(12, "Hoelder/Cauchy-Schwarz consistency", rows.at_most("c12_holder", 1e-9));
    push(
        13,
        "determinism across worker counts",
        all_of(vec![
            rows.at_most("c13_determinism", 0.0),
            (same_reports, format!("report files identical for 1 and 4 workers: {same_reports}")),
        ]),
    );
    out
}

struct Timing {
    pipeline: Duration,
    verify: Duration,
}

fn run(dir: &Path, workers: usize) -> (VerificationReport, Timing) {
    let cfg = config(dir, workers);
    let start = Instant::now();
    pipeline::cmd_sieve(&cfg).unwrap();
    pipeline::cmd_grid(&cfg).unwrap();
    pipeline::cmd_error_terms(&cfg, false).unwrap();
    pipeline::cmd_moments(&cfg).unwrap();
    let before_verify = Instant::now();
    let report = pipeline::cmd_verify(&cfg).unwrap();
    let timing = Timing {
        pipeline: start.elapsed(),
        verify: before_verify.elapsed(),
    };
    (report, timing)
}

#[test]
fn acceptance() {
    let one = tempfile::tempdir().unwrap();
    let four = tempfile::tempdir().unwrap();
    let (report, timing) = run(one.path(), 1);
    run(four.path(), 4);

    let files = |d: &Path| {
        let p = pipeline::Paths::new(d);
        (fs::read(p.report_csv).unwrap(), fs::read(p.report_json).unwrap())
    };
    let same_reports = files(one.path()) == files(four.path());

    let rows = Rows(report.checks.iter().map(|c| (c.name.clone(), c.clone())).collect());
    let outcomes = judge(&rows, same_reports, &timing);

    println!();
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {:>2}: {} | {}", o.number, o.title, o.detail);
    }
    let failed: Vec<usize> = outcomes.iter().filter(|o| !o.pass).map(|o| o.number).collect();
    println!(
        "{} of {} criteria passed (pipeline {:.1?}, verify {:.1?})",
        outcomes.len() - failed.len(),
        outcomes.len(),
        timing.pipeline,
        timing.verify
    );
    assert_eq!(outcomes.len(), 13);
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
