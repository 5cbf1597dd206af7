use std::collections::BTreeMap;
use std::f64::consts::{E, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_power_law, linear_least_squares, log_spaced, FitModel};
use super::report::{Check, VerificationReport};
use crate::divisor::{divisor_main_term, DivisorTable, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::error_terms::{main_term, ErrorTermGrid, Field};
use crate::moments::{
    abs_moment, diff_mean_square, lemma1_diagnostic, smoothed_moment_j, DiffTarget, NestedMoments,
    DEFAULT_DIFF_STEP,
};
use crate::zeta::{evaluate_range, hardy_z, hardy_z_em, ZetaEvaluator, ZetaGrid};

pub const SUITES: [&str; 3] = ["identities", "main-terms", "all"];

/// Everything a suite may read. Missing inputs turn the rows that need them
/// into SKIPPED rows.
#[derive(Debug, Clone, Copy, Default)]
pub struct SuiteInputs<'a> {
    pub table: Option<&'a DivisorTable>,
    pub zgrid: Option<&'a ZetaGrid>,
    pub grid: Option<&'a ErrorTermGrid>,
    /// sha256 of the file each input was loaded from, keyed by input name.
    pub digests: Option<&'a BTreeMap<String, String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteParams {
    pub seed: u64,
    /// Worker count compared against a single worker in the determinism row.
    pub workers: usize,
    /// Slack constant for |E₁(T) − πT| ≤ c·T^{3/4}.
    pub e1_slack: f64,
    /// Slack constant for the k = 1 nested moment against H² + T^{3/4}.
    pub nested_slack: f64,
}

impl Default for SuiteParams {
    fn default() -> Self {
        Self {
            seed: 0x5eed_2024,
            workers: 4,
            e1_slack: 10.0,
            nested_slack: 10.0,
        }
    }
}

struct Ctx<'a> {
    inputs: SuiteInputs<'a>,
    params: &'a SuiteParams,
}

impl Ctx<'_> {
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.params.seed);
        r.set_stream(stream);
        r
    }

    fn tag(&self, names: &[&str], mut rows: Vec<Check>) -> Vec<Check> {
        let inputs: Vec<String> = names
            .iter()
            .map(|n| {
                let d = self
                    .inputs
                    .digests
                    .and_then(|m| m.get(*n))
                    .map_or("in-memory", String::as_str);
                format!("{n}={d}")
            })
            .collect();
        for r in &mut rows {
            r.inputs = inputs.clone();
        }
        rows
    }
}

/// Runs the named suite. Rows appear in criterion order, and identical inputs
/// give identical reports.
pub fn run_suite(name: &str, inputs: SuiteInputs<'_>, params: &SuiteParams) -> Result<VerificationReport> {
    type Crit = fn(&Ctx<'_>) -> Vec<Check>;
    let identities: &[Crit] = &[c01, c02, c03, c04, c11, c12, c13];
    let main_terms: &[Crit] = &[c05, c06, c07, c08, c09, c10];
    let all: &[Crit] = &[c01, c02, c03, c04, c05, c06, c07, c08, c09, c10, c11, c12, c13];
    let list = match name {
        "identities" => identities,
        "main-terms" => main_terms,
        "all" => all,
        other => {
            return Err(Error::Config {
                field: "suite".into(),
                reason: format!("unknown suite {other:?}; expected one of {SUITES:?}"),
            })
        }
    };
    let ctx = Ctx { inputs, params };
    let checks = list.iter().flat_map(|c| c(&ctx)).collect();
    let mut provenance = BTreeMap::new();
    if let Some(d) = inputs.digests {
        provenance.extend(d.iter().map(|(k, v)| (format!("input.{k}"), v.clone())));
    }
    provenance.insert("suite".into(), name.into());
    provenance.insert(
        "params".into(),
        serde_json::to_string(params).expect("params serialize"),
    );
    Ok(VerificationReport {
        suite: name.into(),
        checks,
        provenance,
    })
}

fn floor_sum(n: u64) -> u64 {
    (1..=n).map(|k| n / k).sum()
}

fn c01(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c01_divisor_oracle";
    let Some(table) = cx.inputs.table else {
        return vec![Check::skipped(NAME, "no divisor table")];
    };
    let exhaustive = table.limit().min(10_000);
    let random_max = table.limit().min(1_000_000);
    let mut rng = cx.rng(1);
    let picks: Vec<u64> = (0..1000).map(|_| rng.random_range(1..=random_max)).collect();
    let bad = (1..=exhaustive)
        .into_par_iter()
        .chain(picks.into_par_iter())
        .filter(|&n| table.prefix_sum(n) != floor_sum(n))
        .count();
    let note = format!("exhaustive n <= {exhaustive}; 1000 random n <= {random_max}");
    cx.tag(
        &["divisor_table"],
        vec![Check::judged(NAME, bad as f64, 0.0, 0.0).with_note(note)],
    )
}

fn c02(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c02_delta_star_identity";
    let Some(table) = cx.inputs.table else {
        return vec![Check::skipped(NAME, "no divisor table")];
    };
    let x_max = (table.limit() as f64 / 4.0).min(2.5e5);
    if x_max < 1.0 {
        return vec![Check::skipped(NAME, "divisor table below 4")];
    }
    let mut rng = cx.rng(2);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let x = rng.random_range(1.0..=x_max);
        let a = table.delta_star(x).expect("4x within table");
        let b = table.delta_star_alt(x).expect("4x within table");
        worst = worst.max((a - b).abs() / (1.0 + divisor_main_term(x).abs()));
    }
    cx.tag(
        &["divisor_table"],
        vec![Check::judged(NAME, worst, 0.0, 1e-9).with_note(format!("10^4 random x in [1, {x_max}]"))],
    )
}

fn c03(cx: &Ctx<'_>) -> Vec<Check> {
    let Some(zgrid) = cx.inputs.zgrid else {
        return vec![
            Check::skipped("c03_rs_vs_em", "no zeta grid (evaluator settings come from it)"),
            Check::skipped("c03_zero_bracket", "no zeta grid"),
        ];
    };
    let cfg = *zgrid.eval_config();
    let thr = cfg.small_t_threshold;
    let agree = ZetaEvaluator::new(cfg, thr + 60.0).and_then(|ev| {
        (0..100).try_fold(0.0f64, |worst, i| {
            let t = thr + 0.5 * i as f64 + 0.123;
            let rs = ev.hardy_z(t)?;
            let (em, _) = hardy_z_em(t, cfg.em_terms)?;
            Ok(worst.max((rs - em).abs()))
        })
    });
    let agree = match agree {
        Ok(w) => Check::judged("c03_rs_vs_em", w, 0.0, 2e-8)
            .with_note(format!("100 points in [{thr}, {}]", thr + 50.0)),
        Err(e) => Check::judged("c03_rs_vs_em", f64::INFINITY, 0.0, 2e-8).with_note(e.to_string()),
    };
    let z = |t: f64| hardy_z(t, &cfg).unwrap_or(f64::NAN);
    let (mut a, mut b) = (14.0, 14.2);
    let bracket = if z(a) * z(b) < 0.0 {
        let fa = z(a);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if (z(m) < 0.0) == (fa < 0.0) {
                a = m;
            } else {
                b = m;
            }
        }
        let root = 0.5 * (a + b);
        Check::judged("c03_zero_bracket", root, 14.134725, 1e-6)
    } else {
        Check::judged("c03_zero_bracket", f64::NAN, 14.134725, 1e-6).with_note("no sign change in [14, 14.2]")
    };
    cx.tag(&["zeta_grid"], vec![agree, bracket])
}

fn c04(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c04_interval_identity";
    let (Some(zgrid), Some(grid)) = (cx.inputs.zgrid, cx.inputs.grid) else {
        return vec![Check::skipped(NAME, "needs zeta grid and error-term grid")];
    };
    let top = grid.t_max().min(zgrid.t_max()).min(1e4);
    let h_max = (top / 4.0).min(100.0);
    if h_max < 1.0 {
        return vec![Check::skipped(NAME, "grid shorter than 4")];
    }
    let mut rng = cx.rng(4);
    let mut worst = 0.0f64;
    let mut err = None;
    for _ in 0..100 {
        let h = rng.random_range(1.0..=h_max);
        let t = rng.random_range(h..=top - h);
        let r = (|| -> Result<f64> {
            let direct = zgrid.integrate(t - h, t + h)?;
            let via = main_term(t + h) - main_term(t - h) + grid.e_at(zgrid, t + h)?
                - grid.e_at(zgrid, t - h)?;
            Ok((direct - via).abs() / direct)
        })();
        match r {
            Ok(v) => worst = worst.max(v),
            Err(e) => err = Some(e.to_string()),
        }
    }
    let tol = 2.0 * grid.quadrature_tol();
    let row = match err {
        None => Check::judged(NAME, worst, 0.0, tol)
            .with_note(format!("100 random (t, H), t <= {top}, 1 <= H <= {h_max}; relative")),
        Some(e) => Check::judged(NAME, f64::INFINITY, 0.0, tol).with_note(e),
    };
    cx.tag(&["zeta_grid", "error_terms"], vec![row])
}

fn c05(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c05_e1_main_term";
    let Some(grid) = cx.inputs.grid.filter(|g| g.has(Field::E1)) else {
        return vec![Check::skipped(NAME, "no error-term grid with E1")];
    };
    let top = grid.t_max().min(1e5);
    if top < 1e3 {
        return vec![Check::skipped(NAME, format!("grid ends at {} < 1000", grid.t_max()))];
    }
    let c = cx.params.e1_slack;
    let mut worst = 0.0f64;
    let mut last = f64::NAN;
    for t in log_spaced(1e3, top, 20) {
        let e1 = grid.value_at(Field::E1, t).expect("inside grid");
        worst = worst.max((e1 - PI * t).abs() / t.powf(0.75));
        last = (e1 / t - PI).abs() * t.powf(0.25);
    }
    let rows = vec![
        Check::judged(NAME, worst, 0.0, c).with_note(format!("20 log-spaced T in [1000, {top}]; max |E1-pi T|/T^(3/4)")),
        Check::report("c05_e1_scaled_at_top", last, 0.0, c).with_note(format!("|E1/T - pi| T^(1/4) at T = {top}")),
    ];
    cx.tag(&["error_terms"], rows)
}

fn c06(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c06_r_at_zero";
    let Some(grid) = cx.inputs.grid else {
        return vec![Check::skipped(NAME, "no error-term grid")];
    };
    let Some(r) = grid.r() else {
        return vec![Check::skipped(NAME, "R not computed")];
    };
    let t = grid.t_values();
    let mut rows = vec![Check::judged(NAME, r[0], 0.0, 0.0)];
    let mut growth = Vec::new();
    for (lo, label) in [(1e3, "1e3"), (1e4, "1e4")] {
        let hi = 10.0 * lo;
        if grid.t_max() < hi {
            rows.push(Check::skipped(
                format!("c06_r_growth_{label}"),
                format!("decade [{lo}, {hi}] not covered"),
            ));
            continue;
        }
        let range = grid.layout().nodes_in(lo, hi);
        let (mut g, mut om) = (0.0f64, 0.0f64);
        for i in range {
            g = g.max(r[i].abs() / t[i].powf(0.6503));
            om = om.max(r[i].abs() / (t[i].sqrt() * t[i].ln().powf(1.5)));
        }
        growth.push(g);
        rows.push(
            Check::report(format!("c06_r_growth_{label}"), g, 0.0, 0.0)
                .with_note(format!("max |R|/T^0.6503 on [{lo}, {hi}]")),
        );
        rows.push(
            Check::report(format!("c06_r_omega_{label}"), om, 0.0, 0.0)
                .with_note(format!("max |R|/(T^(1/2) log^(3/2) T) on [{lo}, {hi}]")),
        );
    }
    if growth.len() == 2 {
        let nonincreasing = if growth[1] <= growth[0] { 1.0 } else { 0.0 };
        rows.push(
            Check::report("c06_r_growth_nonincreasing", nonincreasing, 1.0, 0.0)
                .with_note("1 if the decade maxima do not increase"),
        );
    }
    cx.tag(&["error_terms"], rows)
}

fn c07(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c07_estar_meansq_exponent";
    let Some(grid) = cx.inputs.grid.filter(|g| g.has(Field::Estar)) else {
        return vec![Check::skipped(NAME, "no error-term grid with E*")];
    };
    let top = grid.t_max().min(1e5);
    if top < 1e3 * 10f64.powf(1.5) {
        return vec![Check::skipped(NAME, format!("need 1.5 decades above 1000, grid ends at {}", grid.t_max()))];
    }
    let ts = log_spaced(1e3, top, 21);
    let samples: Vec<(f64, f64)> = ts
        .par_iter()
        .map(|&t| (t, abs_moment(grid, Field::Estar, 0.0, t, 2).expect("inside grid")))
        .collect();
    let mut rows = Vec::new();
    let note = format!("21 log-spaced T in [1000, {top}]; integral of E*^2 over [0, T]");
    match fit_power_law(&samples, FitModel::PurePower) {
        Ok(f) => rows.push(
            Check::judged(NAME, f.exponent, 1.415, 0.135)
                .with_note(format!("{note}; fit residual {:.3e}", f.residual)),
        ),
        Err(e) => rows.push(Check::judged(NAME, f64::NAN, 1.415, 0.135).with_note(e.to_string())),
    }
    if let Ok(f) = fit_power_law(&samples, FitModel::PowerTimesLogcube) {
        rows.push(Check::report("c07_power_logcube_exponent", f.exponent, 4.0 / 3.0, 0.0));
    }
    if let Ok(f) = fit_power_law(&samples, FitModel::Logpoly3 { exponent: 4.0 / 3.0 }) {
        for (j, c) in f.coefficients.iter().enumerate() {
            rows.push(
                Check::report(format!("c07_logpoly3_c{j}"), *c, 0.0, 0.0)
                    .with_note(format!("T^(4/3) times cubic in log T; sign {}", if *c >= 0.0 { "+" } else { "-" })),
            );
        }
    }
    let synth: Vec<(f64, f64)> = ts.iter().map(|&t| (t, t.powf(4.0 / 3.0) * t.ln().powi(3))).collect();
    if let Ok(f) = fit_power_law(&synth, FitModel::PurePower) {
        rows.push(
            Check::report("c07_synthetic_calibration", f.exponent, 4.0 / 3.0, 0.0)
                .with_note("pure-power exponent of T^(4/3) log^3 T on the same T"),
        );
    }
    cx.tag(&["error_terms"], rows)
}

fn c08(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c08_nested_k1";
    let (t, h) = (1e4, 50.0);
    let Some(zgrid) = cx.inputs.zgrid else {
        return vec![Check::skipped(NAME, "no zeta grid")];
    };
    if zgrid.t_max() < 2.0 * t + h {
        return vec![Check::skipped(NAME, format!("needs grid to {}", 2.0 * t + h))];
    }
    let n = NestedMoments::new(zgrid);
    let v = n.nested(t, h, 1).expect("range checked");
    let swapped = n.nested_k1_swapped(t, h).expect("range checked");
    let scale = h * h + t.powf(0.75);
    let exact = 2.0 * h * (t * (2.0 * t / (E * PI)).ln() + 2.0 * EULER_GAMMA * t);
    let printed = 2.0 * h * t * (2.0 * t / (E * PI)).ln();
    let closing = 2.0 * h * t * (4.0 * t / E).ln();
    let rows = vec![
        Check::judged(NAME, (v - exact).abs() / scale, 0.0, cx.params.nested_slack)
            .with_note("T = 1e4, H = 50; |nested - 2H(T log(2T/(e pi)) + 2 gamma T)|/(H^2 + T^(3/4))"),
        Check::judged("c08_swapped_order", ((v - swapped) / v).abs(), 0.0, 1e-6),
        Check::report("c08_dev_form_2T_over_e_pi", (v - printed) / scale, 0.0, 0.0)
            .with_note("deviation from 2H T log(2T/(e pi)), in units of H^2 + T^(3/4)"),
        Check::report("c08_dev_form_4T_over_e", (v - closing) / scale, 0.0, 0.0)
            .with_note("deviation from 2H T log(4T/e), in units of H^2 + T^(3/4)"),
    ];
    cx.tag(&["zeta_grid"], rows)
}

fn c09(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c09_nested_k2_ratio";
    let (t, h) = (1e4, 20.0);
    let Some(zgrid) = cx.inputs.zgrid else {
        return vec![Check::skipped(NAME, "no zeta grid")];
    };
    if zgrid.t_max() < 2.0 * t + h {
        return vec![Check::skipped(NAME, format!("needs grid to {}", 2.0 * t + h))];
    }
    let n = NestedMoments::new(zgrid);
    let ts = [2e3, 3e3, 4.5e3, 7e3, 1e4];
    let vals: Vec<f64> = ts
        .par_iter()
        .map(|&tt| n.nested(tt, h, 2).expect("range checked"))
        .collect();
    let v = *vals.last().unwrap();
    let lt = t.ln();
    let mut rows = vec![Check::report(NAME, v / (h * h * t * 4.0 * lt * lt), 1.25, 0.75)
        .with_note("T = 1e4, H = 20; nested k=2 over H^2 T 4 log^2 T")];
    let design: Vec<Vec<f64>> = ts.iter().map(|tt| vec![tt.ln(), 1.0]).collect();
    let rhs: Vec<f64> = ts
        .iter()
        .zip(&vals)
        .map(|(tt, v)| v / (h * h * tt) - 4.0 * tt.ln().powi(2))
        .collect();
    if let Ok(e) = linear_least_squares(&design, &rhs) {
        let note = "least squares over T in {2e3, 3e3, 4.5e3, 7e3, 1e4}, H = 20";
        rows.push(Check::report("c09_fit_e1", e[0], 0.0, 0.0).with_note(note));
        rows.push(Check::report("c09_fit_e0", e[1], 0.0, 0.0).with_note(note));
    }
    cx.tag(&["zeta_grid"], rows)
}

fn c10(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c10_diff_meansq";
    let t: f64 = 1e6;
    let u = t.powf(0.25);
    let Some(table) = cx.inputs.table else {
        return vec![Check::skipped(NAME, "no divisor table")];
    };
    if (table.limit() as f64) < 2.0 * t + u {
        return vec![
            Check::skipped(NAME, format!("divisor table limit {} below {}", table.limit(), (2.0 * t + u).ceil())),
            Check::skipped("c10_delta_halving", "divisor table too small"),
        ];
    }
    let v = diff_mean_square(DiffTarget::Delta(table), t, u, DEFAULT_DIFF_STEP).expect("range checked");
    let v2 = diff_mean_square(DiffTarget::Delta(table), t, u, DEFAULT_DIFF_STEP / 2.0).expect("range checked");
    let main = t * u * (8.0 / (PI * PI)) * (t.sqrt() / u).ln().powi(3);
    let rows = vec![
        Check::judged(NAME, v / main, 1.25, 0.75)
            .with_note("T = 1e6, U = T^(1/4); value/(T U (8/pi^2) log^3(sqrt(T)/U))"),
        Check::judged("c10_delta_halving", ((v - v2) / v2).abs(), 0.0, 0.01)
            .with_note("relative change from step 0.1 to 0.05"),
    ];
    cx.tag(&["divisor_table"], rows)
}

fn c11(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c11_smoothed_bracket";
    let Some(zgrid) = cx.inputs.zgrid else {
        return vec![Check::skipped(NAME, "no zeta grid")];
    };
    let g_max = 50.0;
    let top = 1e4f64.min(zgrid.t_max() - 2.0 * g_max * 1e4f64.ln());
    if top < 1e3 {
        return vec![Check::skipped(NAME, format!("grid ends at {}", zgrid.t_max()))];
    }
    let mut rng = cx.rng(11);
    let pts: Vec<(f64, f64)> = (0..20)
        .map(|_| (rng.random_range(1e3..=top), rng.random_range(1.0..=g_max)))
        .collect();
    let mut worst = 0.0f64;
    for &(t, g) in &pts {
        let lhs = zgrid.integrate(t - g, t + g).expect("inside grid");
        let j = smoothed_moment_j(zgrid, 1, t, g).expect("inside grid");
        let bound = PI.sqrt() * E * g * j.value;
        worst = worst.max((lhs - bound) / lhs);
    }
    let mut rows = vec![Check::judged(NAME, worst.max(0.0), 0.0, 1e-6)
        .with_note(format!("20 random (T, G), T in [1000, {top}], G in [1, {g_max}]; relative excess"))];
    let mut names = vec!["zeta_grid"];
    if let Some(grid) = cx.inputs.grid.filter(|g| g.has(Field::Estar)) {
        names.push("error_terms");
        let ratio = |t: f64, g: f64| {
            lemma1_diagnostic(zgrid, grid, t, g).map(|r| r.slack / (g * t.ln()))
        };
        let mut max_ratio = 0.0f64;
        let mut growth = Vec::new();
        for &(t, g) in &pts {
            if let Ok(r) = ratio(t, g) {
                max_ratio = max_ratio.max(r.abs());
                if let Ok(r2) = ratio(t, 2.0 * g) {
                    growth.push(r2 * 2.0 * g / (r * g));
                }
            }
        }
        rows.push(
            Check::report("c11_short_interval_slack", max_ratio, 0.0, 0.0)
                .with_note("max |LHS - S|/(G log T) over the same points"),
        );
        if !growth.is_empty() {
            let mean = growth.iter().sum::<f64>() / growth.len() as f64;
            rows.push(
                Check::report("c11_short_interval_slack_doubling", mean, 2.0, 0.0)
                    .with_note("mean slack(2G)/slack(G)"),
            );
        }
    }
    cx.tag(&names, rows)
}

fn c12(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c12_holder";
    let Some(grid) = cx.inputs.grid.filter(|g| g.has(Field::Estar) && g.has(Field::R)) else {
        return vec![Check::skipped(NAME, "no error-term grid with E* and R")];
    };
    let mut cases = Vec::new();
    for t in [1e2, 1e3, 2e3, 5e3, 1e4, 2e4, 5e4] {
        for h in [10.0, 100.0, 1000.0] {
            if t + h <= grid.t_max() {
                for f in [Field::Estar, Field::R] {
                    cases.push((f, t, h));
                }
            }
        }
    }
    if cases.is_empty() {
        return vec![Check::skipped(NAME, "grid too short for any scanned interval")];
    }
    let worst = cases
        .par_iter()
        .map(|&(f, t, h)| {
            let m1 = abs_moment(grid, f, t, h, 1).expect("inside grid");
            let m2 = abs_moment(grid, f, t, h, 2).expect("inside grid");
            (m1 * m1 / (h * m2) - 1.0).max(0.0)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(0.0f64, f64::max);
    cx.tag(
        &["error_terms"],
        vec![Check::judged(NAME, worst, 0.0, 1e-9)
            .with_note(format!("{} intervals of E* and R; relative excess of (int|f|)^2 over H int f^2", cases.len()))],
    )
}

fn c13(cx: &Ctx<'_>) -> Vec<Check> {
    const NAME: &str = "c13_determinism";
    let Some(zgrid) = cx.inputs.zgrid else {
        return vec![Check::skipped(NAME, "no zeta grid")];
    };
    let layout = zgrid.layout();
    let n = layout.len().min(20_000);
    let workers = cx.params.workers.max(2);
    let run = |threads: usize| -> Result<Vec<f64>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Unsupported(e.to_string()))?;
        pool.install(|| {
            let ev = ZetaEvaluator::new(*zgrid.eval_config(), layout.t()[n - 1])?;
            evaluate_range(&ev, layout, 0..n).map(|(v, _)| v)
        })
    };
    let row = match (run(1), run(workers)) {
        (Ok(a), Ok(b)) => {
            let stored = &zgrid.zsq_values()[..n];
            let diff = (0..n)
                .filter(|&i| a[i].to_bits() != b[i].to_bits() || a[i].to_bits() != stored[i].to_bits())
                .count();
            Check::judged(NAME, diff as f64, 0.0, 0.0)
                .with_note(format!("first {n} samples rebuilt with 1 and {workers} workers against the stored grid"))
        }
        (Err(e), _) | (_, Err(e)) => Check::judged(NAME, f64::NAN, 0.0, 0.0).with_note(e.to_string()),
    };
    cx.tag(&["zeta_grid"], vec![row])
}
