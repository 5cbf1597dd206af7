//! |ζ(½+it)|² through Hardy's Z-function.
//!
//! Below `small_t_threshold` Z is computed from an Euler–Maclaurin evaluation
//! of ζ and the exact phase θ(t) = arg Γ(¼ + it/2) − (t/2) log π; above it the
//! Riemann–Siegel main sum of ⌊√(t/2π)⌋ terms plus corrections C₀..C_K is used.

mod euler_maclaurin;
mod grid;
mod riemann_siegel;
mod rs_coeffs;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use euler_maclaurin::{hardy_z_em, ln_gamma, theta_exact, zeta_half_line};
pub use grid::{build_zeta_grid, build_zeta_grid_on, evaluate_range, StepPolicy, ZetaGrid, MAX_GRID_POINTS};
pub use riemann_siegel::{error_bound as rs_error_bound, hardy_z_rs, MainSumTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Switch point between Euler–Maclaurin (below) and Riemann–Siegel.
    pub small_t_threshold: f64,
    /// Highest correction index K; C₀..C_K are used.
    pub rs_correction_terms: usize,
    /// Bernoulli terms in the Euler–Maclaurin tail.
    pub em_terms: usize,
    pub target_abs_error: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            small_t_threshold: 200.0,
            rs_correction_terms: 4,
            em_terms: 30,
            target_abs_error: 1e-8,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, reason: String| {
            Err(Error::Config {
                field: field.into(),
                reason,
            })
        };
        if !(self.small_t_threshold >= 10.0 && self.small_t_threshold.is_finite()) {
            return bad(
                "small_t_threshold",
                format!("{} must be ≥ 10", self.small_t_threshold),
            );
        }
        if self.rs_correction_terms > 4 {
            return bad(
                "rs_correction_terms",
                format!("{} outside [0, 4]", self.rs_correction_terms),
            );
        }
        if self.em_terms == 0 || self.em_terms > euler_maclaurin::MAX_EM_TERMS {
            return bad("em_terms", format!("{} outside [1, 60]", self.em_terms));
        }
        if !(self.target_abs_error > 0.0) {
            return bad(
                "target_abs_error",
                format!("{} must be positive", self.target_abs_error),
            );
        }
        Ok(())
    }
}

/// Asymptotic Riemann–Siegel phase θ(t), for t at or above the switch point.
pub fn rs_theta(t: f64, cfg: &EvalConfig) -> Result<f64> {
    if !(t >= cfg.small_t_threshold) {
        return Err(Error::domain(format!(
            "rs_theta: t = {t} below threshold {}",
            cfg.small_t_threshold
        )));
    }
    Ok(riemann_siegel::theta_series(t))
}

/// Evaluator with a cached main-sum table; cheap to share between threads.
#[derive(Debug, Clone)]
pub struct ZetaEvaluator {
    cfg: EvalConfig,
    table: MainSumTable,
}

impl ZetaEvaluator {
    pub fn new(cfg: EvalConfig, t_max: f64) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            table: MainSumTable::new(t_max),
        })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    /// Z(t) and the error bound of the branch that produced it.
    pub fn hardy_z_with_bound(&self, t: f64) -> Result<(f64, f64)> {
        eval(t, &self.cfg, Some(&self.table))
    }

    pub fn hardy_z(&self, t: f64) -> Result<f64> {
        self.hardy_z_with_bound(t).map(|(z, _)| z)
    }

    pub fn zeta_abs_sq(&self, t: f64) -> Result<f64> {
        self.hardy_z(t).map(|z| z * z)
    }
}

fn eval(t: f64, cfg: &EvalConfig, table: Option<&MainSumTable>) -> Result<(f64, f64)> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("hardy_z: t = {t} must be ≥ 0")));
    }
    let (z, bound) = if t < cfg.small_t_threshold {
        hardy_z_em(t, cfg.em_terms)?
    } else {
        let b = rs_error_bound(t, cfg.rs_correction_terms);
        (hardy_z_rs(t, cfg.rs_correction_terms, table), b)
    };
    if bound > cfg.target_abs_error {
        return Err(Error::Accuracy {
            requested: cfg.target_abs_error,
            achievable: bound,
        });
    }
    Ok((z, bound))
}

/// Hardy's Z(t), real with |Z(t)| = |ζ(½+it)|.
pub fn hardy_z(t: f64, cfg: &EvalConfig) -> Result<f64> {
    cfg.validate()?;
    eval(t, cfg, None).map(|(z, _)| z)
}

/// |ζ(½+it)|² = Z(t)².
pub fn zeta_abs_sq(t: f64, cfg: &EvalConfig) -> Result<f64> {
    hardy_z(t, cfg).map(|z| z * z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
        let mut fa = f(a);
        for _ in 0..80 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn value_at_zero() {
        let cfg = EvalConfig::default();
        let z = hardy_z(0.0, &cfg).unwrap();
        assert!((z + 1.460_354_508_8).abs() < 1e-10);
        let sq = zeta_abs_sq(0.0, &cfg).unwrap();
        assert!((sq - 2.132_635_291_400_49).abs() < 1e-12);
    }

    #[test]
    fn first_two_zeros() {
        let cfg = EvalConfig::default();
        let z = |t: f64| hardy_z(t, &cfg).unwrap();
        assert!(z(14.0) * z(14.2) < 0.0);
        let r1 = bisect(z, 14.0, 14.2);
        assert!((r1 - 14.134_725).abs() < 1e-6, "{r1}");
        assert!(zeta_abs_sq(14.134_725, &cfg).unwrap() <= 1e-6);
        assert!(z(20.9) * z(21.1) < 0.0);
        let r2 = bisect(z, 20.9, 21.1);
        assert!((r2 - 21.022_039_64).abs() < 1e-7);
    }

    #[test]
    fn evaluators_agree_above_switch() {
        let cfg = EvalConfig::default();
        let ev = ZetaEvaluator::new(cfg, 1000.0).unwrap();
        for i in 0..100 {
            let t = cfg.small_t_threshold + 0.5 * i as f64 + 0.123;
            let rs = ev.hardy_z(t).unwrap();
            let (em, _) = hardy_z_em(t, 30).unwrap();
            assert!((rs - em).abs() <= 2.0 * cfg.target_abs_error, "t = {t}");
        }
    }

    #[test]
    fn continuity_near_ten_thousand() {
        let ev = ZetaEvaluator::new(EvalConfig::default(), 2e4).unwrap();
        for k in 0..50 {
            let t = 1e4 + 3.7 * k as f64;
            let d = ev.hardy_z(t + 1e-6).unwrap() - ev.hardy_z(t).unwrap();
            assert!(d.abs() <= 1e-3);
        }
    }

    #[test]
    fn rs_theta_examples() {
        let cfg = EvalConfig::default();
        let t = 1000.0;
        let lead = t / 2.0 * (t / (2.0 * PI)).ln() - t / 2.0 - PI / 8.0;
        assert!((rs_theta(t, &cfg).unwrap() - lead - 2.0833e-5).abs() < 1e-8);
        assert!((rs_theta(t, &cfg).unwrap() - lead - 1.0 / 48_000.0).abs() < 1e-9);
        // log(t/2π) = 2, below the default switch point
        let low = EvalConfig {
            small_t_threshold: 10.0,
            ..cfg
        };
        let t = 2.0 * PI * std::f64::consts::E.powi(2);
        let lead = t - t / 2.0 - PI / 8.0;
        assert!((rs_theta(t, &low).unwrap() - lead - 1.0 / (48.0 * t)).abs() < 2e-8);
        assert!((rs_theta(t, &low).unwrap() - theta_exact(t)).abs() < 1e-12);
        // beyond 1/(48t) the series contributes below 1e-12 at t = 10⁶
        let t = 1e6;
        assert!((riemann_siegel::theta_tail(t) - 1.0 / (48.0 * t)).abs() < 1e-12);
        let lead = t / 2.0 * (t / (2.0 * PI)).ln() - t / 2.0 - PI / 8.0;
        assert!((rs_theta(t, &cfg).unwrap() - lead).abs() < 1e-7);
        assert!(rs_theta(10.0, &cfg).is_err());
    }

    #[test]
    fn accuracy_error_when_corrections_too_few() {
        let cfg = EvalConfig {
            rs_correction_terms: 1,
            ..EvalConfig::default()
        };
        match hardy_z(500.0, &cfg) {
            Err(Error::Accuracy { achievable, .. }) => assert!(achievable > 1e-8),
            other => panic!("expected accuracy error, got {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        let mut c = EvalConfig::default();
        c.small_t_threshold = 5.0;
        assert!(c.validate().is_err());
        let mut c = EvalConfig::default();
        c.rs_correction_terms = 5;
        assert!(c.validate().is_err());
        let mut c = EvalConfig::default();
        c.target_abs_error = 0.0;
        assert!(c.validate().is_err());
        assert!(hardy_z(-1.0, &EvalConfig::default()).is_err());
    }

    #[test]
    fn squares_are_nonnegative() {
        let ev = ZetaEvaluator::new(EvalConfig::default(), 5000.0).unwrap();
        for k in 0..500 {
            assert!(ev.zeta_abs_sq(k as f64 * 9.91).unwrap() >= 0.0);
        }
    }
}
