use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EvalConfig, ZetaEvaluator};
use crate::error::{Error, Result};
use crate::quad::{GridLayout, DEFAULT_C_STEP, MAX_STEP};

/// Grid points beyond this are refused (≈ 2.4·10⁶ per 10⁵ of height at default spacing).
pub const MAX_GRID_POINTS: usize = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepPolicy {
    /// Spacing never exceeds min(max_step, c_step / log(2 + t)).
    pub c_step: f64,
    pub max_step: f64,
}

impl Default for StepPolicy {
    fn default() -> Self {
        Self {
            c_step: DEFAULT_C_STEP,
            max_step: MAX_STEP,
        }
    }
}

impl StepPolicy {
    pub fn describe(&self) -> String {
        format!(
            "segments at t=0, t=2 and t=pi*n/2; uniform inside, 4k intervals, step <= min({}, {}/log(2+t))",
            self.max_step, self.c_step
        )
    }
}

/// Samples of |ζ(½+it)|² on [0, t_max].
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaGrid {
    layout: GridLayout,
    zsq: Vec<f64>,
    policy: StepPolicy,
    /// Largest per-point absolute error bound on Z.
    accuracy: f64,
    eval: EvalConfig,
}

impl ZetaGrid {
    pub fn from_parts(
        layout: GridLayout,
        zsq: Vec<f64>,
        policy: StepPolicy,
        accuracy: f64,
        eval: EvalConfig,
    ) -> Result<Self> {
        if zsq.len() != layout.len() {
            return Err(Error::domain(format!(
                "zeta grid has {} samples for {} nodes",
                zsq.len(),
                layout.len()
            )));
        }
        if let Some(i) = zsq.iter().position(|v| !(*v >= 0.0)) {
            return Err(Error::domain(format!("zeta grid sample {i} is negative or NaN")));
        }
        Ok(Self {
            layout,
            zsq,
            policy,
            accuracy,
            eval,
        })
    }

    /// A grid whose samples come from an arbitrary nonnegative function.
    pub fn synthetic(layout: GridLayout, f: impl Fn(f64) -> f64) -> Result<Self> {
        let zsq = layout.t().iter().map(|&t| f(t)).collect();
        let policy = StepPolicy {
            c_step: layout.c_step(),
            max_step: MAX_STEP,
        };
        Self::from_parts(layout, zsq, policy, 0.0, EvalConfig::default())
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn t_values(&self) -> &[f64] {
        self.layout.t()
    }

    pub fn zsq_values(&self) -> &[f64] {
        &self.zsq
    }

    pub fn step_policy(&self) -> &StepPolicy {
        &self.policy
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    pub fn eval_config(&self) -> &EvalConfig {
        &self.eval
    }

    pub fn t_max(&self) -> f64 {
        self.layout.t_max()
    }

    /// ∫_a^b |ζ(½+iu)|² du straight from the samples.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        self.layout.integrate(a, b, |i, _| self.zsq[i])
    }
}

/// |ζ|² and the worst Z error bound on a node range, evaluated in parallel.
///
/// Each node is evaluated independently and the results are collected in
/// node order, so the output does not depend on the number of workers.
pub fn evaluate_range(
    ev: &ZetaEvaluator,
    layout: &GridLayout,
    range: Range<usize>,
) -> Result<(Vec<f64>, f64)> {
    let vals: Vec<(f64, f64)> = layout.t()[range]
        .par_iter()
        .map(|&t| ev.hardy_z_with_bound(t).map(|(z, b)| (z * z, b)))
        .collect::<Result<_>>()?;
    let bound = vals.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok((vals.into_iter().map(|v| v.0).collect(), bound))
}

pub fn build_zeta_grid_on(layout: GridLayout, cfg: &EvalConfig) -> Result<ZetaGrid> {
    if layout.len() > MAX_GRID_POINTS {
        return Err(Error::Capacity {
            what: "zeta grid points",
            requested: layout.len() as u64,
            cap: MAX_GRID_POINTS as u64,
        });
    }
    let ev = ZetaEvaluator::new(*cfg, layout.t_max())?;
    let (zsq, accuracy) = evaluate_range(&ev, &layout, 0..layout.len())?;
    let policy = StepPolicy {
        c_step: layout.c_step(),
        max_step: MAX_STEP,
    };
    ZetaGrid::from_parts(layout, zsq, policy, accuracy, *cfg)
}

/// Samples |ζ(½+it)|² on [0, t_max] with the default spacing policy.
pub fn build_zeta_grid(t_max: f64, cfg: &EvalConfig) -> Result<ZetaGrid> {
    build_zeta_grid_on(GridLayout::build(t_max, DEFAULT_C_STEP)?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_grid_properties() {
        let g = build_zeta_grid(100.0, &EvalConfig::default()).unwrap();
        assert_eq!(g.t_values()[0], 0.0);
        assert!(g.layout().max_gap() <= 0.25);
        assert!(g.zsq_values().iter().all(|&v| v >= 0.0));
        assert!((g.zsq_values()[0] - 2.132_635_291_400_489_6).abs() < 1e-12);
        assert!(g.accuracy() <= 1e-8);
        assert_eq!(g, build_zeta_grid(100.0, &EvalConfig::default()).unwrap());
    }

    #[test]
    fn worker_count_does_not_change_samples() {
        let layout = GridLayout::build(600.0, DEFAULT_C_STEP).unwrap();
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| build_zeta_grid_on(layout.clone(), &EvalConfig::default())).unwrap();
        let b = four.install(|| build_zeta_grid_on(layout, &EvalConfig::default())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_negative_samples() {
        let layout = GridLayout::build(5.0, DEFAULT_C_STEP).unwrap();
        assert!(ZetaGrid::synthetic(layout, |t| 1.0 - t).is_err());
    }
}
