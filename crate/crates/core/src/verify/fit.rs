use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Growth models for M(T), with y = log T:
/// `PurePower`: M = c·T^α; `PowerTimesLogcube`: M = c·T^α·y³;
/// `Logpoly3`: M = T^α·(c₀ + c₁y + c₂y² + c₃y³) with α held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FitModel {
    PurePower,
    PowerTimesLogcube,
    Logpoly3 { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub exponent: f64,
    pub coefficients: Vec<f64>,
    /// RMS of fitted/measured − 1.
    pub residual: f64,
}

/// Least-squares solution of `a x ≈ b` for a row-major design matrix.
pub fn linear_least_squares(rows: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let ncol = rows.first().map_or(0, Vec::len);
    if ncol == 0 || rows.len() < ncol || rows.len() != b.len() {
        return Err(Error::Fit(format!(
            "{} equations for {ncol} unknowns",
            rows.len()
        )));
    }
    let a = DMatrix::from_fn(rows.len(), ncol, |i, j| rows[i][j]);
    let rhs = DVector::from_column_slice(b);
    let x = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Fit("non-finite least-squares solution".into()));
    }
    Ok(x.iter().copied().collect())
}

/// Fits `samples` of (T, M) against `model`. Needs at least five samples over
/// at least 1.5 decades of T, with every M > 0.
pub fn fit_power_law(samples: &[(f64, f64)], model: FitModel) -> Result<FitResult> {
    if samples.len() < 5 {
        return Err(Error::Fit(format!("{} samples, need at least 5", samples.len())));
    }
    if let Some((t, m)) = samples.iter().find(|(t, m)| !(*t > 1.0 && *m > 0.0 && t.is_finite() && m.is_finite())) {
        return Err(Error::Fit(format!("sample (T = {t}, M = {m}) needs T > 1 and M > 0")));
    }
    let (lo, hi) = samples
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), (t, _)| (lo.min(*t), hi.max(*t)));
    let decades = (hi / lo).log10();
    if decades < 1.5 {
        return Err(Error::Fit(format!("T spans {decades:.3} decades, need 1.5")));
    }

    type Fitted = Box<dyn Fn(f64) -> f64>;
    let (exponent, coefficients, fitted): (f64, Vec<f64>, Fitted) = match model {
        FitModel::PurePower | FitModel::PowerTimesLogcube => {
            let cube = matches!(model, FitModel::PowerTimesLogcube);
            let shift = move |t: f64| if cube { 3.0 * t.ln().ln() } else { 0.0 };
            let rows: Vec<Vec<f64>> = samples.iter().map(|(t, _)| vec![1.0, t.ln()]).collect();
            let b: Vec<f64> = samples.iter().map(|(t, m)| m.ln() - shift(*t)).collect();
            let x = linear_least_squares(&rows, &b)?;
            let (c, alpha) = (x[0].exp(), x[1]);
            (alpha, vec![c], Box::new(move |t: f64| (x[0] + x[1] * t.ln() + shift(t)).exp()))
        }
        FitModel::Logpoly3 { exponent } => {
            if !exponent.is_finite() {
                return Err(Error::Fit("LOGPOLY3 exponent must be finite".into()));
            }
            // rows scaled by 1/M so the fit minimises relative error
            let rows: Vec<Vec<f64>> = samples
                .iter()
                .map(|(t, m)| {
                    let y = t.ln();
                    let w = t.powf(exponent) / m;
                    vec![w, w * y, w * y * y, w * y * y * y]
                })
                .collect();
            let b = vec![1.0; samples.len()];
            let c = linear_least_squares(&rows, &b)?;
            let cc = c.clone();
            let f = move |t: f64| {
                let y = t.ln();
                t.powf(exponent) * (cc[0] + y * (cc[1] + y * (cc[2] + y * cc[3])))
            };
            (exponent, c, Box::new(f))
        }
    };
    let ss: f64 = samples
        .iter()
        .map(|(t, m)| {
            let r = fitted(*t) / m - 1.0;
            r * r
        })
        .sum();
    let residual = (ss / samples.len() as f64).sqrt();
    if !exponent.is_finite() {
        return Err(Error::Fit("non-finite exponent".into()));
    }
    Ok(FitResult {
        model,
        exponent,
        coefficients,
        residual,
    })
}

/// `n` points spaced evenly in log between `lo` and `hi`.
pub(crate) fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_power() {
        let s: Vec<_> = log_spaced(1e3, 1e5, 11).into_iter().map(|t| (t, 3.0 * t.powf(1.5))).collect();
        let f = fit_power_law(&s, FitModel::PurePower).unwrap();
        assert!((f.exponent - 1.5).abs() < 1e-6);
        assert!((f.coefficients[0] - 3.0).abs() < 1e-6);
        assert!(f.residual < 1e-10);
    }

    #[test]
    fn constant_data_has_zero_exponent() {
        let s: Vec<_> = log_spaced(10.0, 1e4, 7).into_iter().map(|t| (t, 2.0)).collect();
        let f = fit_power_law(&s, FitModel::PurePower).unwrap();
        assert!(f.exponent.abs() < 1e-10);
    }

    #[test]
    fn log_cube_inflation() {
        let s: Vec<_> = log_spaced(1e3, 1e5, 21)
            .into_iter()
            .map(|t| (t, t.powf(4.0 / 3.0) * t.ln().powi(3)))
            .collect();
        let pure = fit_power_law(&s, FitModel::PurePower).unwrap();
        // the three powers of log T add about 0.33 to the apparent exponent
        assert!((pure.exponent - 1.6637).abs() < 1e-3, "{}", pure.exponent);
        let cube = fit_power_law(&s, FitModel::PowerTimesLogcube).unwrap();
        assert!((cube.exponent - 4.0 / 3.0).abs() < 1e-9);
        assert!((cube.coefficients[0] - 1.0).abs() < 1e-6);
        let poly = fit_power_law(&s, FitModel::Logpoly3 { exponent: 4.0 / 3.0 }).unwrap();
        for (c, want) in poly.coefficients.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((c - want).abs() < 1e-6, "{:?}", poly.coefficients);
        }
    }

    #[test]
    fn recovers_log_polynomial() {
        let p = [5.0, -2.0, 0.5, 0.25];
        let s: Vec<_> = log_spaced(1e2, 1e6, 9)
            .into_iter()
            .map(|t| {
                let y: f64 = t.ln();
                (t, t.powf(1.25) * (p[0] + p[1] * y + p[2] * y * y + p[3] * y * y * y))
            })
            .collect();
        let f = fit_power_law(&s, FitModel::Logpoly3 { exponent: 1.25 }).unwrap();
        for (c, want) in f.coefficients.iter().zip(p) {
            assert!(((c - want) / want).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_degenerate_input() {
        let few: Vec<_> = (1..5).map(|i| (10f64.powi(i), 1.0)).collect();
        assert!(fit_power_law(&few, FitModel::PurePower).is_err());
        let narrow: Vec<_> = log_spaced(100.0, 2000.0, 8).into_iter().map(|t| (t, t)).collect();
        assert!(fit_power_law(&narrow, FitModel::PurePower).is_err());
        let mut neg: Vec<_> = log_spaced(10.0, 1e4, 8).into_iter().map(|t| (t, t)).collect();
        neg[3].1 = -1.0;
        assert!(matches!(fit_power_law(&neg, FitModel::PurePower), Err(Error::Fit(_))));
    }
}
