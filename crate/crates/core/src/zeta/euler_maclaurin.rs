//! Euler–Maclaurin evaluation of ζ(½ + it) and the exact Riemann–Siegel phase
//! through the complex log-gamma function. Used below the Riemann–Siegel
//! switch point and as its independent oracle.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Upper bound on the number of Bernoulli correction terms.
pub const MAX_EM_TERMS: usize = 60;

/// B_{2k} / (2k)! for k = 1..=MAX_EM_TERMS.
fn bernoulli_ratios() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        // B_{2k}/(2k)! = (−1)^{k+1} 2 ζ(2k) / (2π)^{2k}
        (1..=MAX_EM_TERMS)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * 2.0 * zeta_even(k) / (2.0 * PI).powi(2 * k as i32)
            })
            .collect()
    })
}

/// ζ(2k) for k ≥ 1: a direct sum to 99 plus an Euler–Maclaurin tail at 100.
fn zeta_even(k: usize) -> f64 {
    if k == 1 {
        return PI * PI / 6.0;
    }
    let s = 2.0 * k as f64;
    let n = 100.0f64;
    let head: f64 = (1..100).rev().map(|j| (j as f64).powf(-s)).sum();
    let tail = n.powf(1.0 - s) / (s - 1.0) + 0.5 * n.powf(-s) + s * n.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * n.powf(-s - 3.0) / 720.0;
    head + tail
}

/// ζ(½ + it) by Euler–Maclaurin with `terms` Bernoulli corrections.
///
/// The cut `N` is chosen so that consecutive correction terms shrink by at
/// least a factor of four; the first omitted term is returned as the error
/// bound.
pub fn zeta_half_line(t: f64, terms: usize) -> Result<(Complex64, f64)> {
    if terms == 0 || terms > MAX_EM_TERMS {
        return Err(Error::Config {
            field: "em_terms".into(),
            reason: format!("{terms} outside [1, {MAX_EM_TERMS}]"),
        });
    }
    let s = Complex64::new(0.5, t);
    let n = ((t.abs() + 2.0 * terms as f64 + 2.0) / PI).ceil().max(10.0);
    let nn = n as u64;

    let mut head = Complex64::new(0.0, 0.0);
    for j in (1..nn).rev() {
        let x = j as f64;
        head += (-s * x.ln()).exp();
    }
    let n_pow = (-s * n.ln()).exp(); // N^{-s}
    let mut total = head + n_pow * n / (s - 1.0) + 0.5 * n_pow;

    let b = bernoulli_ratios();
    // factor_k = s(s+1)…(s+2k−2) N^{−s−2k+1}
    let mut factor = s * n_pow / n;
    let mut last = 0.0;
    for (k, &bk) in b.iter().enumerate().take(terms + 1) {
        let term = factor * bk;
        if k == terms {
            last = term.norm();
            break;
        }
        total += term;
        let m = 2.0 * (k as f64 + 1.0);
        factor *= (s + m - 1.0) * (s + m) / (n * n);
    }
    Ok((total, last))
}

/// ln Γ(z) for Re z > 0, principal branch, by upward shift and Stirling.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    let mut shift = Complex64::new(0.0, 0.0);
    let mut w = z;
    while w.re < 12.0 {
        shift += w.ln();
        w += 1.0;
    }
    let b = bernoulli_ratios();
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut pow = inv;
    for k in 1..=10usize {
        // B_{2k} / (2k (2k−1)) = (B_{2k}/(2k)!) (2k−2)!
        let fact: f64 = (1..=(2 * k - 2)).map(|j| j as f64).product();
        series += pow * (b[k - 1] * fact);
        pow *= inv2;
    }
    (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series - shift
}

/// θ(t) = Im ln Γ(¼ + it/2) − (t/2) log π.
pub fn theta_exact(t: f64) -> f64 {
    ln_gamma(Complex64::new(0.25, 0.5 * t)).im - 0.5 * t * PI.ln()
}

/// Z(t) = e^{iθ(t)} ζ(½ + it), with its error bound.
pub fn hardy_z_em(t: f64, terms: usize) -> Result<(f64, f64)> {
    let (z, err) = zeta_half_line(t, terms)?;
    let rot = Complex64::from_polar(1.0, theta_exact(t));
    Ok(((rot * z).re, err))
}
