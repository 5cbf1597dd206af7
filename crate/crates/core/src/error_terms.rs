//! E(T), E*(t), R(T) and E₁(T) on the zeta grid.
//!
//! E(t)  = ∫₀ᵗ |ζ(½+iu)|² du − t(log(t/2π) + 2γ − 1)
//! E*(t) = E(t) − 2πΔ*(t/2π)
//! R(t)  = ∫₀ᵗ E*(u) du − (3π/4)t
//! E₁(t) = ∫₂ᵗ E(u) du
//!
//! E* jumps wherever 4·t/2π is an integer; those points are segment
//! boundaries of the layout, and E* is stored right-continuous with its left
//! limit kept per boundary.

use std::f64::consts::PI;

use crate::divisor::{DivisorTable, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::quad::GridLayout;
use crate::zeta::ZetaGrid;

/// Default relative quadrature tolerance.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-4;

/// `T(log(T/2π) + 2γ − 1)`, the main term of ∫₀ᵀ |ζ(½+it)|² dt.
pub fn mean_square_main_term(t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("main term needs T > 0, got {t}")));
    }
    Ok(main_term(t))
}

/// The main term continued by its limit 0 at t = 0.
pub(crate) fn main_term(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * ((t / (2.0 * PI)).ln() + 2.0 * EULER_GAMMA - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Field {
    E,
    Estar,
    R,
    E1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorTermGrid {
    layout: GridLayout,
    e: Vec<f64>,
    estar: Option<Vec<f64>>,
    /// Left limit of E* at each segment boundary.
    estar_left: Option<Vec<f64>>,
    r: Option<Vec<f64>>,
    e1: Option<Vec<f64>>,
    quadrature_tol: f64,
    /// Relative error estimate of the ∫|ζ|² prefix at t_max.
    quad_error: f64,
}

impl ErrorTermGrid {
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        layout: GridLayout,
        e: Vec<f64>,
        estar: Option<Vec<f64>>,
        estar_left: Option<Vec<f64>>,
        r: Option<Vec<f64>>,
        e1: Option<Vec<f64>>,
        quadrature_tol: f64,
        quad_error: f64,
    ) -> Result<Self> {
        let n = layout.len();
        let nb = layout.segment_starts().len();
        let ok = e.len() == n
            && estar.as_ref().is_none_or(|v| v.len() == n)
            && r.as_ref().is_none_or(|v| v.len() == n)
            && e1.as_ref().is_none_or(|v| v.len() == n)
            && estar_left.as_ref().is_none_or(|v| v.len() == nb)
            && estar.is_some() == estar_left.is_some();
        if !ok {
            return Err(Error::domain("error-term arrays do not match the grid layout"));
        }
        Ok(Self {
            layout,
            e,
            estar,
            estar_left,
            r,
            e1,
            quadrature_tol,
            quad_error,
        })
    }

    pub fn layout(&self) -> &GridLayout {
        &self.layout
    }

    pub fn t_values(&self) -> &[f64] {
        self.layout.t()
    }

    pub fn t_max(&self) -> f64 {
        self.layout.t_max()
    }

    pub fn quadrature_tol(&self) -> f64 {
        self.quadrature_tol
    }

    pub fn quad_error_estimate(&self) -> f64 {
        self.quad_error
    }

    pub fn e(&self) -> &[f64] {
        &self.e
    }

    pub fn estar(&self) -> Option<&[f64]> {
        self.estar.as_deref()
    }

    pub fn estar_left(&self) -> Option<&[f64]> {
        self.estar_left.as_deref()
    }

    pub fn r(&self) -> Option<&[f64]> {
        self.r.as_deref()
    }

    pub fn e1(&self) -> Option<&[f64]> {
        self.e1.as_deref()
    }

    pub fn has(&self, field: Field) -> bool {
        match field {
            Field::E => true,
            Field::Estar => self.estar.is_some(),
            Field::R => self.r.is_some(),
            Field::E1 => self.e1.is_some(),
        }
    }

    fn missing(field: Field) -> Error {
        Error::domain(format!("{field:?} has not been computed on this grid"))
    }

    /// Node accessor `(i, from_left) -> value` in the form the integrators take.
    pub fn sampler(&self, field: Field) -> Result<impl Fn(usize, bool) -> f64 + '_> {
        let right: &[f64] = match field {
            Field::E => &self.e,
            Field::Estar => self.estar.as_deref().ok_or(Self::missing(field))?,
            Field::R => self.r.as_deref().ok_or(Self::missing(field))?,
            Field::E1 => self.e1.as_deref().ok_or(Self::missing(field))?,
        };
        let left = match field {
            Field::Estar => self.estar_left.as_deref(),
            _ => None,
        };
        let layout = &self.layout;
        Ok(move |i: usize, from_left: bool| match (from_left, left) {
            (true, Some(l)) => l[layout.boundary_of(i).expect("closing node is a boundary")],
            _ => right[i],
        })
    }

    /// Field value at an arbitrary point by quartic interpolation in the block.
    pub fn value_at(&self, field: Field, x: f64) -> Result<f64> {
        self.layout.check_range(x, x, "value_at")?;
        let f = self.sampler(field)?;
        Ok(self.layout.interpolate(x, f))
    }

    /// E(x) between nodes, continued from the node below x by integrating the
    /// |ζ|² interpolant. Agrees with the cumulative quadrature that produced
    /// the node values, which quadratic interpolation of E does not.
    pub fn e_at(&self, zgrid: &ZetaGrid, x: f64) -> Result<f64> {
        let (a, b) = (zgrid.layout(), &self.layout);
        if a.len() != b.len() || a.t_max() != b.t_max() || a.c_step() != b.c_step() {
            return Err(Error::domain("zeta grid and error-term grid have different layouts"));
        }
        b.check_range(x, x, "e_at")?;
        let x = x.clamp(0.0, b.t_max());
        let i = b.nodes_in(0.0, x).end - 1;
        let ti = b.t()[i];
        Ok(self.e[i] + zgrid.integrate(ti, x)? - (main_term(x) - main_term(ti)))
    }

    /// Field value at node `i`.
    pub fn node_value(&self, field: Field, i: usize) -> Result<f64> {
        Ok(self.sampler(field)?(i, false))
    }
}

/// E(t) at every node of the zeta grid.
pub fn compute_e_grid(zgrid: &ZetaGrid, quadrature_tol: f64) -> Result<ErrorTermGrid> {
    if !(quadrature_tol > 0.0) {
        return Err(Error::Config {
            field: "quadrature_tol".into(),
            reason: format!("{quadrature_tol} must be positive"),
        });
    }
    let layout = zgrid.layout().clone();
    let cum = layout.cumulative(zgrid.zsq_values(), None);
    let total = *cum.values.last().unwrap();
    let rel = if total > 0.0 {
        cum.error_estimate / total
    } else {
        0.0
    };
    if rel > quadrature_tol {
        return Err(Error::Accuracy {
            requested: quadrature_tol,
            achievable: rel,
        });
    }
    let e = layout
        .t()
        .iter()
        .zip(&cum.values)
        .map(|(&t, &c)| c - main_term(t))
        .collect();
    ErrorTermGrid::from_parts(layout, e, None, None, None, None, quadrature_tol, rel)
}

/// Table limit needed to evaluate Δ* up to height `t_max`.
pub fn required_divisor_limit(t_max: f64) -> u64 {
    (4.0 * t_max / (2.0 * PI)).floor() as u64 + 1
}

/// E*(t) = E(t) − 2πΔ*(t/2π).
pub fn compute_estar(grid: &mut ErrorTermGrid, table: &DivisorTable) -> Result<()> {
    let required = required_divisor_limit(grid.t_max());
    if table.limit() < required {
        return Err(Error::TableTooSmall {
            have: table.limit(),
            required,
        });
    }
    let layout = &grid.layout;
    let starts = layout.segment_starts();
    let jumps = layout.segment_jumps();
    let mut right: Vec<f64> = layout
        .t()
        .iter()
        .zip(&grid.e)
        .map(|(&t, &e)| {
            let x = t / (2.0 * PI);
            let m = (4.0 * x).floor() as u64;
            e - 2.0 * PI * table.delta_star_with_count(m, x)
        })
        .collect();
    let mut left = vec![0.0; starts.len()];
    for (b, (&i, &n)) in starts.iter().zip(jumps).enumerate() {
        if n > 0 {
            // node sits exactly on x = n/4
            let x = n as f64 / 4.0;
            right[i] = grid.e[i] - 2.0 * PI * table.delta_star_with_count(n, x);
            left[b] = grid.e[i] - 2.0 * PI * table.delta_star_with_count(n - 1, x);
        } else {
            left[b] = right[i];
        }
    }
    grid.estar = Some(right);
    grid.estar_left = Some(left);
    Ok(())
}

/// R(t) = ∫₀ᵗ E* − (3π/4)t.
pub fn compute_r_grid(grid: &mut ErrorTermGrid) -> Result<()> {
    let f = grid.sampler(Field::Estar)?;
    let cum = grid.layout.cumulative_with(f);
    let r = grid
        .layout
        .t()
        .iter()
        .zip(&cum.values)
        .map(|(&t, &c)| c - 0.75 * PI * t)
        .collect();
    grid.r = Some(r);
    Ok(())
}

/// E₁(t) = ∫₂ᵗ E(u) du.
pub fn compute_e1_grid(grid: &mut ErrorTermGrid) -> Result<()> {
    let anchor = grid
        .layout
        .node_at(2.0)
        .ok_or_else(|| Error::domain("grid has no node at t = 2"))?;
    let cum = grid.layout.cumulative(&grid.e, None);
    let base = cum.values[anchor];
    let mut e1: Vec<f64> = cum.values.iter().map(|c| c - base).collect();
    e1[anchor] = 0.0;
    grid.e1 = Some(e1);
    Ok(())
}

/// E, then E*, R and E₁ in one pass.
pub fn compute_all(zgrid: &ZetaGrid, table: &DivisorTable, quadrature_tol: f64) -> Result<ErrorTermGrid> {
    let mut g = compute_e_grid(zgrid, quadrature_tol)?;
    compute_estar(&mut g, table)?;
    compute_r_grid(&mut g)?;
    compute_e1_grid(&mut g)?;
    Ok(g)
}
