//! Piecewise-uniform sample grids and the quadrature rules on top of them.
//!
//! A [`GridLayout`] is a chain of segments. Segment boundaries are placed at
//! t = 0, at the anchor t = 2 and at every t = πn/2, where Δ*(t/2π) jumps, so
//! no quadrature block ever straddles a discontinuity of E*. Inside a segment
//! the spacing is uniform and the number of intervals is a multiple of four,
//! so the segment splits into blocks of four intervals. Whole blocks use
//! Boole's rule, partial blocks the integral of the quartic interpolant. The
//! error estimate compares composite Simpson at steps h and 2h, which
//! overstates the error of the Boole sums.
//!
//! Fields that jump at a boundary are passed as right-continuous node values
//! plus a left limit per boundary. Every integrator takes a closure
//! `value(node, from_left)` where `from_left` is set exactly when the node is
//! the closing node of the segment being integrated.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sum::NeumaierSum;

/// Absolute slack when checking that a point lies inside the grid.
const RANGE_EPS: f64 = 1e-9;

pub const DEFAULT_C_STEP: f64 = 0.5;
pub const MAX_STEP: f64 = 0.25;

/// Sample spacing bound at height `t`: `min(0.25, c_step / log(2 + t))`,
/// tightened near the origin in proportion to the distance from ½+it to the
/// pole of ζ at 1, which limits the smoothness of |ζ|² there.
pub fn max_step(t: f64, c_step: f64) -> f64 {
    let pole = (0.25 + t * t).sqrt();
    MAX_STEP.min(c_step / (2.0 + t).ln()).min(c_step * pole / 8.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridLayout {
    t: Vec<f64>,
    /// Node index of each segment boundary; the last entry is the final node.
    seg_start: Vec<usize>,
    /// For each boundary, the n with t = πn/2 when Δ*(t/2π) jumps there, else 0.
    seg_jump: Vec<u64>,
    c_step: f64,
}

/// Result of a cumulative integration: ∫₀^{t_i} at every node.
#[derive(Debug, Clone)]
pub struct Cumulative {
    pub values: Vec<f64>,
    /// Σ over segments of |S_h − S_2h| / 15.
    pub error_estimate: f64,
}

impl GridLayout {
    pub fn build(t_max: f64, c_step: f64) -> Result<Self> {
        if !(t_max >= 1.0 && t_max.is_finite()) {
            return Err(Error::domain(format!("grid t_max = {t_max} must be ≥ 1")));
        }
        if !(c_step > 0.0 && c_step.is_finite()) {
            return Err(Error::Config {
                field: "c_step".into(),
                reason: format!("{c_step} must be positive"),
            });
        }
        let mut bounds: Vec<(f64, u64)> = vec![(0.0, 0)];
        let mut n = 1u64;
        let mut anchor_placed = false;
        loop {
            let tb = PI * n as f64 / 2.0;
            if !anchor_placed && 2.0 < tb && 2.0 < t_max {
                bounds.push((2.0, 0));
                anchor_placed = true;
            }
            if tb >= t_max {
                break;
            }
            bounds.push((tb, n));
            n += 1;
        }
        if bounds.last().map(|b| b.0) != Some(t_max) {
            bounds.push((t_max, 0));
        }

        // One step for every segment from t = π on. The leading quadrature
        // error terms then telescope across segment boundaries; a change of
        // step would leave a persistent offset in every cumulative integral.
        let uniform = max_step(PI, c_step).min(max_step(t_max.max(PI), c_step));
        let mut t = Vec::new();
        let mut seg_start = Vec::with_capacity(bounds.len());
        let mut seg_jump = Vec::with_capacity(bounds.len());
        for w in bounds.windows(2) {
            let (a, ja) = w[0];
            let (b, _) = w[1];
            seg_start.push(t.len());
            seg_jump.push(ja);
            let len = b - a;
            let step = if a >= PI - RANGE_EPS {
                uniform
            } else {
                max_step(a, c_step).min(max_step(b, c_step))
            };
            let quads = (len / (4.0 * step) - 1e-9).ceil().max(1.0) as usize;
            let intervals = 4 * quads;
            let h = len / intervals as f64;
            for j in 0..intervals {
                t.push(a + j as f64 * h);
            }
        }
        let (tb, jb) = *bounds.last().unwrap();
        seg_start.push(t.len());
        seg_jump.push(jb);
        t.push(tb);
        Ok(Self {
            t,
            seg_start,
            seg_jump,
            c_step,
        })
    }

    /// Rebuilds a layout from stored arrays, checking its structural rules.
    pub fn from_parts(t: Vec<f64>, seg_start: Vec<usize>, seg_jump: Vec<u64>, c_step: f64) -> Result<Self> {
        let bad = |why: String| Err(Error::domain(format!("invalid grid layout: {why}")));
        if t.len() < 3 || seg_start.len() < 2 || seg_jump.len() != seg_start.len() {
            return bad("too few nodes or segments".into());
        }
        if t[0] != 0.0 || seg_start[0] != 0 || *seg_start.last().unwrap() != t.len() - 1 {
            return bad("grid must start at t = 0 and end on a boundary".into());
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("t values not strictly increasing".into());
        }
        for s in 0..seg_start.len() - 1 {
            let (i0, i1) = (seg_start[s], seg_start[s + 1]);
            if i1 <= i0 || (i1 - i0) % 2 != 0 {
                return bad(format!("segment {s} has an odd or empty interval count"));
            }
            let h = (t[i1] - t[i0]) / (i1 - i0) as f64;
            for i in i0..i1 {
                if ((t[i + 1] - t[i]) - h).abs() > 1e-9 * h.max(1.0) {
                    return bad(format!("segment {s} is not uniformly spaced"));
                }
            }
        }
        Ok(Self {
            t,
            seg_start,
            seg_jump,
            c_step,
        })
    }

    pub fn t(&self) -> &[f64] {
        &self.t
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        *self.t.last().unwrap()
    }

    pub fn c_step(&self) -> f64 {
        self.c_step
    }

    pub fn segment_starts(&self) -> &[usize] {
        &self.seg_start
    }

    pub fn segment_jumps(&self) -> &[u64] {
        &self.seg_jump
    }

    pub fn segment_count(&self) -> usize {
        self.seg_start.len() - 1
    }

    pub fn max_gap(&self) -> f64 {
        self.t.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Node index whose t equals `x` exactly, if any.
    pub fn node_at(&self, x: f64) -> Option<usize> {
        self.t.binary_search_by(|v| v.total_cmp(&x)).ok()
    }

    /// Boundary index of node `i`, if `i` is a segment boundary.
    pub fn boundary_of(&self, i: usize) -> Option<usize> {
        self.seg_start.binary_search(&i).ok()
    }

    pub fn contains(&self, a: f64, b: f64) -> bool {
        a >= -RANGE_EPS && b <= self.t_max() + RANGE_EPS && a <= b
    }

    pub(crate) fn check_range(&self, a: f64, b: f64, what: &str) -> Result<()> {
        if !(a.is_finite() && b.is_finite() && self.contains(a, b)) {
            return Err(Error::domain(format!(
                "{what}: range [{a}, {b}] not inside grid [0, {}]",
                self.t_max()
            )));
        }
        Ok(())
    }

    fn segment_of(&self, x: f64) -> usize {
        let nseg = self.segment_count();
        // first boundary strictly greater than x, minus one
        let idx = self.seg_start.partition_point(|&i| self.t[i] <= x);
        idx.saturating_sub(1).min(nseg - 1)
    }

    /// Block of four intervals containing `x`: first node index, spacing,
    /// local coordinate in [0, 4], and whether the block's last node closes
    /// its segment.
    fn block_of(&self, x: f64) -> (usize, f64, f64, bool) {
        let s = self.segment_of(x);
        let (i0, i1) = (self.seg_start[s], self.seg_start[s + 1]);
        let a = self.t[i0];
        let h = (self.t[i1] - a) / (i1 - i0) as f64;
        let nblocks = (i1 - i0) / 4;
        let u = ((x - a) / h).max(0.0);
        let p = ((u / 4.0).floor() as usize).min(nblocks - 1);
        let local = (u - 4.0 * p as f64).clamp(0.0, 4.0);
        let first = i0 + 4 * p;
        (first, h, local, first + 4 == i1)
    }

    fn block_values<F>(first: usize, closes: bool, value: &F) -> [f64; 5]
    where
        F: Fn(usize, bool) -> f64,
    {
        std::array::from_fn(|k| value(first + k, closes && k == 4))
    }

    /// ∫₀^{t_i} f at every node.
    pub fn cumulative_with<F>(&self, value: F) -> Cumulative
    where
        F: Fn(usize, bool) -> f64,
    {
        let mut out = vec![0.0; self.t.len()];
        let mut acc = NeumaierSum::new();
        let mut err = NeumaierSum::new();
        for s in 0..self.segment_count() {
            let (i0, i1) = (self.seg_start[s], self.seg_start[s + 1]);
            let h = (self.t[i1] - self.t[i0]) / (i1 - i0) as f64;
            let mut fine = NeumaierSum::new();
            let mut coarse = NeumaierSum::new();
            let mut i = i0;
            while i < i1 {
                let f = Self::block_values(i, i + 4 == i1, &value);
                for k in 1..4 {
                    out[i + k] = acc.value() + h * quartic_partial(&f, 0.0, k as f64);
                }
                acc.add(h * boole(&f));
                out[i + 4] = acc.value();
                fine.add(h / 3.0 * (f[0] + 4.0 * f[1] + 2.0 * f[2] + 4.0 * f[3] + f[4]));
                coarse.add(2.0 * h / 3.0 * (f[0] + 4.0 * f[2] + f[4]));
                i += 4;
            }
            err.add((fine.value() - coarse.value()).abs() / 15.0);
        }
        Cumulative {
            values: out,
            error_estimate: err.value(),
        }
    }

    /// Cumulative integral of a sampled field with optional left limits at boundaries.
    pub fn cumulative(&self, right: &[f64], left: Option<&[f64]>) -> Cumulative {
        assert_eq!(right.len(), self.t.len());
        match left {
            None => self.cumulative_with(|i, _| right[i]),
            Some(left) => {
                assert_eq!(left.len(), self.seg_start.len());
                self.cumulative_with(|i, from_left| {
                    if from_left {
                        left[self.boundary_of(i).expect("segment end is a boundary")]
                    } else {
                        right[i]
                    }
                })
            }
        }
    }

    /// ∫₀^x f given the node cumulative values, by integrating the block's
    /// quartic interpolant from its first node to `x`.
    pub fn cumulative_at<F>(&self, cum: &[f64], x: f64, value: F) -> f64
    where
        F: Fn(usize, bool) -> f64,
    {
        let (i0, h, s, closes) = self.block_of(x);
        let f = Self::block_values(i0, closes, &value);
        cum[i0] + h * quartic_partial(&f, 0.0, s)
    }

    /// Quartic interpolation of node values at `x`.
    pub fn interpolate<F>(&self, x: f64, value: F) -> f64
    where
        F: Fn(usize, bool) -> f64,
    {
        let (i0, _, s, closes) = self.block_of(x);
        quartic_at(&Self::block_values(i0, closes, &value), s)
    }

    /// ∫_a^b f, Boole's rule on whole blocks and the quartic interpolant on
    /// the partial blocks at either end.
    pub fn integrate<F>(&self, a: f64, b: f64, value: F) -> Result<f64>
    where
        F: Fn(usize, bool) -> f64,
    {
        self.integrate_with(a, b, value, boole, quartic_partial)
    }

    /// Like [`GridLayout::integrate`] but with the trapezoid rule on the
    /// nodes and the broken-line interpolant on partial intervals, so every
    /// node weight is nonnegative and the weights sum to b − a. Inequalities
    /// such as Cauchy–Schwarz then hold for the discrete sums exactly.
    pub fn integrate_positive<F>(&self, a: f64, b: f64, value: F) -> Result<f64>
    where
        F: Fn(usize, bool) -> f64,
    {
        self.integrate_with(a, b, value, |f| linear_partial(f, 0.0, 4.0), linear_partial)
    }

    fn integrate_with<F>(
        &self,
        a: f64,
        b: f64,
        value: F,
        whole: impl Fn(&[f64; 5]) -> f64,
        partial: fn(&[f64; 5], f64, f64) -> f64,
    ) -> Result<f64>
    where
        F: Fn(usize, bool) -> f64,
    {
        self.check_range(a, b, "integrate")?;
        let a = a.max(0.0);
        let b = b.min(self.t_max());
        if a == b {
            return Ok(0.0);
        }
        let mut acc = NeumaierSum::new();
        let s_first = self.segment_of(a);
        for s in s_first..self.segment_count() {
            let (i0, i1) = (self.seg_start[s], self.seg_start[s + 1]);
            let (ta, tb) = (self.t[i0], self.t[i1]);
            if ta >= b {
                break;
            }
            let h = (tb - ta) / (i1 - i0) as f64;
            let lo = a.max(ta);
            let hi = b.min(tb);
            if hi <= lo {
                continue;
            }
            let nblocks = (i1 - i0) / 4;
            let p_lo = (((lo - ta) / h / 4.0).floor() as usize).min(nblocks - 1);
            let p_hi = (((hi - ta) / h / 4.0).ceil() as usize).clamp(p_lo + 1, nblocks);
            for p in p_lo..p_hi {
                let first = i0 + 4 * p;
                let pa = ta + 4.0 * p as f64 * h;
                let sa = ((lo - pa) / h).clamp(0.0, 4.0);
                let sb = ((hi - pa) / h).clamp(0.0, 4.0);
                if sb <= sa {
                    continue;
                }
                let f = Self::block_values(first, first + 4 == i1, &value);
                if sa == 0.0 && sb == 4.0 {
                    acc.add(h * whole(&f));
                } else {
                    acc.add(h * partial(&f, sa, sb));
                }
            }
        }
        Ok(acc.value())
    }

    /// Node indices `i` with `a ≤ t_i ≤ b`.
    pub fn nodes_in(&self, a: f64, b: f64) -> std::ops::Range<usize> {
        let lo = self.t.partition_point(|&v| v < a);
        let hi = self.t.partition_point(|&v| v <= b);
        lo..hi.max(lo)
    }
}

/// Boole's rule on nodes 0..4, in units of h.
fn boole(f: &[f64; 5]) -> f64 {
    2.0 / 45.0 * (7.0 * (f[0] + f[4]) + 32.0 * (f[1] + f[3]) + 12.0 * f[2])
}

/// The quartic through (k, f_k), k = 0..4, evaluated at `u`.
fn quartic_at(f: &[f64; 5], u: f64) -> f64 {
    (0..5)
        .map(|j| {
            let basis: f64 = (0..5)
                .filter(|&m| m != j)
                .map(|m| (u - m as f64) / (j as f64 - m as f64))
                .product();
            f[j] * basis
        })
        .sum()
}

/// ∫_{sa}^{sb} of the quartic through (k, f_k), in units of h. Three-point
/// Gauss–Legendre is exact for polynomials of degree five.
fn quartic_partial(f: &[f64; 5], sa: f64, sb: f64) -> f64 {
    const X: f64 = 0.774_596_669_241_483_4;
    let (m, r) = (0.5 * (sa + sb), 0.5 * (sb - sa));
    r * (5.0 * quartic_at(f, m - r * X) + 8.0 * quartic_at(f, m) + 5.0 * quartic_at(f, m + r * X)) / 9.0
}

/// ∫_{sa}^{sb} of the broken line through (k, f_k), k = 0..4, in units of h.
fn linear_partial(f: &[f64; 5], sa: f64, sb: f64) -> f64 {
    (0..4)
        .map(|k| {
            let lo = (sa - k as f64).clamp(0.0, 1.0);
            let hi = (sb - k as f64).clamp(0.0, 1.0);
            if hi <= lo {
                return 0.0;
            }
            let mid = 0.5 * (lo + hi);
            (hi - lo) * (f[k] + (f[k + 1] - f[k]) * mid)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_structure() {
        let g = GridLayout::build(100.0, DEFAULT_C_STEP).unwrap();
        assert_eq!(g.t()[0], 0.0);
        assert_eq!(g.t_max(), 100.0);
        assert!(g.max_gap() <= 0.25 + 1e-12);
        assert!(g.node_at(2.0).is_some());
        for w in g.t().windows(2) {
            assert!(w[1] > w[0]);
        }
        for (b, &n) in g.segment_jumps().iter().enumerate() {
            let t = g.t()[g.segment_starts()[b]];
            if n > 0 {
                assert!((t - PI * n as f64 / 2.0).abs() < 1e-12);
            }
        }
        let jumps = g.segment_jumps().iter().filter(|&&n| n > 0).count();
        assert_eq!(jumps, (100.0 / (PI / 2.0)) as usize);
        for w in g.segment_starts().windows(2) {
            assert_eq!((w[1] - w[0]) % 4, 0);
        }
        let rebuilt = GridLayout::from_parts(
            g.t().to_vec(),
            g.segment_starts().to_vec(),
            g.segment_jumps().to_vec(),
            g.c_step(),
        )
        .unwrap();
        assert_eq!(rebuilt, g);
    }

    #[test]
    fn spacing_follows_rule() {
        let g = GridLayout::build(2000.0, DEFAULT_C_STEP).unwrap();
        for w in g.t().windows(2) {
            assert!(w[1] - w[0] <= max_step(w[1], DEFAULT_C_STEP) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn polynomials_integrate_exactly() {
        let g = GridLayout::build(30.0, DEFAULT_C_STEP).unwrap();
        let cube: Vec<f64> = g.t().iter().map(|t| t * t * t - 2.0 * t + 1.0).collect();
        let exact = |x: f64| x.powi(4) / 4.0 - x * x + x;
        let c = g.cumulative(&cube, None);
        for (i, &t) in g.t().iter().enumerate() {
            assert!((c.values[i] - exact(t)).abs() < 1e-9 * exact(t).abs().max(1.0));
        }
        let quad: Vec<f64> = g.t().iter().map(|t| 3.0 * t * t + 1.0).collect();
        let eq = |x: f64| x * x * x + x;
        let c = g.cumulative(&quad, None);
        for (i, &t) in g.t().iter().enumerate() {
            assert!((c.values[i] - eq(t)).abs() < 1e-10 * eq(t).max(1.0));
        }
        for (a, b) in [(0.3, 17.77), (2.0, 2.05), (5.5, 29.99), (0.0, 30.0)] {
            let v = g.integrate(a, b, |i, _| quad[i]).unwrap();
            assert!((v - (eq(b) - eq(a))).abs() < 1e-10 * eq(b), "[{a},{b}]");
            let x = g.cumulative_at(&c.values, b, |i, _| quad[i]);
            assert!((x - eq(b)).abs() < 1e-10 * eq(b));
        }
    }

    #[test]
    fn quartics_integrate_and_interpolate_exactly() {
        let g = GridLayout::build(25.0, DEFAULT_C_STEP).unwrap();
        let p = |x: f64| x.powi(4) - 3.0 * x.powi(3) + x - 2.0;
        let ip = |x: f64| x.powi(5) / 5.0 - 0.75 * x.powi(4) + 0.5 * x * x - 2.0 * x;
        let v: Vec<f64> = g.t().iter().map(|&t| p(t)).collect();
        let c = g.cumulative(&v, None);
        for (i, &t) in g.t().iter().enumerate() {
            assert!((c.values[i] - ip(t)).abs() < 1e-9 * ip(t).abs().max(1.0), "node {i}");
        }
        for (a, b) in [(0.3, 17.77), (2.0, 2.05), (5.5, 24.99)] {
            let exact = ip(b) - ip(a);
            let direct = g.integrate(a, b, |i, _| v[i]).unwrap();
            assert!((direct - exact).abs() < 1e-9 * exact.abs().max(1.0), "[{a},{b}]");
            let via_cum = g.cumulative_at(&c.values, b, |i, _| v[i]) - g.cumulative_at(&c.values, a, |i, _| v[i]);
            assert!((via_cum - exact).abs() < 1e-9 * exact.abs().max(1.0));
            assert!((g.interpolate(a, |i, _| v[i]) - p(a)).abs() < 1e-9 * p(a).abs().max(1.0));
        }
    }

    #[test]
    fn uniform_step_past_pi() {
        let g = GridLayout::build(500.0, DEFAULT_C_STEP).unwrap();
        let mut steps = Vec::new();
        for w in g.segment_starts().windows(2) {
            let (a, b) = (g.t()[w[0]], g.t()[w[1]]);
            if a >= PI - 1e-9 && b < g.t_max() {
                steps.push((b - a) / (w[1] - w[0]) as f64);
            }
        }
        assert!(steps.len() > 300);
        assert!(steps.iter().all(|h| (h - steps[0]).abs() < 1e-12));
    }

    #[test]
    fn step_function_with_left_limits_is_exact() {
        // f(t) = number of jump boundaries ≤ t: a right-continuous staircase
        let g = GridLayout::build(20.0, DEFAULT_C_STEP).unwrap();
        let stair = |t: f64| (t / (PI / 2.0)).floor();
        let right: Vec<f64> = g
            .t()
            .iter()
            .enumerate()
            .map(|(i, &t)| match g.boundary_of(i) {
                Some(b) if g.segment_jumps()[b] > 0 => g.segment_jumps()[b] as f64,
                _ => stair(t),
            })
            .collect();
        let left: Vec<f64> = g
            .segment_jumps()
            .iter()
            .enumerate()
            .map(|(b, &n)| {
                if n > 0 {
                    n as f64 - 1.0
                } else {
                    right[g.segment_starts()[b]]
                }
            })
            .collect();
        let c = g.cumulative(&right, Some(&left));
        let exact = |x: f64| {
            let w = PI / 2.0;
            let k = (x / w).floor();
            w * k * (k - 1.0) / 2.0 + k * (x - k * w)
        };
        assert!((c.values.last().unwrap() - exact(20.0)).abs() < 1e-11);
        assert!(c.error_estimate < 1e-12);
    }

    #[test]
    fn interpolation_of_quadratics() {
        let g = GridLayout::build(10.0, DEFAULT_C_STEP).unwrap();
        let v: Vec<f64> = g.t().iter().map(|t| t * t - t).collect();
        for x in [0.0, 0.01, 1.0, 2.0, 3.3, 9.999, 10.0] {
            assert!((g.interpolate(x, |i, _| v[i]) - (x * x - x)).abs() < 1e-12);
        }
    }

    #[test]
    fn positive_rule_is_exact_for_lines_and_has_length_weights() {
        let g = GridLayout::build(40.0, DEFAULT_C_STEP).unwrap();
        let line: Vec<f64> = g.t().iter().map(|t| 3.0 * t - 1.0).collect();
        for (a, b) in [(0.0, 40.0), (0.013, 7.77), (3.3, 3.31), (12.0, 39.9)] {
            let one = g.integrate_positive(a, b, |_, _| 1.0).unwrap();
            assert!((one - (b - a)).abs() < 1e-12);
            let v = g.integrate_positive(a, b, |i, _| line[i]).unwrap();
            let exact = 1.5 * (b * b - a * a) - (b - a);
            assert!((v - exact).abs() < 1e-10 * exact.abs().max(1.0), "[{a},{b}]");
        }
    }

    #[test]
    fn out_of_range_is_domain_error() {
        let g = GridLayout::build(10.0, DEFAULT_C_STEP).unwrap();
        assert!(g.integrate(-1.0, 3.0, |_, _| 1.0).is_err());
        assert!(g.integrate(1.0, 10.5, |_, _| 1.0).is_err());
        assert!(GridLayout::build(0.5, DEFAULT_C_STEP).is_err());
    }
}
