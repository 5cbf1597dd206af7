//! Short-interval moment integrals of E*, R and |ζ(½+it)|², the Gaussian
//! smoothed moments J_k, and the mean square of Δ(x+U) − Δ(x).

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::divisor::DivisorTable;
use crate::error::{Error, Result};
use crate::error_terms::{ErrorTermGrid, Field};
use crate::sum::NeumaierSum;
use crate::zeta::ZetaGrid;

pub const DEFAULT_DIFF_STEP: f64 = 0.1;
pub const MAX_NESTED_K: u32 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MomentKind {
    EstarAbsMoment,
    RAbsMoment,
    ZetaNested,
    ZetaPlain,
    JSmoothed,
    DiffMeansqDelta,
    DiffMeansqE,
}

impl MomentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MomentKind::EstarAbsMoment => "ESTAR_ABS_MOMENT",
            MomentKind::RAbsMoment => "R_ABS_MOMENT",
            MomentKind::ZetaNested => "ZETA_NESTED",
            MomentKind::ZetaPlain => "ZETA_PLAIN",
            MomentKind::JSmoothed => "J_SMOOTHED",
            MomentKind::DiffMeansqDelta => "DIFF_MEANSQ_DELTA",
            MomentKind::DiffMeansqE => "DIFF_MEANSQ_E",
        }
    }
}

fn check_interval(t: f64, h: f64) -> Result<()> {
    if !(t.is_finite() && h.is_finite() && h > 0.0) {
        return Err(Error::domain(format!("interval needs finite T and H > 0, got T = {t}, H = {h}")));
    }
    Ok(())
}

/// ∫_T^{T+H} |f(t)|^k dt for f = E* or R.
pub fn abs_moment(grid: &ErrorTermGrid, field: Field, t: f64, h: f64, k: u32) -> Result<f64> {
    if !matches!(field, Field::Estar | Field::R) {
        return Err(Error::Unsupported(format!("abs_moment of {field:?}")));
    }
    if k == 0 {
        return Err(Error::domain("abs_moment needs k ≥ 1"));
    }
    check_interval(t, h)?;
    let f = grid.sampler(field)?;
    grid.layout()
        .integrate_positive(t, t + h, |i, left| f(i, left).abs().powi(k as i32))
}

/// ∫_{t−H}^{t+H} |ζ(½+iu)|² du.
pub fn inner_zeta_power(zgrid: &ZetaGrid, t: f64, h: f64) -> Result<f64> {
    check_interval(t, h)?;
    Ok(zgrid.integrate(t - h, t + h)?.max(0.0))
}

/// ∫_T^{T+H} |ζ(½+it)|^{2k} dt.
pub fn plain_zeta_moment(zgrid: &ZetaGrid, t: f64, h: f64, k: u32) -> Result<f64> {
    check_interval(t, h)?;
    if k == 0 {
        return Err(Error::domain("plain_zeta_moment needs k ≥ 1"));
    }
    let z = zgrid.zsq_values();
    zgrid
        .layout()
        .integrate_positive(t, t + h, |i, _| z[i].powi(k as i32))
}

/// Nested moments with the cumulative ∫₀ᵗ|ζ|² cached, so each inner integral
/// costs two lookups.
#[derive(Debug, Clone)]
pub struct NestedMoments<'a> {
    zgrid: &'a ZetaGrid,
    cum: Vec<f64>,
}

impl<'a> NestedMoments<'a> {
    pub fn new(zgrid: &'a ZetaGrid) -> Self {
        let cum = zgrid.layout().cumulative(zgrid.zsq_values(), None).values;
        Self { zgrid, cum }
    }

    fn c_at(&self, x: f64) -> f64 {
        let layout = self.zgrid.layout();
        let x = x.clamp(0.0, layout.t_max());
        let z = self.zgrid.zsq_values();
        layout.cumulative_at(&self.cum, x, |i, _| z[i])
    }

    /// ∫_{t−H}^{t+H} |ζ|² from the cached cumulative.
    pub fn inner(&self, t: f64, h: f64) -> f64 {
        (self.c_at(t + h) - self.c_at(t - h)).max(0.0)
    }

    fn check(&self, t: f64, h: f64) -> Result<()> {
        check_interval(t, h)?;
        if !(t > 0.0) {
            return Err(Error::domain(format!("nested moment needs T > 0, got {t}")));
        }
        self.zgrid
            .layout()
            .check_range(t - h, 2.0 * t + h, "nested_moment")
    }

    /// ∫_T^{2T} (∫_{t−H}^{t+H} |ζ(½+iu)|² du)^k dt.
    pub fn nested(&self, t: f64, h: f64, k: u32) -> Result<f64> {
        if !(1..=MAX_NESTED_K).contains(&k) {
            return Err(Error::Unsupported(format!("nested moment with k = {k}; k must be in 1..=5")));
        }
        self.check(t, h)?;
        let tv = self.zgrid.t_values();
        self.zgrid
            .layout()
            .integrate(t, 2.0 * t, |i, _| self.inner(tv[i], h).powi(k as i32))
    }

    /// The k = 1 moment with the order of integration swapped:
    /// K(2T+H) − K(T+H) − K(2T−H) + K(T−H), K the cumulative of ∫₀ᵗ|ζ|².
    pub fn nested_k1_swapped(&self, t: f64, h: f64) -> Result<f64> {
        self.check(t, h)?;
        let layout = self.zgrid.layout();
        let k = layout.cumulative(&self.cum, None).values;
        let k_at = |x: f64| layout.cumulative_at(&k, x.clamp(0.0, layout.t_max()), |i, _| self.cum[i]);
        Ok(k_at(2.0 * t + h) - k_at(t + h) - k_at(2.0 * t - h) + k_at(t - h))
    }
}

pub fn nested_moment(zgrid: &ZetaGrid, t: f64, h: f64, k: u32) -> Result<f64> {
    NestedMoments::new(zgrid).nested(t, h, k)
}

/// J_k(t, G) with its truncation error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedMoment {
    pub value: f64,
    /// The Gaussian mass dropped outside |u| ≤ G log t is below e^{−log²t}.
    pub truncation_bound: f64,
}

/// (1/(√π G)) ∫_{−G log t}^{G log t} |ζ(½+i(t+u))|^{2k} e^{−(u/G)²} du.
pub fn smoothed_moment_j(zgrid: &ZetaGrid, k: u32, t: f64, g: f64) -> Result<SmoothedMoment> {
    if !(k == 1 || k == 2) {
        return Err(Error::Unsupported(format!("J_k with k = {k}; only k = 1, 2")));
    }
    if !(t > 1.0 && g > 0.0 && g.is_finite()) {
        return Err(Error::domain(format!("J_k needs t > 1 and G > 0, got t = {t}, G = {g}")));
    }
    let l = t.ln();
    let z = zgrid.zsq_values();
    let tv = zgrid.t_values();
    let integral = zgrid.layout().integrate(t - g * l, t + g * l, |i, _| {
        let u = (tv[i] - t) / g;
        z[i].powi(k as i32) * (-u * u).exp()
    })?;
    Ok(SmoothedMoment {
        value: integral / (PI.sqrt() * g),
        truncation_bound: (-l * l).exp(),
    })
}

/// Function whose increments enter the difference mean square.
#[derive(Debug, Clone, Copy)]
pub enum DiffTarget<'a> {
    Delta(&'a DivisorTable),
    E(&'a ErrorTermGrid),
}

const DIFF_CHUNK: usize = 1 << 16;

/// ∫_T^{2T} (f(x+U) − f(x))² dx by the midpoint rule on cells of width ≤ δ.
/// For Δ each cell is further cut at the integers and at the integers
/// minus U.
///
/// Partial sums over fixed-size chunks are combined in chunk order, so the
/// result does not depend on the number of workers.
pub fn diff_mean_square(target: DiffTarget<'_>, t: f64, u: f64, delta: f64) -> Result<f64> {
    if u == 0.0 {
        return Ok(0.0);
    }
    if !(t >= 1.0 && t.is_finite()) {
        return Err(Error::domain(format!("diff_mean_square needs T ≥ 1, got {t}")));
    }
    if !(u >= 1.0 && u <= 0.5 * t.sqrt()) {
        return Err(Error::domain(format!("diff_mean_square needs 1 ≤ U ≤ √T/2, got U = {u}")));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::domain(format!("sampling step {delta} must be positive")));
    }
    let n = (t / delta).ceil() as usize;
    let step = t / n as f64;
    let d = |x: f64, f: &dyn Fn(f64) -> f64| {
        let v = f(x + u) - f(x);
        v * v
    };
    // Integral over one sampling cell. For Δ the cell is split where D(x) or
    // D(x+U) jumps, so the midpoint rule only ever sees smooth pieces.
    let cell: Box<dyn Fn(usize) -> f64 + Sync> = match target {
        DiffTarget::Delta(table) => {
            if 2.0 * t + u > table.limit() as f64 {
                return Err(Error::TableTooSmall {
                    have: table.limit(),
                    required: (2.0 * t + u).ceil() as u64,
                });
            }
            let f = move |x: f64| table.delta(x).expect("range checked above");
            let shift = u - u.floor();
            Box::new(move |j: usize| {
                let a = t + j as f64 * step;
                let b = a + step;
                let mut cuts = vec![a];
                let first = [a.floor() + 1.0, (a + shift).floor() + 1.0 - shift];
                for mut k in first {
                    while k < b {
                        cuts.push(k);
                        k += 1.0;
                    }
                }
                cuts.push(b);
                cuts.sort_by(f64::total_cmp);
                cuts.windows(2)
                    .map(|w| (w[1] - w[0]) * d(0.5 * (w[0] + w[1]), &f))
                    .sum()
            })
        }
        DiffTarget::E(grid) => {
            grid.layout().check_range(t, 2.0 * t + u, "diff_mean_square")?;
            let f = move |x: f64| grid.value_at(Field::E, x).expect("range checked above");
            Box::new(move |j: usize| step * d(t + (j as f64 + 0.5) * step, &f))
        }
    };

    let partials: Vec<f64> = (0..n.div_ceil(DIFF_CHUNK))
        .into_par_iter()
        .map(|c| {
            let lo = c * DIFF_CHUNK;
            let hi = (lo + DIFF_CHUNK).min(n);
            (lo..hi).map(&cell).collect::<NeumaierSum>().value()
        })
        .collect();
    Ok(partials.into_iter().collect::<NeumaierSum>().value())
}

/// Comparison between a short-interval mean square and the
/// Gaussian-weighted first moment of E*.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShortIntervalRecord {
    pub t: f64,
    pub g: f64,
    /// ∫_{T−G}^{T+G} |ζ|².
    pub lhs: f64,
    /// (2e/G²) ∫_{−G log T}^{G log T} x E*(T+x) e^{−(x/G)²} dx.
    pub s: f64,
    pub slack: f64,
}

pub fn lemma1_diagnostic(zgrid: &ZetaGrid, grid: &ErrorTermGrid, t: f64, g: f64) -> Result<ShortIntervalRecord> {
    if !(g >= 1.0 && t > 1.0) {
        return Err(Error::domain(format!("lemma1_diagnostic needs G ≥ 1 and T > 1, got T = {t}, G = {g}")));
    }
    let l = t.ln();
    let lhs = zgrid.integrate(t - g, t + g)?;
    let f = grid.sampler(Field::Estar)?;
    let tv = grid.t_values();
    let moment = grid.layout().integrate(t - g * l, t + g * l, |i, left| {
        let x = tv[i] - t;
        x * f(i, left) * (-(x / g) * (x / g)).exp()
    })?;
    let s = 2.0 * std::f64::consts::E / (g * g) * moment;
    Ok(ShortIntervalRecord {
        t,
        g,
        lhs,
        s,
        slack: lhs - s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub kind: MomentKind,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub k: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentScanResult {
    pub rows: Vec<MomentRow>,
    pub config_digest: String,
}

impl MomentScanResult {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["kind", "T", "H", "k", "value"])?;
        for r in &self.rows {
            out.write_record([
                r.kind.as_str().to_string(),
                r.t.to_string(),
                r.h.to_string(),
                r.k.to_string(),
                r.value.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// Parameter lists for a moment scan. For the divisor-difference rows the
/// H column carries U.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MomentScanConfig {
    pub t_list: Vec<f64>,
    pub h_list: Vec<f64>,
    pub k_list: Vec<u32>,
    pub u_list: Vec<f64>,
    pub delta: f64,
}

impl Default for MomentScanConfig {
    fn default() -> Self {
        Self {
            t_list: vec![300.0, 600.0],
            h_list: vec![10.0, 40.0],
            k_list: vec![1, 2],
            u_list: vec![4.0],
            delta: DEFAULT_DIFF_STEP,
        }
    }
}

impl MomentScanConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, empty) in [
            ("t_list", self.t_list.is_empty()),
            ("h_list", self.h_list.is_empty()),
            ("k_list", self.k_list.is_empty()),
        ] {
            if empty {
                return Err(Error::Config {
                    field: format!("scan.{name}"),
                    reason: "must not be empty".into(),
                });
            }
        }
        if self.k_list.contains(&0) {
            return Err(Error::Config {
                field: "scan.k_list".into(),
                reason: "k must be ≥ 1".into(),
            });
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scan config serializes");
        hex(&Sha256::digest(&json))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy)]
enum Job {
    Abs(MomentKind, Field, f64, f64, u32),
    Nested(f64, f64, u32),
    Plain(f64, f64, u32),
    J(f64, f64, u32),
    Diff(MomentKind, f64, f64),
}

/// Every applicable moment over the cartesian product of the scan lists.
/// Rows are computed in parallel and returned sorted by (kind, T, H, k).
/// Combinations whose range does not fit the grids or the table are skipped
/// with a warning.
pub fn run_moment_scan(
    cfg: &MomentScanConfig,
    zgrid: &ZetaGrid,
    grid: &ErrorTermGrid,
    table: Option<&DivisorTable>,
) -> Result<MomentScanResult> {
    cfg.validate()?;
    let mut jobs = Vec::new();
    for &t in &cfg.t_list {
        for &h in &cfg.h_list {
            for &k in &cfg.k_list {
                jobs.push(Job::Abs(MomentKind::EstarAbsMoment, Field::Estar, t, h, k));
                jobs.push(Job::Abs(MomentKind::RAbsMoment, Field::R, t, h, k));
                jobs.push(Job::Plain(t, h, k));
                if k <= MAX_NESTED_K {
                    jobs.push(Job::Nested(t, h, k));
                }
                if k <= 2 {
                    jobs.push(Job::J(t, h, k));
                }
            }
        }
        for &u in &cfg.u_list {
            if table.is_some() {
                jobs.push(Job::Diff(MomentKind::DiffMeansqDelta, t, u));
            }
            jobs.push(Job::Diff(MomentKind::DiffMeansqE, t, u));
        }
    }
    let nested = NestedMoments::new(zgrid);
    let results: Vec<Result<MomentRow>> = jobs
        .par_iter()
        .map(|job| -> Result<MomentRow> {
            let row = |kind, t, h, k, value| MomentRow { kind, t, h, k, value };
            Ok(match *job {
                Job::Abs(kind, field, t, h, k) => row(kind, t, h, k, abs_moment(grid, field, t, h, k)?),
                Job::Nested(t, h, k) => row(MomentKind::ZetaNested, t, h, k, nested.nested(t, h, k)?),
                Job::Plain(t, h, k) => row(MomentKind::ZetaPlain, t, h, k, plain_zeta_moment(zgrid, t, h, k)?),
                Job::J(t, g, k) => row(MomentKind::JSmoothed, t, g, k, smoothed_moment_j(zgrid, k, t, g)?.value),
                Job::Diff(kind, t, u) => {
                    let target = match kind {
                        MomentKind::DiffMeansqDelta => DiffTarget::Delta(table.expect("job only queued with a table")),
                        _ => DiffTarget::E(grid),
                    };
                    row(kind, t, u, 2, diff_mean_square(target, t, u, cfg.delta)?)
                }
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    for (job, r) in jobs.iter().zip(results) {
        match r {
            Ok(row) => rows.push(row),
            Err(e @ (Error::Domain(_) | Error::TableTooSmall { .. })) => {
                log::warn!("moment scan: skipping {job:?}: {e}");
            }
            Err(e) => return Err(e),
        }
    }
    rows.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then(a.t.total_cmp(&b.t))
            .then(a.h.total_cmp(&b.h))
            .then(a.k.cmp(&b.k))
    });
    Ok(MomentScanResult {
        rows,
        config_digest: cfg.digest(),
    })
}
