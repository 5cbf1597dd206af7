//! Run configuration and the pipeline commands: sieve, grid, error terms,
//! moments, verification and plot export. Every command reads and writes
//! files under `out_dir` and skips work whose output is already up to date.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use crate::divisor::{DivisorTable, DEFAULT_MEMORY_CAP};
use crate::error::{Error, Result};
use crate::error_terms::{compute_all, required_divisor_limit, ErrorTermGrid, DEFAULT_QUADRATURE_TOL};
use crate::moments::run_moment_scan;
use crate::moments::MomentScanConfig;
use crate::persist::{self, sha256_hex, Sidecar};
use crate::quad::{GridLayout, DEFAULT_C_STEP, MAX_STEP};
use crate::verify::{run_suite, SuiteInputs, SuiteParams, VerificationReport, SUITES};
use crate::zeta::{evaluate_range, EvalConfig, StepPolicy, ZetaEvaluator, ZetaGrid, MAX_GRID_POINTS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub t_max: f64,
    /// Defaults to the smallest limit that covers Δ*(t/2π) up to t_max.
    pub divisor_limit: Option<u64>,
    pub c_step: f64,
    pub quadrature_tol: f64,
    pub out_dir: PathBuf,
    /// Zeta grid points evaluated between checkpoints.
    pub checkpoint_every: usize,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub suite: String,
    pub eval: EvalConfig,
    pub scan: MomentScanConfig,
    pub verify: SuiteParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            t_max: 2000.0,
            divisor_limit: None,
            c_step: DEFAULT_C_STEP,
            quadrature_tol: DEFAULT_QUADRATURE_TOL,
            out_dir: PathBuf::from("zlab-out"),
            checkpoint_every: 10_000,
            workers: 0,
            suite: "all".into(),
            eval: EvalConfig::default(),
            scan: MomentScanConfig::default(),
            verify: SuiteParams::default(),
        }
    }
}

fn config_err(field: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let reason = e.message().to_string();
            config_err("<config>", reason)
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn divisor_limit(&self) -> u64 {
        self.divisor_limit
            .unwrap_or_else(|| required_divisor_limit(self.t_max))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_max >= 2.0 && self.t_max.is_finite()) {
            return Err(config_err("t_max", format!("{} must be at least 2", self.t_max)));
        }
        let need = required_divisor_limit(self.t_max);
        if self.divisor_limit() < need {
            return Err(config_err(
                "divisor_limit",
                format!("{} is below 4 t_max/(2 pi) = {need}", self.divisor_limit()),
            ));
        }
        if self.divisor_limit() > DEFAULT_MEMORY_CAP {
            return Err(config_err(
                "divisor_limit",
                format!("{} exceeds the memory cap {DEFAULT_MEMORY_CAP}", self.divisor_limit()),
            ));
        }
        if !(self.c_step > 0.0 && self.c_step.is_finite()) {
            return Err(config_err("c_step", "must be positive"));
        }
        if !(self.quadrature_tol > 0.0) {
            return Err(config_err("quadrature_tol", "must be positive"));
        }
        if self.checkpoint_every == 0 {
            return Err(config_err("checkpoint_every", "must be at least 1"));
        }
        if !SUITES.contains(&self.suite.as_str()) {
            return Err(config_err("suite", format!("{:?} is not one of {SUITES:?}", self.suite)));
        }
        self.eval.validate()?;
        self.scan.validate()?;
        Ok(())
    }

    pub fn paths(&self) -> Paths {
        Paths::new(&self.out_dir)
    }
}

/// Output file locations under one directory.
#[derive(Debug, Clone)]
pub struct Paths {
    pub dir: PathBuf,
    pub divisor_table: PathBuf,
    pub zeta_grid: PathBuf,
    pub checkpoint: PathBuf,
    pub error_terms: PathBuf,
    pub error_terms_csv: PathBuf,
    pub moments: PathBuf,
    pub report_csv: PathBuf,
    pub report_json: PathBuf,
    pub plot: PathBuf,
}

impl Paths {
    pub fn new(dir: &Path) -> Self {
        let p = |name: &str| dir.join(name);
        Self {
            dir: dir.to_path_buf(),
            divisor_table: p("divisor_table.zlb"),
            zeta_grid: p("zeta_grid.zlb"),
            checkpoint: p("zeta_grid.ckpt"),
            error_terms: p("error_terms.zlb"),
            error_terms_csv: p("error_terms.csv"),
            moments: p("moments.csv"),
            report_csv: p("report.csv"),
            report_json: p("report.json"),
            plot: p("plot.csv"),
        }
    }
}

/// Runs `f` on a pool of `workers` threads (0 = one per core).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| config_err("workers", e.to_string()))?;
    Ok(pool.install(f))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Sidecar of an existing output if the file still matches it.
fn current(path: &Path) -> Option<Sidecar> {
    let car = persist::read_sidecar(path).ok()?;
    (persist::file_sha256(path).ok()? == car.sha256).then_some(car)
}

pub fn cmd_sieve(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let paths = cfg.paths();
    ensure_dir(&paths.dir)?;
    let limit = cfg.divisor_limit();
    if let Some(car) = current(&paths.divisor_table) {
        if car.meta.get("limit").and_then(|v| v.as_u64()) == Some(limit) {
            info!("divisor table up to date (limit {limit})");
            return Ok(paths.divisor_table);
        }
    }
    info!("sieving d(n) up to {limit}");
    let table = with_workers(cfg.workers, || DivisorTable::build(limit))??;
    persist::save_divisor_table(&paths.divisor_table, &table)?;
    info!("wrote {}", paths.divisor_table.display());
    Ok(paths.divisor_table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Checkpoint {
    key: String,
    points_done: usize,
    accuracy: f64,
}

/// Identifies a grid build: the node positions and the evaluator settings.
fn grid_key(layout: &GridLayout, eval: &EvalConfig) -> String {
    let mut bytes: Vec<u8> = layout.t().iter().flat_map(|t| t.to_le_bytes()).collect();
    bytes.extend(serde_json::to_vec(eval).expect("eval config serializes"));
    sha256_hex(&bytes)
}

fn read_checkpoint(paths: &Paths, key: &str, total: usize) -> Result<(Vec<f64>, f64)> {
    let meta = persist::sidecar_path(&paths.checkpoint);
    let Ok(text) = fs::read_to_string(&meta) else {
        return Ok((Vec::new(), 0.0));
    };
    let ck: Checkpoint = match serde_json::from_str(&text) {
        Ok(c) => c,
        Err(_) => return Ok((Vec::new(), 0.0)),
    };
    if ck.key != key {
        info!("checkpoint belongs to a different grid; starting over");
        return Ok((Vec::new(), 0.0));
    }
    let mut raw = Vec::new();
    if let Ok(mut f) = fs::File::open(&paths.checkpoint) {
        f.read_to_end(&mut raw).map_err(|e| Error::io(&paths.checkpoint, e))?;
    }
    let done = ck.points_done.min(raw.len() / 8).min(total);
    let vals = raw[..done * 8]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((vals, ck.accuracy))
}

/// Outcome of a grid build session.
#[derive(Debug, Clone, PartialEq)]
pub struct GridProgress {
    pub path: PathBuf,
    pub points_done: usize,
    pub points_total: usize,
    /// Points recovered from an earlier checkpoint, if any.
    pub resumed_from: Option<usize>,
    /// The finished grid was already on disk and nothing was evaluated.
    pub already_complete: bool,
}

impl GridProgress {
    pub fn is_complete(&self) -> bool {
        self.points_done == self.points_total
    }
}

pub fn cmd_grid(cfg: &RunConfig) -> Result<PathBuf> {
    Ok(cmd_grid_budget(cfg, usize::MAX)?.path)
}

/// Evaluates at most `budget` new grid points, leaving a checkpoint behind
/// when the grid is not finished. `path` is the checkpoint in that case.
pub fn cmd_grid_budget(cfg: &RunConfig, budget: usize) -> Result<GridProgress> {
    cfg.validate()?;
    let paths = cfg.paths();
    ensure_dir(&paths.dir)?;
    let layout = GridLayout::build(cfg.t_max, cfg.c_step)?;
    let n = layout.len();
    if n > MAX_GRID_POINTS {
        return Err(Error::Capacity {
            what: "zeta grid points",
            requested: n as u64,
            cap: MAX_GRID_POINTS as u64,
        });
    }
    if current(&paths.zeta_grid).is_some() {
        if let Ok((z, _)) = persist::load_zeta_grid(&paths.zeta_grid) {
            if z.layout() == &layout && z.eval_config() == &cfg.eval {
                info!("resumed: zeta grid already complete ({n} points)");
                return Ok(GridProgress {
                    path: paths.zeta_grid,
                    points_done: n,
                    points_total: n,
                    resumed_from: None,
                    already_complete: true,
                });
            }
        }
    }
    let key = grid_key(&layout, &cfg.eval);
    let (mut zsq, mut accuracy) = read_checkpoint(&paths, &key, n)?;
    let resumed_from = (!zsq.is_empty()).then_some(zsq.len());
    if let Some(done) = resumed_from {
        info!("resumed from checkpoint at {done}/{n} points");
    }
    let stop = zsq.len().saturating_add(budget).min(n);
    // rewrite the checkpoint so it holds exactly the trusted prefix
    let mut file = BufWriter::new(
        OpenOptions::new()
            .create(true)
            .write(true)
            .truncate(true)
            .open(&paths.checkpoint)
            .map_err(|e| Error::io(&paths.checkpoint, e))?,
    );
    let io = |e| Error::io(&paths.checkpoint, e);
    for v in &zsq {
        file.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    let ev = ZetaEvaluator::new(cfg.eval, cfg.t_max)?;
    let meta_path = persist::sidecar_path(&paths.checkpoint);
    while zsq.len() < stop {
        let lo = zsq.len();
        let hi = (lo + cfg.checkpoint_every).min(stop);
        let (chunk, bound) = with_workers(cfg.workers, || evaluate_range(&ev, &layout, lo..hi))??;
        for v in &chunk {
            file.write_all(&v.to_le_bytes()).map_err(io)?;
        }
        file.flush().map_err(io)?;
        zsq.extend(chunk);
        accuracy = accuracy.max(bound);
        persist::write_json(
            &meta_path,
            &Checkpoint {
                key: key.clone(),
                points_done: zsq.len(),
                accuracy,
            },
        )?;
        info!("zeta grid: {}/{n} points", zsq.len());
    }
    drop(file);
    if zsq.len() < n {
        return Ok(GridProgress {
            path: paths.checkpoint,
            points_done: zsq.len(),
            points_total: n,
            resumed_from,
            already_complete: false,
        });
    }
    let policy = StepPolicy {
        c_step: cfg.c_step,
        max_step: MAX_STEP,
    };
    let z = ZetaGrid::from_parts(layout, zsq, policy, accuracy, cfg.eval)?;
    persist::save_zeta_grid(&paths.zeta_grid, &z, BTreeMap::new())?;
    let _ = fs::remove_file(&paths.checkpoint);
    let _ = fs::remove_file(&meta_path);
    info!("wrote {}", paths.zeta_grid.display());
    Ok(GridProgress {
        path: paths.zeta_grid,
        points_done: n,
        points_total: n,
        resumed_from,
        already_complete: false,
    })
}

pub fn cmd_error_terms(cfg: &RunConfig, csv: bool) -> Result<PathBuf> {
    cfg.validate()?;
    let paths = cfg.paths();
    let (table, tcar) = persist::load_divisor_table(&paths.divisor_table)?;
    let (z, zcar) = persist::load_zeta_grid(&paths.zeta_grid)?;
    let inputs = BTreeMap::from([
        ("divisor_table".to_string(), tcar.sha256),
        ("zeta_grid".to_string(), zcar.sha256),
    ]);
    let up_to_date = current(&paths.error_terms).is_some_and(|car| {
        car.inputs == inputs
            && car.meta.get("quadrature_tol").and_then(|v| v.as_f64()) == Some(cfg.quadrature_tol)
    });
    let grid = if up_to_date {
        info!("error terms up to date");
        None
    } else {
        let g = with_workers(cfg.workers, || compute_all(&z, &table, cfg.quadrature_tol))??;
        persist::save_error_terms(&paths.error_terms, &g, inputs)?;
        info!(
            "wrote {} (relative quadrature error estimate {:.2e})",
            paths.error_terms.display(),
            g.quad_error_estimate()
        );
        Some(g)
    };
    if csv {
        let g = match grid {
            Some(g) => g,
            None => persist::load_error_terms(&paths.error_terms)?.0,
        };
        let f = fs::File::create(&paths.error_terms_csv).map_err(|e| Error::io(&paths.error_terms_csv, e))?;
        persist::write_error_grid_csv(&g, BufWriter::new(f), 1)?;
        info!("wrote {}", paths.error_terms_csv.display());
    }
    Ok(paths.error_terms)
}

/// Inputs loaded for moments and verification, with the error-term grid's
/// recorded input digests checked against the files on disk.
pub struct LoadedInputs {
    pub table: Option<DivisorTable>,
    pub zgrid: Option<ZetaGrid>,
    pub grid: Option<ErrorTermGrid>,
    pub digests: BTreeMap<String, String>,
}

impl LoadedInputs {
    pub fn suite_inputs(&self) -> SuiteInputs<'_> {
        SuiteInputs {
            table: self.table.as_ref(),
            zgrid: self.zgrid.as_ref(),
            grid: self.grid.as_ref(),
            digests: Some(&self.digests),
        }
    }
}

/// Loads whichever inputs exist. Corrupt files and digest mismatches are
/// errors; absent files are not.
pub fn load_inputs(paths: &Paths) -> Result<LoadedInputs> {
    let mut digests = BTreeMap::new();
    let table = if paths.divisor_table.exists() {
        let (t, car) = persist::load_divisor_table(&paths.divisor_table)?;
        digests.insert("divisor_table".to_string(), car.sha256);
        Some(t)
    } else {
        None
    };
    let zgrid = if paths.zeta_grid.exists() {
        let (z, car) = persist::load_zeta_grid(&paths.zeta_grid)?;
        digests.insert("zeta_grid".to_string(), car.sha256);
        Some(z)
    } else {
        None
    };
    let grid = if paths.error_terms.exists() {
        let (g, car) = persist::load_error_terms(&paths.error_terms)?;
        for (name, recorded) in &car.inputs {
            let actual = digests.get(name).cloned().unwrap_or_else(|| "missing".into());
            if &actual != recorded {
                return Err(Error::Provenance {
                    path: paths.error_terms.clone(),
                    expected: format!("{name}={recorded}"),
                    actual: format!("{name}={actual}"),
                });
            }
        }
        digests.insert("error_terms".to_string(), car.sha256);
        Some(g)
    } else {
        None
    };
    Ok(LoadedInputs {
        table,
        zgrid,
        grid,
        digests,
    })
}

pub fn cmd_moments(cfg: &RunConfig) -> Result<PathBuf> {
    cfg.validate()?;
    let paths = cfg.paths();
    let inputs = load_inputs(&paths)?;
    let (Some(z), Some(g)) = (&inputs.zgrid, &inputs.grid) else {
        return Err(Error::io(
            &paths.error_terms,
            std::io::Error::new(std::io::ErrorKind::NotFound, "run `grid` and `error-terms` first"),
        ));
    };
    let res = with_workers(cfg.workers, || run_moment_scan(&cfg.scan, z, g, inputs.table.as_ref()))??;
    let f = fs::File::create(&paths.moments).map_err(|e| Error::io(&paths.moments, e))?;
    res.write_csv(BufWriter::new(f))?;
    persist::write_json(
        &persist::sidecar_path(&paths.moments),
        &Sidecar {
            kind: "moment_scan".into(),
            format_version: persist::FORMAT_VERSION,
            sha256: persist::file_sha256(&paths.moments)?,
            inputs: inputs.digests.clone(),
            meta: serde_json::json!({ "config_digest": res.config_digest, "scan": cfg.scan }),
            generator: format!("zlab {}", env!("CARGO_PKG_VERSION")),
        },
    )?;
    info!("wrote {} ({} rows)", paths.moments.display(), res.rows.len());
    Ok(paths.moments)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let paths = cfg.paths();
    ensure_dir(&paths.dir)?;
    let inputs = load_inputs(&paths)?;
    let report = with_workers(cfg.workers, || run_suite(&cfg.suite, inputs.suite_inputs(), &cfg.verify))??;
    let io = |p: &Path, e| Error::io(p, e);
    fs::write(&paths.report_csv, report.to_csv_string()).map_err(|e| io(&paths.report_csv, e))?;
    fs::write(&paths.report_json, report.to_json_string()).map_err(|e| io(&paths.report_json, e))?;
    info!("wrote {} and {}", paths.report_csv.display(), paths.report_json.display());
    Ok(report)
}

pub fn cmd_export_plot(cfg: &RunConfig, stride: usize) -> Result<PathBuf> {
    let paths = cfg.paths();
    let (g, _) = persist::load_error_terms(&paths.error_terms)?;
    let f = fs::File::create(&paths.plot).map_err(|e| Error::io(&paths.plot, e))?;
    persist::write_plot_csv(&g, BufWriter::new(f), stride)?;
    info!("wrote {}", paths.plot.display());
    Ok(paths.plot)
}

/// sieve, grid, error-terms, moments and verify in sequence.
pub fn run_all(cfg: &RunConfig) -> Result<VerificationReport> {
    cmd_sieve(cfg)?;
    cmd_grid(cfg)?;
    cmd_error_terms(cfg, false)?;
    cmd_moments(cfg)?;
    cmd_verify(cfg)
}
