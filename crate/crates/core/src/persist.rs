//! The "ZLB1" columnar file format, JSON sidecars and CSV exports.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "ZLB1" | u32 version | u64 section count
//! per section: u64 name length | name (UTF-8) | u8 dtype | u64 element count | raw elements
//! ```
//!
//! dtype 1 = f64, 2 = u64, 3 = i64, 4 = u16. Every file `x.zlb` has a sidecar
//! `x.zlb.json` holding its sha256, the digests of the files it was computed
//! from, and kind-specific metadata.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::divisor::DivisorTable;
use crate::error::{Error, Result};
use crate::error_terms::ErrorTermGrid;
use crate::moments::hex;
use crate::quad::GridLayout;
use crate::zeta::{EvalConfig, StepPolicy, ZetaGrid};

pub const MAGIC: &[u8; 4] = b"ZLB1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    F64(Vec<f64>),
    U64(Vec<u64>),
    I64(Vec<i64>),
    U16(Vec<u16>),
}

/// A borrowed column for writing without copying.
#[derive(Debug, Clone, Copy)]
pub enum ColumnRef<'a> {
    F64(&'a [f64]),
    U64(&'a [u64]),
    I64(&'a [i64]),
    U16(&'a [u16]),
}

struct HashingWriter<W: Write> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.inner.flush()
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".tmp");
    PathBuf::from(s)
}

/// Writes `sections` to `path` (through a temporary file and a rename) and
/// returns the sha256 of the bytes written.
pub fn write_sections(path: &Path, sections: &[(&str, ColumnRef<'_>)]) -> Result<String> {
    let tmp = tmp_path(path);
    let io = |e| Error::io(path, e);
    let file = fs::File::create(&tmp).map_err(io)?;
    let mut w = HashingWriter {
        inner: BufWriter::with_capacity(1 << 20, file),
        hasher: Sha256::new(),
    };
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(io);
    put(MAGIC)?;
    put(&FORMAT_VERSION.to_le_bytes())?;
    put(&(sections.len() as u64).to_le_bytes())?;
    for (name, col) in sections {
        put(&(name.len() as u64).to_le_bytes())?;
        put(name.as_bytes())?;
        macro_rules! body {
            ($tag:expr, $v:expr) => {{
                put(&[$tag])?;
                put(&($v.len() as u64).to_le_bytes())?;
                for x in $v.iter() {
                    put(&x.to_le_bytes())?;
                }
            }};
        }
        match col {
            ColumnRef::F64(v) => body!(1u8, v),
            ColumnRef::U64(v) => body!(2u8, v),
            ColumnRef::I64(v) => body!(3u8, v),
            ColumnRef::U16(v) => body!(4u8, v),
        }
    }
    let HashingWriter { mut inner, hasher } = w;
    inner.flush().map_err(io)?;
    drop(inner);
    let digest = hex(&hasher.finalize());
    fs::rename(&tmp, path).map_err(io)?;
    Ok(digest)
}

/// Parses a ZLB1 byte buffer into its sections, in file order.
pub fn parse_sections(path: &Path, bytes: &[u8]) -> Result<Vec<(String, Column)>> {
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8]> {
        let end = pos
            .checked_add(n)
            .filter(|&e| e <= bytes.len())
            .ok_or_else(|| bad(format!("truncated at byte {pos}")))?;
        let s = &bytes[pos..end];
        pos = end;
        Ok(s)
    };
    if take(4)? != MAGIC {
        return Err(bad("missing ZLB1 magic".into()));
    }
    let version = u32::from_le_bytes(take(4)?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let u64_at = |s: &[u8]| u64::from_le_bytes(s.try_into().unwrap());
    let count = u64_at(take(8)?);
    let mut out = Vec::new();
    for _ in 0..count {
        let nlen = u64_at(take(8)?) as usize;
        let name = std::str::from_utf8(take(nlen)?)
            .map_err(|_| bad("section name is not UTF-8".into()))?
            .to_string();
        let tag = take(1)?[0];
        let n = u64_at(take(8)?) as usize;
        macro_rules! read {
            ($ty:ty, $variant:ident) => {{
                const W: usize = std::mem::size_of::<$ty>();
                let raw = take(n.checked_mul(W).ok_or_else(|| bad("section too large".into()))?)?;
                Column::$variant(raw.chunks_exact(W).map(|c| <$ty>::from_le_bytes(c.try_into().unwrap())).collect())
            }};
        }
        let col = match tag {
            1 => read!(f64, F64),
            2 => read!(u64, U64),
            3 => read!(i64, I64),
            4 => read!(u16, U16),
            t => return Err(bad(format!("unknown dtype {t} in section {name}"))),
        };
        out.push((name, col));
    }
    if pos != bytes.len() {
        return Err(bad(format!("{} trailing bytes", bytes.len() - pos)));
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
}

/// Metadata stored next to every persisted file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    pub kind: String,
    pub format_version: u32,
    pub sha256: String,
    /// Digests of the files this one was computed from.
    pub inputs: BTreeMap<String, String>,
    pub meta: serde_json::Value,
    pub generator: String,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    let tmp = tmp_path(path);
    fs::write(&tmp, s).map_err(|e| Error::io(path, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    let p = sidecar_path(path);
    let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        path: p,
        reason: e.to_string(),
    })
}

fn save(
    path: &Path,
    kind: &str,
    sections: &[(&str, ColumnRef<'_>)],
    inputs: BTreeMap<String, String>,
    meta: serde_json::Value,
) -> Result<Sidecar> {
    let sha256 = write_sections(path, sections)?;
    let car = Sidecar {
        kind: kind.into(),
        format_version: FORMAT_VERSION,
        sha256,
        inputs,
        meta,
        generator: format!("zlab {}", env!("CARGO_PKG_VERSION")),
    };
    write_json(&sidecar_path(path), &car)?;
    Ok(car)
}

/// Reads a file, checks it against its sidecar and returns its sections.
fn load(path: &Path, kind: &str) -> Result<(BTreeMap<String, Column>, Sidecar)> {
    let car = read_sidecar(path)?;
    if car.kind != kind {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("sidecar kind is {:?}, expected {kind:?}", car.kind),
        });
    }
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let actual = sha256_hex(&bytes);
    if actual != car.sha256 {
        return Err(Error::Provenance {
            path: path.to_path_buf(),
            expected: car.sha256,
            actual,
        });
    }
    let sections = parse_sections(path, &bytes)?.into_iter().collect();
    Ok((sections, car))
}

struct Sections<'a> {
    path: &'a Path,
    map: BTreeMap<String, Column>,
}

impl Sections<'_> {
    fn missing(&self, name: &str, want: &str) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            reason: format!("section {name:?} missing or not {want}"),
        }
    }

    fn f64(&mut self, name: &str) -> Result<Vec<f64>> {
        match self.map.remove(name) {
            Some(Column::F64(v)) => Ok(v),
            _ => Err(self.missing(name, "f64")),
        }
    }

    fn f64_opt(&mut self, name: &str) -> Result<Option<Vec<f64>>> {
        if self.map.contains_key(name) {
            self.f64(name).map(Some)
        } else {
            Ok(None)
        }
    }

    fn u64(&mut self, name: &str) -> Result<Vec<u64>> {
        match self.map.remove(name) {
            Some(Column::U64(v)) => Ok(v),
            _ => Err(self.missing(name, "u64")),
        }
    }

    fn i64(&mut self, name: &str) -> Result<Vec<i64>> {
        match self.map.remove(name) {
            Some(Column::I64(v)) => Ok(v),
            _ => Err(self.missing(name, "i64")),
        }
    }

    fn u16(&mut self, name: &str) -> Result<Vec<u16>> {
        match self.map.remove(name) {
            Some(Column::U16(v)) => Ok(v),
            _ => Err(self.missing(name, "u16")),
        }
    }

    fn layout(&mut self, c_step: f64) -> Result<GridLayout> {
        let t = self.f64("t")?;
        let starts = self.u64("seg_start")?.into_iter().map(|v| v as usize).collect();
        let jumps = self.u64("seg_jump")?;
        GridLayout::from_parts(t, starts, jumps, c_step)
    }
}

fn meta_field<T: for<'de> Deserialize<'de>>(path: &Path, car: &Sidecar, name: &str) -> Result<T> {
    car.meta
        .get(name)
        .cloned()
        .ok_or_else(|| Error::Format {
            path: sidecar_path(path),
            reason: format!("meta.{name} missing"),
        })
        .and_then(|v| {
            serde_json::from_value(v).map_err(|e| Error::Format {
                path: sidecar_path(path),
                reason: format!("meta.{name}: {e}"),
            })
        })
}

pub const KIND_DIVISOR: &str = "divisor_table";
pub const KIND_ZETA: &str = "zeta_grid";
pub const KIND_ERROR_TERMS: &str = "error_terms";

pub fn save_divisor_table(path: &Path, table: &DivisorTable) -> Result<Sidecar> {
    save(
        path,
        KIND_DIVISOR,
        &[
            ("counts", ColumnRef::U16(table.counts())),
            ("prefix", ColumnRef::U64(table.prefix())),
            ("alt_prefix", ColumnRef::I64(table.alt_prefix())),
        ],
        BTreeMap::new(),
        serde_json::json!({ "limit": table.limit() }),
    )
}

pub fn load_divisor_table(path: &Path) -> Result<(DivisorTable, Sidecar)> {
    let (map, car) = load(path, KIND_DIVISOR)?;
    let mut s = Sections { path, map };
    let table = DivisorTable::from_parts(s.u16("counts")?, s.u64("prefix")?, s.i64("alt_prefix")?)?;
    Ok((table, car))
}

pub fn save_zeta_grid(path: &Path, z: &ZetaGrid, inputs: BTreeMap<String, String>) -> Result<Sidecar> {
    let layout = z.layout();
    let starts: Vec<u64> = layout.segment_starts().iter().map(|&v| v as u64).collect();
    save(
        path,
        KIND_ZETA,
        &[
            ("t", ColumnRef::F64(layout.t())),
            ("seg_start", ColumnRef::U64(&starts)),
            ("seg_jump", ColumnRef::U64(layout.segment_jumps())),
            ("zsq", ColumnRef::F64(z.zsq_values())),
        ],
        inputs,
        serde_json::json!({
            "t_max": layout.t_max(),
            "points": layout.len(),
            "c_step": layout.c_step(),
            "step_policy": z.step_policy(),
            "step_rule": z.step_policy().describe(),
            "accuracy": z.accuracy(),
            "eval": z.eval_config(),
        }),
    )
}

pub fn load_zeta_grid(path: &Path) -> Result<(ZetaGrid, Sidecar)> {
    let (map, car) = load(path, KIND_ZETA)?;
    let c_step: f64 = meta_field(path, &car, "c_step")?;
    let policy: StepPolicy = meta_field(path, &car, "step_policy")?;
    let accuracy: f64 = meta_field(path, &car, "accuracy")?;
    let eval: EvalConfig = meta_field(path, &car, "eval")?;
    let mut s = Sections { path, map };
    let layout = s.layout(c_step)?;
    let z = ZetaGrid::from_parts(layout, s.f64("zsq")?, policy, accuracy, eval)?;
    Ok((z, car))
}

pub fn save_error_terms(path: &Path, g: &ErrorTermGrid, inputs: BTreeMap<String, String>) -> Result<Sidecar> {
    let layout = g.layout();
    let starts: Vec<u64> = layout.segment_starts().iter().map(|&v| v as u64).collect();
    let mut sections = vec![
        ("t", ColumnRef::F64(layout.t())),
        ("seg_start", ColumnRef::U64(&starts)),
        ("seg_jump", ColumnRef::U64(layout.segment_jumps())),
        ("E", ColumnRef::F64(g.e())),
    ];
    let optional = [
        ("Estar", g.estar()),
        ("Estar_left", g.estar_left()),
        ("R", g.r()),
        ("E1", g.e1()),
    ];
    for (name, v) in optional {
        if let Some(v) = v {
            sections.push((name, ColumnRef::F64(v)));
        }
    }
    save(
        path,
        KIND_ERROR_TERMS,
        &sections,
        inputs,
        serde_json::json!({
            "t_max": layout.t_max(),
            "points": layout.len(),
            "c_step": layout.c_step(),
            "quadrature_tol": g.quadrature_tol(),
            "quad_error_estimate": g.quad_error_estimate(),
        }),
    )
}

pub fn load_error_terms(path: &Path) -> Result<(ErrorTermGrid, Sidecar)> {
    let (map, car) = load(path, KIND_ERROR_TERMS)?;
    let c_step: f64 = meta_field(path, &car, "c_step")?;
    let tol: f64 = meta_field(path, &car, "quadrature_tol")?;
    let err: f64 = meta_field(path, &car, "quad_error_estimate")?;
    let mut s = Sections { path, map };
    let layout = s.layout(c_step)?;
    let g = ErrorTermGrid::from_parts(
        layout,
        s.f64("E")?,
        s.f64_opt("Estar")?,
        s.f64_opt("Estar_left")?,
        s.f64_opt("R")?,
        s.f64_opt("E1")?,
        tol,
        err,
    )?;
    Ok((g, car))
}

/// CSV of every `stride`-th node with the given columns; missing fields are
/// left empty.
fn write_grid_csv<W: Write>(g: &ErrorTermGrid, w: W, stride: usize, with_e1: bool) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["t", "E", "Estar", "R"];
    if with_e1 {
        header.push("E1");
    }
    out.write_record(&header)?;
    let cell = |v: Option<&[f64]>, i: usize| v.map_or(String::new(), |v| v[i].to_string());
    let t = g.t_values();
    let mut i = 0;
    while i < t.len() {
        let mut rec = vec![t[i].to_string(), g.e()[i].to_string(), cell(g.estar(), i), cell(g.r(), i)];
        if with_e1 {
            rec.push(cell(g.e1(), i));
        }
        out.write_record(&rec)?;
        i += stride.max(1);
    }
    out.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Columns `t,E,Estar,R,E1`.
pub fn write_error_grid_csv<W: Write>(g: &ErrorTermGrid, w: W, stride: usize) -> Result<()> {
    write_grid_csv(g, w, stride, true)
}

/// Plot-ready columns `t,E,Estar,R`.
pub fn write_plot_csv<W: Write>(g: &ErrorTermGrid, w: W, stride: usize) -> Result<()> {
    write_grid_csv(g, w, stride, false)
}
