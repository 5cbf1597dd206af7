use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    ReportOnly,
    Skipped,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ReportOnly => "REPORT_ONLY",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(with = "nan_as_null")]
    pub measured: f64,
    #[serde(with = "nan_as_null")]
    pub target: f64,
    #[serde(with = "nan_as_null")]
    pub tolerance: f64,
    pub status: Status,
    /// Parameters actually used, or the reason a row was skipped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    /// `name=sha256` of every input file the row was computed from.
    #[serde(default)]
    pub inputs: Vec<String>,
}

impl Check {
    /// A row with pass/fail semantics: PASS iff |measured − target| ≤ tolerance.
    pub fn judged(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        let pass = (measured - target).abs() <= tolerance;
        Self {
            name: name.into(),
            measured,
            target,
            tolerance,
            status: if pass { Status::Pass } else { Status::Fail },
            note: None,
            inputs: Vec::new(),
        }
    }

    pub fn report(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Self {
            status: Status::ReportOnly,
            ..Self::judged(name, measured, target, tolerance)
        }
    }

    pub fn skipped(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            measured: f64::NAN,
            target: f64::NAN,
            tolerance: f64::NAN,
            status: Status::Skipped,
            note: Some(reason.into()),
            inputs: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub checks: Vec<Check>,
    /// Input digests and configuration.
    pub provenance: BTreeMap<String, String>,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x == 0.0 || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl VerificationReport {
    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    /// 0 iff nothing failed and at least one row was evaluated.
    pub fn exit_code(&self) -> i32 {
        let all_skipped = self.checks.iter().all(|c| c.status == Status::Skipped);
        if self.failures().next().is_some() || all_skipped {
            1
        } else {
            0
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["name", "measured", "target", "tolerance", "status"])?;
        for c in &self.checks {
            out.write_record([
                c.name.clone(),
                fmt_num(c.measured),
                fmt_num(c.target),
                fmt_num(c.tolerance),
                c.status.as_str().to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
