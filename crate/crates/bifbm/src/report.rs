//! Structured experiment reports: named check records with references and
//! tolerances, emitted as JSON or CSV with byte-stable output.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{BifbmError, Result};
use crate::io::split_csv_line;

/// Marker used in place of a reference anchor for infrastructure checks.
pub const PLUMBING: &str = "plumbing";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    ReportOnly,
}

impl CheckStatus {
    fn as_str(&self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::ReportOnly => "report-only",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "pass" => Some(CheckStatus::Pass),
            "fail" => Some(CheckStatus::Fail),
            "report-only" => Some(CheckStatus::ReportOnly),
            _ => None,
        }
    }
}

/// One named check. Status is a pure function of (measured, reference,
/// tolerance) for asserted checks; report-only records carry numbers
/// without a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// Source of the reference value, or [`PLUMBING`].
    pub anchor: String,
    pub measured: f64,
    pub reference: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
}

impl CheckRecord {
    pub fn checked(
        name: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        reference: f64,
        tolerance: f64,
    ) -> Self {
        let status = if (measured - reference).abs() <= tolerance {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            reference,
            tolerance,
            status,
        }
    }

    pub fn report_only(
        name: impl Into<String>,
        anchor: impl Into<String>,
        measured: f64,
        reference: f64,
    ) -> Self {
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            reference,
            // tolerance is not applicable; zero keeps the record JSON-safe
            tolerance: 0.0,
            status: CheckStatus::ReportOnly,
        }
    }
}

/// Report of one experiment run. Serialized field order is the declaration
/// order, so re-emission of an identical report is byte-identical; the
/// wall-clock measurement is deliberately kept out of the serialized form
/// (see [`ExperimentReport::write_timing_sidecar`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub command: String,
    pub seed: u64,
    /// Effective configuration after merging file and flag inputs.
    pub config: serde_json::Value,
    pub records: Vec<CheckRecord>,
    pub artifacts: Vec<String>,
    #[serde(skip)]
    pub wall_clock_secs: f64,
}

impl ExperimentReport {
    pub fn new(command: impl Into<String>, seed: u64, config: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            seed,
            config,
            records: Vec::new(),
            artifacts: Vec::new(),
            wall_clock_secs: 0.0,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.status != CheckStatus::Fail)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| BifbmError::Config(format!("bad report JSON: {e}")))
    }

    /// Records table as CSV: `name, anchor, measured, reference, tolerance,
    /// status`, values in round-trip precision.
    pub fn records_to_csv(&self) -> String {
        let mut buf = String::from("name,anchor,measured,reference,tolerance,status\n");
        for r in &self.records {
            buf.push_str(&format!(
                "{},{},{:?},{:?},{:?},{}\n",
                r.name,
                r.anchor,
                r.measured,
                r.reference,
                r.tolerance,
                r.status.as_str()
            ));
        }
        buf
    }

    pub fn records_from_csv(text: &str) -> Result<Vec<CheckRecord>> {
        let bad = |msg: String| BifbmError::Config(msg);
        let mut records = Vec::new();
        for (ln, line) in text.lines().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let f = split_csv_line(line);
            if f.len() != 6 {
                return Err(bad(format!("record line {}: expected 6 fields", ln + 1)));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|e| bad(format!("record line {}: {e}", ln + 1)))
            };
            records.push(CheckRecord {
                name: f[0].clone(),
                anchor: f[1].clone(),
                measured: num(&f[2])?,
                reference: num(&f[3])?,
                tolerance: num(&f[4])?,
                status: CheckStatus::parse(&f[5])
                    .ok_or_else(|| bad(format!("record line {}: bad status", ln + 1)))?,
            });
        }
        Ok(records)
    }

    pub fn write_json(&self, out: &Path) -> Result<()> {
        std::fs::write(out, self.to_json()).map_err(|e| BifbmError::Io {
            path: out.display().to_string(),
            source: e,
        })
    }

    pub fn write_records_csv(&self, out: &Path) -> Result<()> {
        std::fs::write(out, self.records_to_csv()).map_err(|e| BifbmError::Io {
            path: out.display().to_string(),
            source: e,
        })
    }

    /// Timing lives next to the report, never inside it, so the report
    /// bytes depend only on seed and configuration.
    pub fn write_timing_sidecar(&self, out: &Path) -> Result<()> {
        std::fs::write(out, format!("{:.3}\n", self.wall_clock_secs)).map_err(|e| {
            BifbmError::Io {
                path: out.display().to_string(),
                source: e,
            }
        })
    }
}
