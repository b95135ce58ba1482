//! Run records and the files written for them.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use naifs_pressure::pressure::Direction;
use naifs_pressure::Mode;
use serde::{Deserialize, Serialize};

use crate::cache::CacheStats;
use crate::tables::Table;

/// Serializes non-finite floats as strings so that records survive JSON.
pub mod lossless {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str(&format!("{v:?}"))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    #[serde(with = "lossless")]
    pub lo: f64,
    #[serde(with = "lossless")]
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    #[serde(with = "lossless")]
    pub value: f64,
    pub direction: Direction,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Bracket>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub diagnostics: serde_json::Value,
}

impl Estimate {
    pub fn new(name: impl Into<String>, value: f64, direction: Direction, mode: Mode) -> Self {
        Estimate { name: name.into(), value, direction, mode, bracket: None, diagnostics: serde_json::Value::Null }
    }

    pub fn with_bracket(mut self, (lo, hi): (f64, f64)) -> Self {
        self.bracket = Some(Bracket { lo, hi });
        self
    }

    pub fn with_diagnostics(mut self, d: serde_json::Value) -> Self {
        self.diagnostics = d;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// Not applicable to this system.
    Skipped,
    /// Reported without a pass/fail verdict.
    Info,
    /// The check could not run.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub module: String,
    pub property: String,
    pub status: CheckStatus,
    pub detail: String,
}

impl CheckOutcome {
    pub fn verdict(module: &str, property: &str, ok: bool, detail: impl Into<String>) -> Self {
        let status = if ok { CheckStatus::Pass } else { CheckStatus::Fail };
        CheckOutcome { module: module.into(), property: property.into(), status, detail: detail.into() }
    }

    pub fn with_status(module: &str, property: &str, status: CheckStatus, detail: impl Into<String>) -> Self {
        CheckOutcome { module: module.into(), property: property.into(), status, detail: detail.into() }
    }

    pub fn failed(&self) -> bool {
        matches!(self.status, CheckStatus::Fail | CheckStatus::Error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    Failed,
}

/// Result of one task, as cached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task: String,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub mode: Mode,
    pub estimates: Vec<Estimate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<CheckOutcome>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tables: Vec<Table>,
}

impl TaskRecord {
    pub fn new(task: &str) -> Self {
        TaskRecord {
            task: task.into(),
            status: RecordStatus::Ok,
            error: None,
            mode: Mode::Exact,
            estimates: Vec::new(),
            checks: Vec::new(),
            tables: Vec::new(),
        }
    }

    pub fn failed(task: &str, error: String) -> Self {
        TaskRecord { status: RecordStatus::Failed, error: Some(error), ..TaskRecord::new(task) }
    }

    pub fn push(&mut self, e: Estimate) {
        self.mode = self.mode.and(e.mode);
        self.estimates.push(e);
    }

    pub fn check_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.failed()).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRef {
    pub name: String,
    pub file: String,
    pub rows: usize,
}

/// One task result as it appears in the report; tables live in their own files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordView {
    pub task: String,
    pub status: RecordStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub mode: Mode,
    pub estimates: Vec<Estimate>,
    pub tables: Vec<TableRef>,
}

/// Everything deterministic about a run. Wall time and cache statistics are
/// kept in [`RunMeta`] so that identical configurations give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub records: Vec<RecordView>,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub wall_time_s: f64,
    pub workers: usize,
    pub cache_enabled: bool,
    pub cache: CacheStats,
    pub warnings: Vec<String>,
}

impl RunReport {
    pub fn from_records(config_hash: String, seed: u64, records: &[TaskRecord]) -> RunReport {
        RunReport {
            tool_version: crate::cache::VERSION.to_string(),
            config_hash,
            seed,
            records: records
                .iter()
                .map(|r| RecordView {
                    task: r.task.clone(),
                    status: r.status,
                    error: r.error.clone(),
                    mode: r.mode,
                    estimates: r.estimates.clone(),
                    tables: r.tables.iter().map(|t| TableRef { name: t.name.clone(), file: t.file_name(), rows: t.rows.len() }).collect(),
                })
                .collect(),
            checks: records.iter().flat_map(|r| r.checks.iter().cloned()).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn failed(&self) -> bool {
        self.records.iter().any(|r| r.status == RecordStatus::Failed)
    }

    pub fn check_failures(&self) -> usize {
        self.checks.iter().filter(|c| c.failed()).count()
    }

    pub fn summary(&self, meta: Option<&RunMeta>) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "naifs-pressure {}  config {}", self.tool_version, &self.config_hash[..16.min(self.config_hash.len())]);
        for r in &self.records {
            let _ = writeln!(s, "task {}: {:?} ({:?})", r.task, r.status, r.mode);
            if let Some(e) = &r.error {
                let _ = writeln!(s, "  error: {e}");
            }
            for e in &r.estimates {
                let b = e.bracket.as_ref().map(|b| format!(" in [{:.6}, {:.6}]", b.lo, b.hi)).unwrap_or_default();
                let _ = writeln!(s, "  {:<28} {:>12.6}{b}  {:?}, {:?}", e.name, e.value, e.direction, e.mode);
            }
            for t in &r.tables {
                let _ = writeln!(s, "  table {} ({} rows)", t.file, t.rows);
            }
        }
        if !self.checks.is_empty() {
            let pass = self.checks.iter().filter(|c| c.status == CheckStatus::Pass).count();
            let _ = writeln!(s, "checks: {pass} pass, {} fail, {} total", self.check_failures(), self.checks.len());
            for c in &self.checks {
                let _ = writeln!(s, "  [{:?}] {}/{}: {}", c.status, c.module, c.property, c.detail);
            }
        }
        if let Some(m) = meta {
            let _ = writeln!(
                s,
                "wall time {:.3} s, {} workers, cache hits {} misses {}",
                m.wall_time_s, m.workers, m.cache.hits, m.cache.misses
            );
        }
        s
    }
}

/// Writes `report.json`, `run_meta.json`, one file per table and `summary.txt`.
pub fn write_outputs(dir: &Path, report: &RunReport, meta: &RunMeta, records: &[TaskRecord]) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("report.json"), report.to_json())?;
    fs::write(dir.join("run_meta.json"), serde_json::to_string_pretty(meta).expect("meta serializes") + "\n")?;
    for r in records {
        for t in &r.tables {
            fs::write(dir.join(t.file_name()), t.to_text())?;
        }
    }
    fs::write(dir.join("summary.txt"), report.summary(Some(meta)))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<RunReport, String> {
    let path = if path.is_dir() { path.join("report.json") } else { path.to_path_buf() };
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_estimates_survive_json() {
        let mut r = TaskRecord::new("t");
        r.push(Estimate::new("a", f64::INFINITY, Direction::UpperBound, Mode::Exact).with_bracket((1.0, f64::NAN)));
        let v = serde_json::to_value(&r).unwrap();
        let back: TaskRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back.estimates[0].value, f64::INFINITY);
        assert!(back.estimates[0].bracket.as_ref().unwrap().hi.is_nan());
    }

    #[test]
    fn lower_bound_estimates_mark_the_record() {
        let mut r = TaskRecord::new("t");
        r.push(Estimate::new("a", 1.0, Direction::TwoSided, Mode::Exact));
        assert_eq!(r.mode, Mode::Exact);
        r.push(Estimate::new("b", 1.0, Direction::TwoSided, Mode::LowerBound));
        assert_eq!(r.mode, Mode::LowerBound);
    }
}
