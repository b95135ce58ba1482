//! Run orchestration shared by the binary and the tests.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cache::{sha256_hex, Cache};
use crate::config::{self, Config, ConfigErrors};
use crate::exec::Workers;
use crate::report::{write_outputs, RunMeta, RunReport, TaskRecord};
use crate::setup::Experiment;
use crate::tasks::{run_task, Context};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_CHECKS: i32 = 3;

#[derive(Debug)]
pub enum RunError {
    Validation(ConfigErrors),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Validation(e) => write!(f, "{e}"),
            RunError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation(_) => EXIT_VALIDATION,
            RunError::Io(_) => EXIT_RUNTIME,
        }
    }
}

pub struct RunOutcome {
    pub report: RunReport,
    pub meta: RunMeta,
    pub records: Vec<TaskRecord>,
    pub out_dir: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.failed() {
            EXIT_RUNTIME
        } else if self.report.check_failures() > 0 {
            EXIT_CHECKS
        } else {
            EXIT_OK
        }
    }
}

pub fn config_hash(cfg: &Config) -> String {
    sha256_hex(serde_json::to_string(&cfg.canonical()).expect("json").as_bytes())
}

pub fn load(path: &Path) -> Result<Config, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
    config::parse(&text).map_err(RunError::Validation)
}

/// Builds and runs one configuration, writing outputs to `out_dir` (or the
/// configured directory).
pub fn execute(cfg: &Config, out_dir: Option<&Path>, exec: &Workers, cache: &Cache) -> Result<RunOutcome, RunError> {
    let started = Instant::now();
    let ex = Experiment::build(cfg).map_err(RunError::Validation)?;
    let record = run_task(&ex, &Context { exec, cache });
    let records = vec![record];
    let report = RunReport::from_records(config_hash(cfg), cfg.seed, &records);
    let meta = RunMeta {
        wall_time_s: started.elapsed().as_secs_f64(),
        workers: exec.count(),
        cache_enabled: cache.enabled(),
        cache: cache.stats(),
        warnings: cache.take_warnings(),
    };
    let out_dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.output.directory));
    write_outputs(&out_dir, &report, &meta, &records).map_err(|e| RunError::Io(format!("{}: {e}", out_dir.display())))?;
    Ok(RunOutcome { report, meta, records, out_dir })
}
