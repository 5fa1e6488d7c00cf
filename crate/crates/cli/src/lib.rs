//! Experiment runner: configs in, line-delimited reports out.

pub mod config;
pub mod families;
pub mod output;
pub mod recheck;
pub mod suite;

use std::path::{Path, PathBuf};

use produal::DualityReport;

pub use config::{ExperimentConfig, Family};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "PRODUAL_THREADS";

pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURES: i32 = 1;
    pub const PARSE: i32 = 2;
    pub const CONSTRUCTION: i32 = 3;
}

/// `name → topic` lines followed by the schema of each family.
pub fn list_families() -> String {
    Family::ALL.iter().map(|f| format!("{} → {}\n    {}\n", f.name(), f.topic(), f.schema())).collect()
}

#[derive(Debug)]
pub enum RunError {
    Io(PathBuf, std::io::Error),
    Parse(config::ConfigError),
    Construction(produal::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io(..) | RunError::Parse(_) => exit::PARSE,
            RunError::Construction(_) => exit::CONSTRUCTION,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            RunError::Parse(e) => write!(f, "config error: {e}"),
            RunError::Construction(e) => write!(f, "instance construction failed: {e}"),
        }
    }
}

impl std::error::Error for RunError {}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, RunError> {
    let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(path.to_path_buf(), e))?;
    ExperimentConfig::parse(&text).map_err(RunError::Parse)
}

/// Runs a config and applies the standalone recheck to the result; records
/// whose witnesses do not re-verify are marked failed.
pub fn run_config(cfg: &ExperimentConfig, timings: bool) -> Result<DualityReport, RunError> {
    let mut report = families::run(cfg, timings).map_err(RunError::Construction)?;
    for r in &mut report.records {
        let single = DualityReport::new(vec![r.clone()]);
        if !recheck::recheck_report(&single).ok() {
            r.failed = true;
        }
    }
    Ok(report)
}
