//! Running many scenario files, concurrently, into one output tree.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output::{write_atomic, write_run};
use crate::scenario::parse_and_validate;
use crate::sim::run_episode;

pub const SUMMARY_FILE: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub scenario: PathBuf,
    pub success: bool,
    /// Failure reason code, or the error text when the run could not start.
    pub status: String,
    pub trajectory_length: Option<f64>,
    pub control_effort: Option<f64>,
    pub planning_time_s: Option<f64>,
}

/// Scenario files matching `pattern`, sorted.
pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths =
        glob::glob(pattern).map_err(|e| Error::Config(format!("bad pattern {pattern}: {e}")))?;
    let mut out: Vec<PathBuf> = paths
        .filter_map(|p| p.ok())
        .filter(|p| p.is_file())
        .collect();
    out.sort();
    if out.is_empty() {
        return Err(Error::NoScenarios(pattern.to_string()));
    }
    Ok(out)
}

/// Output directory for one scenario: its file stem under `out`.
pub fn run_dir(out: &Path, scenario: &Path) -> PathBuf {
    out.join(scenario.file_stem().unwrap_or(scenario.as_os_str()))
}

/// Runs one scenario file and writes its artifacts.
pub fn run_one(path: &Path, dir: &Path, render: bool) -> SummaryRow {
    let run = || -> Result<SummaryRow> {
        let scenario = parse_and_validate(path)?;
        let log = run_episode(&scenario)?;
        let (_, m) = write_run(dir, &scenario, &log, render)?;
        Ok(SummaryRow {
            scenario: path.to_path_buf(),
            success: m.success,
            status: log
                .failure
                .map_or("success".to_string(), |f| f.as_str().to_string()),
            trajectory_length: Some(m.trajectory_length),
            control_effort: Some(m.control_effort),
            planning_time_s: Some(m.planning_time_s),
        })
    };
    run().unwrap_or_else(|e| SummaryRow {
        scenario: path.to_path_buf(),
        success: false,
        status: format!("error: {e}"),
        trajectory_length: None,
        control_effort: None,
        planning_time_s: None,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("scenario,success,status,trajectory_length,control_effort,planning_time_s\n");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            csv_field(&r.scenario.to_string_lossy()),
            r.success,
            csv_field(&r.status),
            opt(r.trajectory_length),
            opt(r.control_effort),
            opt(r.planning_time_s),
        );
    }
    out
}

/// Runs every scenario matching `pattern` on `workers` threads and writes
/// `summary.csv` under `out`. Rows are in scenario path order.
pub fn batch(pattern: &str, out: &Path, workers: usize, render: bool) -> Result<Vec<SummaryRow>> {
    let paths = expand_glob(pattern)?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let rows: Vec<SummaryRow> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| run_one(p, &run_dir(out, p), render))
            .collect()
    });
    write_atomic(&out.join(SUMMARY_FILE), summary_csv(&rows).as_bytes())?;
    Ok(rows)
}
