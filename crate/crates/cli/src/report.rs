//! Output files of a run: `trace.csv`, `trials/trial_XXXX.json` and
//! `summary.json`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::runner::ScenarioReport;

#[derive(Serialize)]
struct CsvRow {
    trial: usize,
    iteration: usize,
    defect: f64,
    distance: f64,
}

fn other(e: impl std::fmt::Display) -> io::Error {
    io::Error::other(e.to_string())
}

/// Trace rows of every trial, in trial order.
pub fn trace_csv(report: &ScenarioReport) -> io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in &report.trials {
        for row in &t.trace {
            w.serialize(CsvRow {
                trial: t.trial,
                iteration: row.iteration,
                defect: row.defect,
                distance: row.distance,
            })
            .map_err(other)?;
        }
    }
    if report.trials.iter().all(|t| t.trace.is_empty()) {
        w.write_record(["trial", "iteration", "defect", "distance"]).map_err(other)?;
    }
    w.into_inner().map_err(other)
}

/// Write the files of one scenario under `dir`.
pub fn write_scenario(dir: &Path, report: &ScenarioReport) -> io::Result<()> {
    fs::create_dir_all(dir.join("trials"))?;
    fs::write(dir.join("trace.csv"), trace_csv(report)?)?;
    for t in &report.trials {
        let path = dir.join("trials").join(format!("trial_{:04}.json", t.trial));
        fs::write(path, serde_json::to_vec_pretty(t).map_err(other)?)?;
    }
    fs::write(dir.join("summary.json"), serde_json::to_vec_pretty(report).map_err(other)?)?;
    Ok(())
}

/// Directory name for scenario `index` of a suite.
pub fn scenario_dir(root: &Path, index: usize, label: &str) -> PathBuf {
    let clean: String = label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    root.join(format!("{index:02}_{clean}"))
}

#[derive(Serialize)]
struct SuiteEntry<'a> {
    name: String,
    kind: &'static str,
    passed: bool,
    completed: usize,
    rejected: usize,
    failed: usize,
    wall_time_ms: f64,
    violations: &'a [String],
}

/// Write every scenario of a suite plus a top-level `summary.json`.
pub fn write_suite(root: &Path, reports: &[ScenarioReport]) -> io::Result<()> {
    fs::create_dir_all(root)?;
    let mut entries = Vec::new();
    for (i, r) in reports.iter().enumerate() {
        write_scenario(&scenario_dir(root, i, &r.scenario.label()), r)?;
        entries.push(SuiteEntry {
            name: r.scenario.label(),
            kind: r.scenario.kind.name(),
            passed: r.passed,
            completed: r.completed,
            rejected: r.rejected,
            failed: r.failed,
            wall_time_ms: r.wall_time_ms,
            violations: &r.violations,
        });
    }
    let all = serde_json::json!({
        "passed": reports.iter().all(|r| r.passed),
        "scenarios": entries,
    });
    fs::write(root.join("summary.json"), serde_json::to_vec_pretty(&all).map_err(other)?)
}

/// One line per scenario for the terminal.
pub fn status_line(r: &ScenarioReport) -> String {
    format!(
        "{} {:<28} {:>5} completed {:>4} rejected {:>4} failed  {:>9.1} ms",
        if r.passed { "PASS" } else { "FAIL" },
        r.scenario.label(),
        r.completed,
        r.rejected,
        r.failed,
        r.wall_time_ms
    )
}
