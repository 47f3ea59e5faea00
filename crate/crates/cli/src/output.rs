//! CSV and JSON writers for run directories.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use kinlab::grid::NormTrace;
use kinlab::io::write_snapshot;
use kinlab::solver::SolutionTrajectory;
use kinlab::DistributionFunction;

use crate::CliError;

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

pub fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| io_err(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    text
}

/// Prints to stdout, or writes the file when `out` is given.
pub fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut text = String::from(header);
    text.push('\n');
    for row in rows {
        text.push_str(&row);
        text.push('\n');
    }
    text
}

/// `traces.csv`: `t,norm_a,norm_rp`.
pub fn traces_csv(traj: &SolutionTrajectory) -> String {
    csv(
        "t,norm_a,norm_rp",
        traj.times
            .iter()
            .zip(traj.norm_a.values())
            .zip(traj.norm_rp.values())
            .map(|((t, a), rp)| format!("{t},{a},{rp}")),
    )
}

/// `picard.csv`: `iter,delta,ratio`; the first ratio is empty.
pub fn picard_csv(deltas: &[f64]) -> String {
    csv(
        "iter,delta,ratio",
        deltas.iter().enumerate().map(|(i, d)| {
            let ratio = if i == 0 {
                String::new()
            } else {
                (d / deltas[i - 1]).to_string()
            };
            format!("{},{d},{ratio}", i + 1)
        }),
    )
}

/// `defect.csv`: `t,defect`.
pub fn defect_csv(trace: &NormTrace) -> String {
    csv(
        "t,defect",
        trace.times().iter().zip(trace.values()).map(|(t, d)| format!("{t},{d}")),
    )
}

/// Writes `snapshots/f_<step>.csv` every `every` steps (first and last
/// only when `every` is zero) and returns the written paths.
pub fn write_snapshots(dir: &Path, traj: &SolutionTrajectory, every: usize) -> Result<Vec<PathBuf>, CliError> {
    let sub = dir.join("snapshots");
    create_dir(&sub)?;
    let last = traj.snapshots.len() - 1;
    let mut written = Vec::new();
    for (k, (f, &t)) in traj.snapshots.iter().zip(&traj.times).enumerate() {
        let keep = k == 0 || k == last || (every > 0 && k % every == 0);
        if keep {
            let path = sub.join(format!("f_{k:05}.csv"));
            snapshot(&path, f, t)?;
            written.push(path);
        }
    }
    Ok(written)
}

pub fn snapshot(path: &Path, f: &DistributionFunction, t: f64) -> Result<(), CliError> {
    write_snapshot(path, f, t).map_err(|e| CliError::Validation(e.to_string()))
}
