//! Snapshot files: one JSON header line with the grid and time, then a CSV
//! table `ix0,ix1[,ix2],iv0,iv1[,iv2],value` in storage order. Values are
//! written in shortest round-trip form, so a read-back is bit-exact.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{unflatten, DistributionFunction, GridError, PhaseGrid};

pub const SNAPSHOT_FORMAT: &str = "kinlab-snapshot";
pub const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: bad header: {message}")]
    Header { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    Row {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Grid { path: String, source: GridError },
}

/// First line of a snapshot file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    #[serde(rename = "N")]
    pub dim: usize,
    #[serde(rename = "L")]
    pub period: f64,
    pub n_x: usize,
    pub v_max: f64,
    pub n_v: usize,
    pub t: f64,
}

/// A distribution function together with its time stamp.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub f: DistributionFunction,
}

pub fn csv_columns(dim: usize) -> String {
    let mut cols: Vec<String> = (0..dim).map(|d| format!("ix{d}")).collect();
    cols.extend((0..dim).map(|d| format!("iv{d}")));
    cols.push("value".into());
    cols.join(",")
}

pub fn write_snapshot(path: &Path, f: &DistributionFunction, t: f64) -> Result<(), SnapshotError> {
    let p = path.display().to_string();
    let io = |source| SnapshotError::Io {
        path: p.clone(),
        source,
    };
    let g = f.grid();
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        version: SNAPSHOT_VERSION,
        dim: g.dim,
        period: g.period,
        n_x: g.n_x,
        v_max: g.v_max,
        n_v: g.n_v,
        t,
    };
    let mut w = BufWriter::new(fs::File::create(path).map_err(io)?);
    let json = serde_json::to_string(&header).expect("header serialises");
    writeln!(w, "{json}").map_err(io)?;
    writeln!(w, "{}", csv_columns(g.dim)).map_err(io)?;
    let nx = g.nx_total();
    for (k, value) in f.values().iter().enumerate() {
        let (iv, ix) = (k / nx, k % nx);
        let xi = unflatten(ix, g.n_x, g.dim);
        let vi = unflatten(iv, g.n_v, g.dim);
        let mut line = String::with_capacity(48);
        for d in 0..g.dim {
            line.push_str(&xi[d].to_string());
            line.push(',');
        }
        for d in 0..g.dim {
            line.push_str(&vi[d].to_string());
            line.push(',');
        }
        line.push_str(&value.to_string());
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot, SnapshotError> {
    let p = path.display().to_string();
    let file = fs::File::open(path).map_err(|source| SnapshotError::Io {
        path: p.clone(),
        source,
    })?;
    let mut lines = BufReader::new(file).lines();
    let header_err = |message: String| SnapshotError::Header {
        path: p.clone(),
        message,
    };
    let mut next_line = |what: &str| -> Result<String, SnapshotError> {
        match lines.next() {
            Some(Ok(l)) => Ok(l),
            Some(Err(source)) => Err(SnapshotError::Io {
                path: p.clone(),
                source,
            }),
            None => Err(SnapshotError::Header {
                path: p.clone(),
                message: format!("missing {what}"),
            }),
        }
    };
    let first = next_line("JSON header")?;
    let h: SnapshotHeader = serde_json::from_str(&first).map_err(|e| header_err(e.to_string()))?;
    if h.format != SNAPSHOT_FORMAT || h.version != SNAPSHOT_VERSION {
        return Err(header_err(format!(
            "expected format {SNAPSHOT_FORMAT} version {SNAPSHOT_VERSION}, got {} version {}",
            h.format, h.version
        )));
    }
    let grid = PhaseGrid::new(h.dim, h.period, h.n_x, h.v_max, h.n_v).map_err(|source| {
        SnapshotError::Grid {
            path: p.clone(),
            source,
        }
    })?;
    let cols = next_line("CSV header")?;
    if cols.trim() != csv_columns(h.dim) {
        return Err(header_err(format!(
            "column header `{}` does not match `{}`",
            cols.trim(),
            csv_columns(h.dim)
        )));
    }
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    let mut count = 0usize;
    for (offset, line) in lines.enumerate() {
        let lineno = offset + 3;
        let row_err = |message: String| SnapshotError::Row {
            path: p.clone(),
            line: lineno,
            message,
        };
        let line = line.map_err(|source| SnapshotError::Io {
            path: p.clone(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 2 * h.dim + 1 {
            return Err(row_err(format!("expected {} fields, got {}", 2 * h.dim + 1, fields.len())));
        }
        let mut idx = [0usize; 6];
        for (slot, text) in idx.iter_mut().zip(&fields[..2 * h.dim]) {
            *slot = text.trim().parse().map_err(|_| row_err(format!("bad index `{text}`")))?;
        }
        let (xi, vi) = idx[..2 * h.dim].split_at(h.dim);
        if xi.iter().any(|&i| i >= h.n_x) || vi.iter().any(|&i| i >= h.n_v) {
            return Err(row_err("index outside the grid".into()));
        }
        let ix = xi.iter().fold(0, |acc, &i| acc * h.n_x + i);
        let iv = vi.iter().fold(0, |acc, &i| acc * h.n_v + i);
        let value: f64 = fields[2 * h.dim]
            .trim()
            .parse()
            .map_err(|_| row_err(format!("bad value `{}`", fields[2 * h.dim])))?;
        let k = grid.index(ix, iv);
        if seen[k] {
            return Err(row_err("duplicate node".into()));
        }
        seen[k] = true;
        values[k] = value;
        count += 1;
    }
    if count != grid.len() {
        return Err(header_err(format!(
            "header promises {} nodes, file has {count}",
            grid.len()
        )));
    }
    let f = DistributionFunction::from_values(grid, values).map_err(|source| SnapshotError::Grid {
        path: p.clone(),
        source,
    })?;
    Ok(Snapshot { t: h.t, f })
}
