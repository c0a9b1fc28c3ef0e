//! Plain CSV tables and JSON manifests.
//!
//! Floats are written with 17 significant digits so that values survive a
//! round trip through text unchanged. Files are written to a temporary name
//! and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::spectra::SpectralGrid;

/// Version string recorded in manifests.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// `x` with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn format_cell(c: &Cell) -> String {
    match c {
        Cell::Float(x) => format_float(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::Text(s) => s.clone(),
    }
}

/// A header row plus data rows of equal width.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Self {
            header: header.iter().map(|s| s.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Format(format!(
                "row has {} cells, header has {}",
                row.len(),
                self.header.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(format_cell).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_csv(path: &Path, table: &Table) -> Result<()> {
    write_atomic(path, table.to_csv().as_bytes())
}

pub fn write_manifest<T: Serialize + ?Sized>(path: &Path, manifest: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(manifest)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// Reads a CSV written by [`write_csv`] back into a header and float rows.
pub fn read_csv_floats(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format(format!("{} is empty", path.display())))?
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.split(',')
                .map(|c| {
                    c.parse::<f64>()
                        .map_err(|_| Error::Format(format!("not a number: '{c}'")))
                })
                .collect()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok((header, rows))
}

/// `(q, omega, weight)` rows of a spectral grid.
pub fn spectral_table(grid: &SpectralGrid) -> Table {
    let mut t = Table::new(&["q", "omega", "weight"]);
    t.rows = grid
        .rows()
        .map(|r| r.iter().map(|&x| Cell::Float(x)).collect())
        .collect();
    t
}

/// Manifest of a spectral grid; `extra` is merged in at the top level.
pub fn spectral_manifest(grid: &SpectralGrid, extra: Value) -> Value {
    let mut m = json!({
        "code_version": CODE_VERSION,
        "channel": grid.channel,
        "broadening": grid.broadening,
        "q_values": grid.q_values,
        "omega_min": grid.omega_values.first(),
        "omega_max": grid.omega_values.last(),
        "omega_points": grid.omega_values.len(),
        "run": grid.manifest,
        "sum_rule": grid.sum_rule,
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut m, extra) {
        m.extend(e);
    }
    m
}

/// Writes `<stem>.csv` and `<stem>.json` into `dir`.
pub fn write_spectral_grid(dir: &Path, stem: &str, grid: &SpectralGrid, extra: Value) -> Result<()> {
    write_csv(&dir.join(format!("{stem}.csv")), &spectral_table(grid))?;
    write_manifest(&dir.join(format!("{stem}.json")), &spectral_manifest(grid, extra))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        for x in [0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI, -0.0] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(f64::INFINITY), "inf");
    }

    #[test]
    fn table_layout() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1usize.into(), 0.5.into(), "x,y".into()]).unwrap();
        assert!(t.push(vec![1usize.into()]).is_err());
        assert_eq!(t.to_csv(), "a,b,c\n1,5.0000000000000000e-1,\"x,y\"\n");
    }

    #[test]
    fn write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/t.csv");
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![0.1.into(), 2.0.into()]).unwrap();
        write_csv(&path, &t).unwrap();
        let (h, rows) = read_csv_floats(&path).unwrap();
        assert_eq!(h, vec!["x", "y"]);
        assert_eq!(rows, vec![vec![0.1, 2.0]]);
        write_manifest(&dir.path().join("m.json"), &json!({"a": 1})).unwrap();
        assert!(!dir.path().join("m.json.tmp").exists());
    }
}
