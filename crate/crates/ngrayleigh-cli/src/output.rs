//! Output directory with a hash manifest of everything written to it.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

/// 17 significant digits: round-trips every `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct OutputDir {
    root: PathBuf,
    files: BTreeMap<String, FileEntry>,
}

#[derive(Debug, Clone, Serialize)]
struct FileEntry {
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a C,
    files: &'a BTreeMap<String, FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root: root.to_path_buf(), files: BTreeMap::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn write(&mut self, name: &str, bytes: Vec<u8>) -> Result<()> {
        let path = self.root.join(name);
        fs::write(&path, &bytes).with_context(|| format!("writing {}", path.display()))?;
        let sha256 = hex::encode(Sha256::digest(&bytes));
        self.files.insert(name.to_string(), FileEntry { sha256, bytes: bytes.len() });
        Ok(())
    }

    /// Writes a CSV with the given header; every cell is a number.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.iter().map(|&x| num(x)))?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(name, bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.write(name, bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish<C: Serialize>(self, command: &str, config: &C) -> Result<PathBuf> {
        let manifest = Manifest { command, version: env!("CARGO_PKG_VERSION"), config, files: &self.files };
        let path = self.root.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(&manifest)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        Ok(path)
    }
}

/// Reads a numeric CSV with a header into named columns.
pub fn read_columns(path: &Path, want: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut rd = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = rd.headers()?.clone();
    let idx: Vec<usize> = want
        .iter()
        .map(|w| header.iter().position(|h| h == *w).with_context(|| format!("{}: no column {w}", path.display())))
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); want.len()];
    for rec in rd.records() {
        let rec = rec?;
        for (c, &i) in cols.iter_mut().zip(&idx) {
            let cell = rec.get(i).context("short row")?;
            c.push(cell.trim().parse::<f64>().with_context(|| format!("bad number {cell:?}"))?);
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for &x in &[0.1, -1.0 / 3.0, 1e-300, 6.02214076e23, std::f64::consts::PI] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_round_trip_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.csv("a.csv", &["x", "y"], vec![vec![0.5, 1.0 / 7.0], vec![2.0, -3.0]]).unwrap();
        let cols = read_columns(&dir.path().join("a.csv"), &["y", "x"]).unwrap();
        assert_eq!(cols, vec![vec![1.0 / 7.0, -3.0], vec![0.5, 2.0]]);
        out.finish("test", &"cfg").unwrap();
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["files"]["a.csv"]["sha256"].as_str().unwrap().len(), 64);
        assert!(read_columns(&dir.path().join("a.csv"), &["z"]).is_err());
    }
}
