//! Run directories, CSV writing and the checksummed manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::evolution::{Snapshot, Trajectory};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub command: String,
    /// Fully resolved configuration.
    pub config: serde_json::Value,
    pub wall_secs: f64,
    /// Labelled outcomes and other headline results.
    pub results: serde_json::Map<String, serde_json::Value>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// A fresh output directory. Existing directories are never reused: a
/// numeric suffix is appended instead.
pub struct RunDir {
    root: PathBuf,
    files: Vec<FileEntry>,
    started: Instant,
}

impl RunDir {
    pub fn create(parent: &Path, name: &str) -> Result<Self> {
        fs::create_dir_all(parent)?;
        let mut k = 0usize;
        loop {
            let candidate = if k == 0 {
                parent.join(name)
            } else {
                parent.join(format!("{name}-{k}"))
            };
            match fs::create_dir(&candidate) {
                Ok(()) => {
                    return Ok(Self {
                        root: candidate,
                        files: Vec::new(),
                        started: Instant::now(),
                    })
                }
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => k += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    /// Writes `contents` at the relative path and records its checksum.
    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let full = self.root.join(rel);
        if let Some(p) = full.parent() {
            fs::create_dir_all(p)?;
        }
        fs::write(&full, contents)?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Writes the trajectory's probes, energy history and snapshots under
    /// `prefix`.
    pub fn write_trajectory(&mut self, prefix: &str, tr: &Trajectory) -> Result<()> {
        self.write(&format!("{prefix}probes.csv"), probes_csv(tr).as_bytes())?;
        if !tr.energy_history.is_empty() {
            let rows = tr.energy_history.iter().map(|&(t, e)| vec![t, e]);
            self.write(&format!("{prefix}energy.csv"), csv(&["t", "energy"], rows).as_bytes())?;
        }
        for (k, s) in tr.snapshots.iter().enumerate() {
            let name = format!("{prefix}snapshots/snapshot_{k:04}.csv");
            self.write(&name, snapshot_csv(s, tr.grid.dx).as_bytes())?;
        }
        Ok(())
    }

    /// Writes the manifest last, through a temporary file and a rename.
    pub fn finish(
        self,
        command: &str,
        config: serde_json::Value,
        results: serde_json::Map<String, serde_json::Value>,
    ) -> Result<PathBuf> {
        let manifest = RunManifest {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            wall_secs: self.started.elapsed().as_secs_f64(),
            results,
            files: self.files,
        };
        let tmp = self.root.join(format!("{MANIFEST}.tmp"));
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        fs::write(&tmp, text)?;
        fs::rename(&tmp, self.root.join(MANIFEST))?;
        Ok(self.root)
    }
}

/// Shortest representation that parses back to the same double.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn probes_csv(tr: &Trajectory) -> String {
    let mut header = vec!["t".to_string()];
    for p in &tr.probes {
        header.push(format!("u@{}", fmt_f64(p.x)));
        header.push(format!("ut@{}", fmt_f64(p.x)));
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let n = tr.probes.first().map_or(0, |p| p.t.len());
    let rows = (0..n).map(|i| {
        let mut r = vec![tr.probes[0].t[i]];
        for p in &tr.probes {
            r.push(p.u[i]);
            r.push(p.ut[i]);
        }
        r
    });
    csv(&h, rows)
}

pub fn snapshot_csv(s: &Snapshot, dx: f64) -> String {
    let mut out = format!("# t = {}\nx,u,ut\n", fmt_f64(s.t));
    for (i, (u, ut)) in s.u.iter().zip(&s.ut).enumerate() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(i as f64 * dx), fmt_f64(*u), fmt_f64(*ut));
    }
    out
}

/// Table of named columns as read back from CSV.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text).ok_or_else(|| {
            crate::error::Error::MissingInput(format!("{} is not a numeric CSV table", path.display()))
        })
    }

    pub fn parse(text: &str) -> Option<Self> {
        let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
        let header: Vec<String> = lines.next()?.split(',').map(|s| s.trim().to_string()).collect();
        let mut columns = vec![Vec::new(); header.len()];
        for line in lines {
            for (c, v) in columns.iter_mut().zip(line.split(',')) {
                c.push(v.trim().parse().ok()?);
            }
        }
        Some(Self { header, columns })
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(&self.columns[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffix_indexing_never_overwrites() {
        let tmp = tempfile::tempdir().unwrap();
        let a = RunDir::create(tmp.path(), "run").unwrap();
        let b = RunDir::create(tmp.path(), "run").unwrap();
        let c = RunDir::create(tmp.path(), "run").unwrap();
        assert_eq!(a.path().file_name().unwrap(), "run");
        assert_eq!(b.path().file_name().unwrap(), "run-1");
        assert_eq!(c.path().file_name().unwrap(), "run-2");
    }

    #[test]
    fn manifest_indexes_every_file() {
        let tmp = tempfile::tempdir().unwrap();
        let mut d = RunDir::create(tmp.path(), "r").unwrap();
        d.write("a.csv", b"t,x\n0.0,1.0\n").unwrap();
        d.write("sub/b.json", b"{}").unwrap();
        let dir = d.finish("test", serde_json::json!({}), Default::default()).unwrap();
        let m = RunManifest::load(&dir).unwrap();
        assert_eq!(m.files.len(), 2);
        for f in &m.files {
            let bytes = fs::read(dir.join(&f.path)).unwrap();
            assert_eq!(hex::encode(Sha256::digest(&bytes)), f.sha256);
        }
        assert!(!dir.join("manifest.json.tmp").exists());
    }

    #[test]
    fn csv_round_trips_exactly() {
        let vals = [0.1, 1.0 / 3.0, 1e-300, -2.5e17];
        let text = csv(&["a"], vals.iter().map(|&v| vec![v]));
        let t = Table::parse(&text).unwrap();
        assert_eq!(t.column("a").unwrap(), &vals);
    }
}
