//! Result bundles: CSV tables, SVG plots and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::svg;

/// CSV table with a header row. Numbers use Rust's shortest round-trip
/// formatting, so equal values always produce equal bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_nums(&mut self, row: &[f64]) {
        self.push(row.iter().map(|&x| num(x)).collect());
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn num(x: f64) -> String {
    if x == 0.0 {
        // fold -0 into 0
        "0".to_string()
    } else if x.is_finite() && (x.abs() < 1e-5 || x.abs() >= 1e16) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.to_string()
}

#[derive(Debug, Clone)]
pub enum Plot {
    Line(svg::LinePlot),
    Heat(svg::HeatMap),
}

impl Plot {
    fn name(&self) -> &str {
        match self {
            Plot::Line(p) => &p.name,
            Plot::Heat(p) => &p.name,
        }
    }

    fn render(&self) -> String {
        match self {
            Plot::Line(p) => p.render(),
            Plot::Heat(p) => p.render(),
        }
    }
}

/// Everything an experiment produces.
#[derive(Debug, Clone, Default)]
pub struct Bundle {
    pub tables: Vec<Table>,
    pub plots: Vec<Plot>,
    /// Set when a trajectory diverged; outputs are still written.
    pub blow_up: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanAxisRecord {
    pub path: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRecord {
    pub axes: Vec<ScanAxisRecord>,
    pub points: usize,
    /// Every grid point reuses these seeds.
    pub seeds_per_point: Vec<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Flags {
    pub blow_up: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub experiment: String,
    pub name: String,
    pub config_sha256: String,
    pub seeds: Vec<u64>,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanRecord>,
    pub flags: Flags,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], files: &mut Vec<FileEntry>) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    files.push(FileEntry {
        path: name.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    });
    Ok(())
}

/// Writes the effective configuration, tables and plots into `dir` and
/// returns their manifest entries in write order.
pub fn write_bundle(dir: &Path, config_toml: &str, bundle: &Bundle) -> anyhow::Result<Vec<FileEntry>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut files = Vec::new();
    write_file(dir, "config.toml", config_toml.as_bytes(), &mut files)?;
    for t in &bundle.tables {
        write_file(dir, &t.file_name(), t.to_csv().as_bytes(), &mut files)?;
    }
    for p in &bundle.plots {
        write_file(dir, &format!("{}.svg", p.name()), p.render().as_bytes(), &mut files)?;
    }
    Ok(files)
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> anyhow::Result<PathBuf> {
    let path = dir.join(MANIFEST);
    let mut text = serde_json::to_string_pretty(manifest)?;
    text.push('\n');
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}
