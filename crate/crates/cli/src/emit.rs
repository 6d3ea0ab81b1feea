//! Writes a report bundle to a directory with a checksum manifest.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{IoError, UsageError};
use crate::plot::render_effect_plot;
use crate::report::{causal_summary, effects_csv, selftest_summary, tests_csv, MachineReport, ReportBody, TOOL_VERSION};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Comma-separated list of `csv`, `json` (or `json-like`) and `svg`.
pub fn parse_formats(text: &str) -> Result<Vec<Format>, UsageError> {
    let mut out = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let f = match part {
            "csv" => Format::Csv,
            "json" | "json-like" => Format::Json,
            "svg" => Format::Svg,
            other => return Err(UsageError(format!("unknown format {other:?}"))),
        };
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        return Err(UsageError("no output format given".into()));
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool_version: String,
    pub files: Vec<ManifestEntry>,
}

/// File names and contents of a report in the requested formats. A human
/// summary is always included.
pub fn render_files(report: &MachineReport, formats: &[Format]) -> Result<Vec<(String, String)>, IoError> {
    let mut files = Vec::new();
    let want = |f: Format| formats.contains(&f);
    match &report.body {
        ReportBody::Analysis { report: r, .. } | ReportBody::Comparison { report: r, .. } => {
            let reg = match &report.body {
                ReportBody::Comparison { regarima, .. } => Some(regarima),
                _ => None,
            };
            files.push(("summary.txt".into(), causal_summary(r, reg)));
            if want(Format::Csv) {
                files.push(("effects.csv".into(), effects_csv(r)?));
                files.push(("tests.csv".into(), tests_csv(r)?));
            }
            if want(Format::Svg) {
                for &h in &r.horizons {
                    files.push((format!("plot_h{h}.svg"), render_effect_plot(r, h)));
                }
            }
        }
        ReportBody::Study { tables, .. } => {
            files.push(("summary.txt".into(), tables.to_text()));
            if want(Format::Csv) {
                files.push(("tables.csv".into(), tables.to_csv().map_err(|e| IoError::Invalid(e.to_string()))?));
            }
        }
        ReportBody::Selftest { checks, .. } => {
            files.push(("summary.txt".into(), selftest_summary(checks)));
        }
    }
    if want(Format::Json) {
        files.push(("report.json".into(), report.to_json()?));
    }
    files.sort();
    Ok(files)
}

fn checksum(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn emit_report(report: &MachineReport, out_dir: &Path, formats: &[Format]) -> Result<Manifest, IoError> {
    std::fs::create_dir_all(out_dir).map_err(|e| IoError::Io(format!("{}: {e}", out_dir.display())))?;
    let mut entries = Vec::new();
    for (name, content) in render_files(report, formats)? {
        let path = out_dir.join(&name);
        std::fs::write(&path, content.as_bytes()).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
        entries.push(ManifestEntry {
            path: name,
            sha256: checksum(content.as_bytes()),
            bytes: content.len() as u64,
        });
    }
    let manifest = Manifest {
        tool_version: TOOL_VERSION.into(),
        files: entries,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| IoError::Invalid(e.to_string()))?;
    text.push('\n');
    let path = out_dir.join(MANIFEST);
    std::fs::write(&path, text).map_err(|e| IoError::Io(format!("{}: {e}", path.display())))?;
    Ok(manifest)
}
