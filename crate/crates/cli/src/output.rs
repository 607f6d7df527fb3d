use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::manifest::RunManifest;
use crate::CliError;

pub const OUT_DIR_VAR: &str = "CITERANK_OUT_DIR";

/// A human-readable table and its machine-readable twin.
pub struct Report {
    pub table: String,
    pub result: Value,
}

impl Report {
    pub fn document(&self, manifest: &RunManifest) -> Value {
        json!({ "manifest": manifest, "result": self.result })
    }
}

/// Right-aligned columns except the first, which is left-aligned.
pub fn render(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let mut out = String::new();
        for (k, (cell, w)) in cells.iter().zip(&widths).enumerate() {
            if k == 0 {
                out.push_str(&format!("{cell:<w$}"));
            } else {
                out.push_str(&format!("  {cell:>w$}"));
            }
        }
        out.trim_end().to_string() + "\n"
    };
    let mut out = line(headers.to_vec());
    for row in rows {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

pub fn fixed(v: f64, digits: usize) -> String {
    if v.is_nan() {
        "-".into()
    } else {
        format!("{v:.digits$}")
    }
}

/// `FILE.json` next to `FILE`.
pub fn sidecar_path(table: &Path) -> PathBuf {
    let mut name = table.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Relative paths land in the default output directory when one is set.
pub fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn target(out: Option<&Path>, default_name: &str) -> Option<PathBuf> {
    match out {
        Some(p) => Some(resolve(p)),
        None => std::env::var_os(OUT_DIR_VAR).map(|dir| PathBuf::from(dir).join(default_name)),
    }
}

/// Writes the table and its sidecar to a file, or one of them to stdout.
pub fn emit(
    report: &Report,
    manifest: &RunManifest,
    out: Option<&Path>,
    json_stdout: bool,
    default_name: &str,
) -> Result<(), CliError> {
    let doc = serde_json::to_string_pretty(&report.document(manifest)).map_err(|e| CliError::Input(e.to_string()))?
        + "\n";
    if json_stdout {
        print!("{doc}");
        return Ok(());
    }
    match target(out, default_name) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(&path, &report.table).map_err(|e| CliError::io(&path, e))?;
            let side = sidecar_path(&path);
            fs::write(&side, doc).map_err(|e| CliError::io(&side, e))?;
        }
        None => print!("{}", report.table),
    }
    Ok(())
}
