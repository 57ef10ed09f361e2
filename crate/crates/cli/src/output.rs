use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use crate::args::Cli;
use crate::failure::Failure;

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, Failure> {
        fs::create_dir_all(root)
            .map_err(|e| Failure::usage(format!("cannot create {}: {e}", root.display())))?;
        Ok(OutputDir { root: root.to_path_buf() })
    }

    /// Writes `bytes` to `name` and returns the name.
    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<String, Failure> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
        Ok(name.to_string())
    }

    pub fn write_json(&self, name: &str, value: &impl Serialize) -> Result<String, Failure> {
        let mut text = dflow_core::io::to_sorted_json(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }
}

/// Summary JSON plus tables produced by one command.
pub struct Report {
    pub summary: serde_json::Value,
    pub tables: Vec<(String, Vec<u8>)>,
    /// Set when the command ran but a check it performs did not pass.
    pub failed_check: Option<String>,
}

impl Report {
    pub fn new(summary: serde_json::Value) -> Self {
        Report {
            summary,
            tables: Vec::new(),
            failed_check: None,
        }
    }

    pub fn table(mut self, name: impl Into<String>, bytes: Vec<u8>) -> Self {
        self.tables.push((name.into(), bytes));
        self
    }

    pub fn files(&self, dir: &OutputDir) -> Result<Vec<String>, Failure> {
        self.tables.iter().map(|(name, bytes)| dir.write(name, bytes)).collect()
    }
}

pub fn write_manifest(
    dir: &OutputDir,
    cli: &Cli,
    wall_time: f64,
    files: &[String],
    failure: Option<&Failure>,
) -> Result<String, Failure> {
    let manifest = json!({
        "config": cli,
        "versions": {
            "dflow": env!("CARGO_PKG_VERSION"),
            "dflow_core": dflow_core::VERSION,
        },
        "wall_time_seconds": wall_time,
        "outputs": files,
        "status": failure.map_or("ok", Failure::kind),
        "error": failure.map(Failure::message),
    });
    dir.write_json("manifest.json", &manifest)
}
