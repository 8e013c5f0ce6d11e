//! Atomic file output and run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub outputs: Vec<PathBuf>,
    /// Seconds.
    pub wall_time: f64,
}

impl RunManifest {
    pub fn new(command: &str, parameters: BTreeMap<String, String>) -> Self {
        Self {
            command: command.to_owned(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            outputs: Vec::new(),
            wall_time: 0.0,
        }
    }

    /// Writes the manifest as `<first output>.manifest.json`.
    pub fn write(mut self, elapsed: Duration) -> Result<PathBuf> {
        self.wall_time = elapsed.as_secs_f64();
        let first = self.outputs.first().context("manifest without outputs")?;
        let mut name = first
            .file_name()
            .context("output has no file name")?
            .to_owned();
        name.push(".manifest.json");
        let path = first.with_file_name(name);
        let mut json = serde_json::to_string_pretty(&self)?;
        json.push('\n');
        write_atomic(&path, json.as_bytes())?;
        Ok(path)
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let file_name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(file_name);
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = dir.join(tmp_name);

    let result = (|| -> Result<()> {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
