//! Run manifests: the resolved configuration and content hashes of every
//! file a run consumes, written before any computation starts. Output
//! hashes are appended after the run completes; both sections are
//! deterministic, so identical runs produce identical manifests.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::CliError;

pub struct RunManifest {
    command: &'static str,
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new(command: &'static str) -> Self {
        RunManifest {
            command,
            entries: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Record the git-blob-style SHA-256 of an input file.
    pub fn hash_input(&mut self, label: &str, path: &Path) -> Result<(), CliError> {
        let digest = blob_sha256(path)?;
        self.set(&format!("input_sha256.{label}"), digest);
        Ok(())
    }

    fn render(&self) -> String {
        let mut entries = self.entries.clone();
        entries.sort();
        let mut out = String::new();
        let _ = writeln!(out, "command={}", self.command);
        for (k, v) in entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    /// Write the manifest; call before any computation.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        fs::write(path, self.render())
            .map_err(|e| CliError::data(format!("cannot write manifest {}: {e}", path.display())))
    }

    /// Append output-file hashes once the run has produced them.
    pub fn append_outputs(path: &Path, outputs: &[(&str, &Path)]) -> Result<(), CliError> {
        let mut lines: Vec<String> = Vec::new();
        for (label, file) in outputs {
            lines.push(format!("output_sha256.{label}={}", blob_sha256(file)?));
        }
        lines.sort();
        let mut text = fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("cannot reread manifest: {e}")))?;
        text.push_str(&lines.join("\n"));
        text.push('\n');
        fs::write(path, text)
            .map_err(|e| CliError::data(format!("cannot rewrite manifest: {e}")))
    }
}

/// Git-blob-style content hash: SHA-256 of "blob <len>\0" + bytes.
pub fn blob_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(&bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}
