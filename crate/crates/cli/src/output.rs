//! Artifact staging: every file of a command is collected in memory and
//! written at the end, each through a temporary file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    path: String,
    sha256: String,
    bytes: usize,
}

#[derive(Debug, Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config_hash: &'a str,
    config: &'a C,
    files: Vec<ManifestFile>,
}

/// Canonical hash of a command's resolved configuration.
pub fn config_hash<C: Serialize>(config: &C) -> serde_json::Result<String> {
    Ok(sha256_hex(serde_json::to_string(config)?.as_bytes()))
}

#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        self.files.push((name.into(), bytes.into()));
    }

    /// Writes the staged files and a `manifest.json` into `dir`.
    pub fn commit<C: Serialize>(mut self, dir: &Path, command: &str, config: &C) -> std::io::Result<Vec<PathBuf>> {
        let hash = config_hash(config).map_err(std::io::Error::other)?;
        self.files.sort_by(|a, b| a.0.cmp(&b.0));
        let manifest = Manifest {
            tool: "loadrule",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: &hash,
            config,
            files: self
                .files
                .iter()
                .map(|(name, bytes)| ManifestFile {
                    path: name.clone(),
                    sha256: sha256_hex(bytes),
                    bytes: bytes.len(),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
        text.push('\n');
        self.files.push(("manifest.json".into(), text.into_bytes()));

        fs::create_dir_all(dir)?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            let target = dir.join(name);
            if let Some(parent) = target.parent() {
                fs::create_dir_all(parent)?;
            }
            write_atomic(&target, bytes)?;
            written.push(target);
        }
        Ok(written)
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_files_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut a = Artifacts::default();
        a.add("b.csv", "x\n");
        a.add("a.csv", "y\n");
        let written = a.commit(dir.path(), "test", &serde_json::json!({"k": 1})).unwrap();
        assert_eq!(written.len(), 3);
        assert_eq!(fs::read_to_string(dir.path().join("a.csv")).unwrap(), "y\n");
        let manifest: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["files"][0]["path"], "a.csv");
        assert_eq!(manifest["files"][0]["sha256"], sha256_hex(b"y\n"));
        assert_eq!(manifest["config_hash"], config_hash(&serde_json::json!({"k": 1})).unwrap());
        assert!(!dir.path().join(".a.csv.tmp").exists());
    }
}
