//! Output files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub timestamp: String,
    pub status: RunStatus,
    pub outputs: Vec<OutputChecksum>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

fn csv_bytes<R: Serialize + Default>(rows: &[R]) -> std::io::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        w.serialize(R::default())?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    let mut bytes = w.into_inner().map_err(|e| e.into_error())?;
    if rows.is_empty() {
        let header_end = bytes.iter().position(|&b| b == b'\n').map_or(bytes.len(), |i| i + 1);
        bytes.truncate(header_end);
    }
    Ok(bytes)
}

/// Files written into one output directory, checksummed as they land.
pub struct OutputSet {
    dir: PathBuf,
    written: Vec<OutputChecksum>,
}

impl OutputSet {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Output { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes).map_err(|source| CliError::Output { path, source })?;
        self.written.push(OutputChecksum { file: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
        Ok(())
    }

    /// Writes `rows` with a header row taken from the field names. An empty
    /// table still gets its header, read off `R::default()`.
    pub fn write_csv<R: Serialize + Default>(&mut self, name: &str, rows: &[R]) -> Result<()> {
        let bytes = csv_bytes(rows).map_err(|source| CliError::Output { path: self.dir.join(name), source })?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).expect("serializable output");
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    /// Writes the manifest last. It is not listed among its own outputs.
    pub fn finish(self, command: &str, config_sha256: String, error: Option<&CliError>) -> Result<RunManifest> {
        let manifest = RunManifest {
            command: command.to_string(),
            config_sha256,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            status: if error.is_some() { RunStatus::Partial } else { RunStatus::Complete },
            outputs: self.written,
            error: error.map(ToString::to_string),
        };
        let path = self.dir.join(MANIFEST_FILE);
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable manifest");
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(|source| CliError::Output { path, source })?;
        Ok(manifest)
    }
}

/// Runs `body`, then writes the manifest whether or not it succeeded. A
/// failed run leaves whatever outputs were written plus a partial manifest.
pub fn with_outputs<F>(dir: &Path, command: &str, config_sha256: String, body: F) -> Result<RunManifest>
where
    F: FnOnce(&mut OutputSet) -> Result<()>,
{
    let mut out = OutputSet::create(dir)?;
    let result = body(&mut out);
    let manifest = out.finish(command, config_sha256, result.as_ref().err())?;
    result.map(|()| manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Default)]
    struct Row {
        n: usize,
        value: Option<f64>,
    }

    #[test]
    fn csv_has_header_and_checksums_match() {
        let dir = tempfile::tempdir().unwrap();
        let m = with_outputs(dir.path(), "test", "abc".into(), |out| {
            out.write_csv("rows.csv", &[Row { n: 1, value: Some(0.5) }, Row { n: 2, value: None }])
        })
        .unwrap();
        let body = fs::read(dir.path().join("rows.csv")).unwrap();
        assert_eq!(body, b"n,value\n1,0.5\n2,\n");
        assert_eq!(m.outputs[0].sha256, sha256_hex(&body));
        assert_eq!(m.status, RunStatus::Complete);
        let on_disk: RunManifest = serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(on_disk, m);
        assert_eq!(csv_bytes::<Row>(&[]).unwrap(), b"n,value\n");
    }

    #[test]
    fn failure_leaves_partial_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let r = with_outputs(dir.path(), "test", "abc".into(), |out| {
            out.write_csv("rows.csv", &[Row { n: 1, value: None }])?;
            Err(CliError::config("boom"))
        });
        assert!(matches!(r, Err(CliError::Config(_))));
        let m: RunManifest = serde_json::from_slice(&fs::read(dir.path().join(MANIFEST_FILE)).unwrap()).unwrap();
        assert_eq!(m.status, RunStatus::Partial);
        assert_eq!(m.outputs.len(), 1);
        assert!(m.error.unwrap().contains("boom"));
    }

    #[test]
    fn digest_known_value() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
