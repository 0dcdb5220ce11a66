use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forge::PhraseLexicon;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileChecksum {
    /// Relative to the root named in the owning manifest field.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconInfo {
    pub version: String,
    pub sha256: String,
}

impl From<&PhraseLexicon> for LexiconInfo {
    fn from(l: &PhraseLexicon) -> Self {
        LexiconInfo {
            version: l.version().to_string(),
            sha256: l.checksum(),
        }
    }
}

/// `manifest.json` of an output directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    /// Effective settings of the run.
    pub config: serde_json::Value,
    pub inputs: Vec<FileChecksum>,
    pub seed: Option<u64>,
    pub lexicon: LexiconInfo,
    /// Command-specific counts.
    pub summary: serde_json::Value,
    /// Present on dataset manifests once `split` has run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<serde_json::Value>,
    /// RFC 3339 UTC; the only field allowed to differ between reruns.
    pub created_at: String,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, lexicon: &PhraseLexicon) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            inputs: Vec::new(),
            seed: None,
            lexicon: lexicon.into(),
            summary: serde_json::Value::Null,
            split: None,
            created_at: now(),
        }
    }

    pub fn read(dir: &Path) -> Result<RunManifest> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::invalid(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Internal(e.to_string()))?;
        text.push('\n');
        crate::roi::write_atomic(&dir.join(MANIFEST_FILE), text.as_bytes())
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn checksum_file(path: &Path, root: &Path) -> Result<FileChecksum> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(FileChecksum {
        path: relative(path, root),
        sha256: sha256_hex(&bytes),
    })
}

/// `path` relative to `root` with `/` separators, or the full path when it
/// lies outside `root`.
pub fn relative(path: &Path, root: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}
