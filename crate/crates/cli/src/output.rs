//! Run directory with a manifest of every file written.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
    bytes: usize,
}

pub struct RunDir {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunDir {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(RunDir { dir: dir.to_path_buf(), files: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
        let bytes = bytes.as_ref();
        std::fs::write(self.path(name), bytes)?;
        self.register(name, bytes);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }

    /// Records a file that something else already wrote into the directory.
    pub fn adopt(&mut self, name: &str) -> Result<()> {
        let bytes = std::fs::read(self.path(name))?;
        self.register(name, &bytes);
        Ok(())
    }

    fn register(&mut self, name: &str, bytes: &[u8]) {
        self.files.retain(|f| f.path != name);
        self.files.push(FileEntry { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() });
    }

    /// Writes `manifest.json` last so it can list the hashes of everything else.
    pub fn finish(mut self, mut header: serde_json::Map<String, serde_json::Value>) -> Result<PathBuf> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        header.insert("files".into(), serde_json::to_value(&self.files)?);
        let path = self.path("manifest.json");
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(header))?;
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// `{:.16e}` rendering used for every float in tabular output.
pub fn f(x: f64) -> String {
    format!("{x:.16e}")
}
