//! Content-addressed transcript cache.
//!
//! Each transcript is stored as `<request_hash>.json` holding the canonical
//! request, so the key can be recomputed and checked on every read. A bundle
//! is simply a directory in the same layout.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use dashmap::DashMap;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::request::{ChatRequest, RequestHash};

/// One completed structured-output exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub request_hash: RequestHash,
    /// The original (pre-repair) request in canonical form.
    pub request: ChatRequest,
    pub response_text: String,
    pub validated_payload: Value,
    pub attempt_count: u32,
}

impl Transcript {
    pub fn to_document(&self) -> String {
        crate::docio::to_document(self)
    }
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("CorruptEntry: {path}: {reason}")]
    CorruptEntry { path: PathBuf, reason: String },
    #[error("cache is read-only (replay mode)")]
    ReadOnly,
    #[error("cache io error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug)]
pub struct TranscriptCache {
    dir: PathBuf,
    read_only: bool,
    key_locks: DashMap<String, Arc<Mutex<()>>>,
}

impl TranscriptCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, CacheError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir, read_only: false, key_locks: DashMap::new() })
    }

    /// Open an existing directory without write access.
    pub fn open_read_only(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), read_only: true, key_locks: DashMap::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn is_read_only(&self) -> bool {
        self.read_only
    }

    fn path_for(&self, hash: &RequestHash) -> PathBuf {
        self.dir.join(format!("{}.json", hash.as_str()))
    }

    pub fn get(&self, hash: &RequestHash) -> Result<Option<Transcript>, CacheError> {
        let path = self.path_for(hash);
        match fs::read_to_string(&path) {
            Ok(text) => read_entry(&path, &text, Some(hash)).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&path)(e)),
        }
    }

    /// Atomically write an entry (temp file then rename); writers to the same
    /// key are serialized.
    pub fn put(&self, transcript: &Transcript) -> Result<(), CacheError> {
        if self.read_only {
            return Err(CacheError::ReadOnly);
        }
        let key = transcript.request_hash.as_str().to_string();
        let lock = self.key_locks.entry(key).or_default().clone();
        let _guard = lock.lock().unwrap_or_else(|p| p.into_inner());
        write_atomic(&self.path_for(&transcript.request_hash), transcript.to_document().as_bytes())
    }

    /// Every entry, sorted by hash. Fails on the first corrupt entry.
    pub fn entries(&self) -> Result<Vec<Transcript>, CacheError> {
        read_dir_entries(&self.dir)
    }

    /// Write every entry into `bundle` (created if needed).
    pub fn export(&self, bundle: &Path) -> Result<usize, CacheError> {
        fs::create_dir_all(bundle).map_err(io_err(bundle))?;
        let entries = self.entries()?;
        for entry in &entries {
            let path = bundle.join(format!("{}.json", entry.request_hash.as_str()));
            write_atomic(&path, entry.to_document().as_bytes())?;
        }
        Ok(entries.len())
    }

    /// Verify and copy every entry of `bundle` into this cache.
    pub fn import(&self, bundle: &Path) -> Result<usize, CacheError> {
        let entries = read_dir_entries(bundle)?;
        for entry in &entries {
            self.put(entry)?;
        }
        Ok(entries.len())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CacheError> {
    crate::docio::write_atomic(path, bytes).map_err(io_err(path))
}

fn read_entry(path: &Path, text: &str, expected: Option<&RequestHash>) -> Result<Transcript, CacheError> {
    let corrupt = |reason: String| CacheError::CorruptEntry { path: path.to_path_buf(), reason };
    let transcript: Transcript = serde_json::from_str(text).map_err(|e| corrupt(e.to_string()))?;
    let recomputed = transcript.request.hash();
    if recomputed != transcript.request_hash {
        return Err(corrupt(format!(
            "stored hash {} does not match recomputed {}",
            transcript.request_hash, recomputed
        )));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
    if stem != recomputed.as_str() || expected.is_some_and(|h| h != &recomputed) {
        return Err(corrupt(format!("file name does not match request hash {recomputed}")));
    }
    if transcript.attempt_count == 0 {
        return Err(corrupt("attempt_count must be at least 1".into()));
    }
    Ok(transcript)
}

fn read_dir_entries(dir: &Path) -> Result<Vec<Transcript>, CacheError> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some("json") {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|path| {
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            read_entry(path, &text, None)
        })
        .collect()
}
