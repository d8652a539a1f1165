//! Atomic document writes shared by the cache, persona library and workspace.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

/// Write to a sibling temp file, fsync, then rename over `path`. Readers see
/// either the old content or the new content, never a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_document<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("documents serialize");
    out.push('\n');
    out
}

pub fn write_document<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    write_atomic(path, to_document(value).as_bytes())
}
