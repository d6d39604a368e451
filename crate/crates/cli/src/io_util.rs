//! Output helpers: atomic file writes and table formatting.

use std::fs;
use std::path::Path;

use fairmtl::error::Result;
use fairmtl::metrics::trunc4;

/// Writes via a temporary file in the same directory plus rename, so readers
/// never observe a half-written artifact.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_else(|| "out".to_string());
    let tmp = path.with_file_name(format!("{file_name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// 4-decimal presentation, truncated toward zero to match the reference
/// tables.
pub fn fmt4(x: f64) -> String {
    format!("{:.4}", trunc4(x))
}

pub fn fmt_opt4(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), fmt4)
}

/// Full-precision cell for machine-read CSV files (round-trips exactly).
pub fn fmt_full(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// File-name-safe method identifier.
pub fn sanitize(method: &str) -> String {
    method
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '-' })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.txt");
        atomic_write(&path, b"one").unwrap();
        atomic_write(&path, b"two").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "two");
        assert!(!path.with_file_name("x.txt.tmp").exists());
    }

    #[test]
    fn formatting_truncates() {
        assert_eq!(fmt4(0.16508604), "0.1650");
        assert_eq!(fmt_opt4(None), "NA");
        assert_eq!(sanitize("identity-feature:gender"), "identity-feature-gender");
    }
}
