//! Model files, reports, and output plumbing.

mod model_file;
mod report;

pub use model_file::{
    deserialize_model, serialize_model, RunMetadata, MODEL_FORMAT, MODEL_VERSION,
};
pub use report::{
    config_hash, provenance_line, read_points_csv, summary_json, write_predictions_csv,
    write_suite_outputs, SuiteOutputs,
};

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{CfnnError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes a file through a temporary sibling that is renamed into place only
/// after `write` succeeds, so a failure never leaves a partial file behind.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| CfnnError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CfnnError::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        write(&mut buf).map_err(|e| CfnnError::io(path, e))?;
        buf.flush().map_err(|e| CfnnError::io(path, e))?;
    }
    tmp.persist(path)
        .map_err(|e| CfnnError::io(path, e.error))?;
    Ok(())
}
