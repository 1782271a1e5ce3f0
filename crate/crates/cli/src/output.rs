use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub(crate) fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub(crate) fn write_csv<T: Serialize>(path: &Path, rows: &[T], header: Option<&str>) -> Result<PathBuf> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(header.is_none())
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    if let Some(h) = header {
        w.write_record(h.split(','))?;
    }
    for row in rows {
        w.serialize(row).with_context(|| format!("writing {}", path.display()))?;
    }
    w.flush()?;
    Ok(path.to_path_buf())
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}
