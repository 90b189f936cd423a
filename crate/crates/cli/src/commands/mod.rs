pub mod analyze;
pub mod lock;
pub mod report;
pub mod simulate;
pub mod tomo;

use anyhow::Result;
use std::path::Path;

/// Result carrying the process exit code on failure.
pub type CmdResult = std::result::Result<(), (i32, anyhow::Error)>;

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    Ok(path)
}

pub fn write_json<T: serde::Serialize>(
    dir: &Path,
    name: &str,
    value: &T,
) -> Result<std::path::PathBuf> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}
