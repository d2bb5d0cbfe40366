use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolve `--out`, falling back to `<out_dir>/<default_name>`.
pub fn resolve(out: &Option<PathBuf>, out_dir: &Path, default_name: &str) -> PathBuf {
    out.clone().unwrap_or_else(|| out_dir.join(default_name))
}

/// Write a CSV file: `#` provenance lines, the column header, then rows.
pub fn write_csv<C: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    header: &str,
    rows: impl IntoIterator<Item = String>,
) -> Result<(), CliError> {
    let mut body = String::new();
    body.push_str(&format!("# ipsbell {VERSION}\n"));
    body.push_str(&format!("# command: {command}\n"));
    body.push_str(&format!("# config: {}\n", to_json(config)?));
    body.push_str(header);
    body.push('\n');
    for row in rows {
        body.push_str(&row);
        body.push('\n');
    }
    write_file(path, body.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::io)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(CliError::io)?;
        }
    }
    let mut file = fs::File::create(path).map_err(CliError::io)?;
    file.write_all(bytes).map_err(CliError::io)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string(value).map_err(CliError::io)
}

/// Summary line on stdout.
pub fn print_summary<T: Serialize>(value: &T) -> Result<(), CliError> {
    println!("{}", to_json(value)?);
    Ok(())
}
