//! Result serialization. Every run writes a data table (CSV or JSON) plus a
//! JSON sidecar holding the fully resolved config, the seed, and the crate
//! version, so any output file can be regenerated from its sidecar alone.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{Config, OutputFormat};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Sidecar<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub seed: u64,
    pub config: &'a Config,
}

/// Writes `rows` as `<dir>/<stem>.csv` or `<dir>/<stem>.json`.
pub fn write_table<T: Serialize>(
    dir: &Path,
    stem: &str,
    format: OutputFormat,
    rows: &[T],
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    match format {
        OutputFormat::Csv => {
            let path = dir.join(format!("{stem}.csv"));
            let mut writer = csv::Writer::from_path(&path)?;
            for row in rows {
                writer
                    .serialize(row)
                    .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
            }
            writer.flush()?;
            Ok(path)
        }
        OutputFormat::Json => {
            let path = dir.join(format!("{stem}.json"));
            let mut file = File::create(&path)?;
            serde_json::to_writer_pretty(&mut file, rows)
                .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
            file.write_all(b"\n")?;
            Ok(path)
        }
    }
}

/// Writes the reproducibility sidecar next to the data table.
pub fn write_sidecar(dir: &Path, stem: &str, sidecar: &Sidecar) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{stem}.config.json"));
    let mut file = File::create(&path)?;
    serde_json::to_writer_pretty(&mut file, sidecar)
        .map_err(|e| CliError::Io(std::io::Error::other(e)))?;
    file.write_all(b"\n")?;
    Ok(path)
}
