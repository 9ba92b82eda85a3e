//! Deterministic output formatting: CSV data files carry the config
//! hash on the first line, headers on the second, and every number with
//! 17 significant digits; JSON reports embed the hash as a field. No
//! timestamps anywhere, so reruns are byte-identical.

use std::io::Write;
use std::path::Path;

use crate::CliError;

/// 17 significant digits, '.'-decimal, stable across reruns.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct CsvWriter {
    buf: String,
}

impl CsvWriter {
    pub fn new(config_hash: &str, columns: &[&str]) -> Self {
        let mut buf = String::new();
        buf.push_str(&format!("# config_hash={config_hash}\n"));
        buf.push_str(&columns.join(","));
        buf.push('\n');
        Self { buf }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_f64(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

/// Write to the path when given, otherwise to stdout.
pub fn emit(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent).map_err(|e| {
                        CliError::Config(format!("cannot create {}: {e}", parent.display()))
                    })?;
                }
            }
            std::fs::write(path, content)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content.as_bytes())
                .map_err(|e| CliError::Config(format!("stdout write failed: {e}")))
        }
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("JSON serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}
