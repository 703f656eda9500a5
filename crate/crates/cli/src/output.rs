//! Deterministic number formatting and file writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::CliError;

/// Scientific notation with 12 significant digits, independent of locale.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        // Also folds −0.
        "0.00000000000e0".into()
    } else if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// JSON number rounded to the same 12 digits as the CSV output; non-finite
/// values become `null`.
pub fn jnum(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = num(x).parse().expect("formatted float parses");
        Value::from(rounded)
    } else {
        Value::Null
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("--out {}: {e}", dir.display())))
}

pub struct CsvOut {
    writer: csv::Writer<fs::File>,
    path: PathBuf,
}

impl CsvOut {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self, CliError> {
        let path = dir.join(name);
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        writer
            .write_record(header)
            .map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
        Ok(Self { writer, path })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<(), CliError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer
            .write_record(fields)
            .map_err(|e| CliError::io(format!("{}: {e}", self.path.display())))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.writer
            .flush()
            .map_err(|e| CliError::io(format!("{}: {e}", self.path.display())))
    }
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    text.push('\n');
    fs::write(&path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}
