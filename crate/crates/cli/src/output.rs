//! Exit codes, report headers and atomic file output.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

/// A failed run: exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

pub fn numerical(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_NUMERICAL,
        message: message.into(),
    }
}

/// Input errors exit with 1, solver failures with 2.
pub fn exit_code(e: &aclab::Error) -> u8 {
    use aclab::Error::*;
    match e {
        NonConvergence { .. } | EnergyIncrease { .. } | NonFinite { .. } | Singular => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

impl From<aclab::Error> for Failure {
    fn from(e: aclab::Error) -> Self {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Shortest round-trip formatting used in every CSV.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Output directory plus the provenance stamped into every report.
pub struct Output {
    dir: PathBuf,
    header: Map<String, Value>,
}

impl Output {
    pub fn new(dir: &Path, command: &str, config_hash: &str, seed: u64) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create output directory {}: {e}", dir.display())))?;
        let mut header = Map::new();
        header.insert("tool".into(), json!("aclab"));
        header.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        header.insert("command".into(), json!(command));
        header.insert("config_sha256".into(), json!(config_hash));
        header.insert("seed".into(), json!(seed));
        Ok(Self {
            dir: dir.to_path_buf(),
            header,
        })
    }

    /// Writes through a temporary file in the same directory, then renames.
    pub fn write(&self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        let tmp = self.dir.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents)
            .and_then(|_| fs::rename(&tmp, &path))
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
    }

    /// Report JSON: the header followed by `body`'s fields.
    pub fn write_report(&self, name: &str, body: Value) -> Result<(), Failure> {
        let mut map = self.header.clone();
        if let Value::Object(fields) = body {
            map.extend(fields);
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("report values serialize");
        text.push('\n');
        self.write(name, &text)
    }
}
