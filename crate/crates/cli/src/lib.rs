//! Subcommands of the `nnls` tool.

pub mod commands;
pub mod config;
pub mod selfcheck;

use std::fmt;
use std::fs;
use std::path::Path;

use nnls_core::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// Error carrying its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    pub fn input(message: String) -> Self {
        Self { code: EXIT_INPUT, message }
    }

    pub fn runtime(message: String) -> Self {
        Self { code: EXIT_RUNTIME, message }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Profile(_)
            | Error::Parse(_)
            | Error::InvalidArgument(_)
            | Error::InvalidQuadrature(_)
            | Error::Cfl { .. }
            | Error::Grid(_)
            | Error::Json(_)
            | Error::Csv(_)
            | Error::Io(_) => EXIT_INPUT,
            _ => EXIT_RUNTIME,
        };
        Self { code, message: e.to_string() }
    }
}

pub(crate) fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::input(format!("{}: {e}", path.display()))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))
}

pub(crate) fn fingerprint_header(fp: &str) -> String {
    format!("config-fingerprint: {fp}")
}

pub(crate) fn f(v: f64) -> String {
    format!("{v:.17e}")
}

/// CSV writer that starts with the fingerprint comment line.
pub(crate) struct CsvOut {
    w: csv::Writer<fs::File>,
}

impl CsvOut {
    pub(crate) fn create(path: &Path, fp: &str, columns: &[&str]) -> Result<Self, Failure> {
        use std::io::Write;
        let mut file = fs::File::create(path).map_err(|e| io_failure(path, e))?;
        writeln!(file, "# {}", fingerprint_header(fp)).map_err(|e| io_failure(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(columns).map_err(|e| Failure::runtime(e.to_string()))?;
        Ok(Self { w })
    }

    pub(crate) fn row<I: IntoIterator<Item = String>>(&mut self, fields: I) -> Result<(), Failure> {
        self.w.write_record(fields.into_iter().collect::<Vec<_>>()).map_err(|e| Failure::runtime(e.to_string()))
    }

    pub(crate) fn finish(mut self) -> Result<(), Failure> {
        self.w.flush().map_err(|e| Failure::runtime(e.to_string()))
    }
}
