use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::{CliError, ExperimentConfig, EXIT_PASS, EXIT_VERIFICATION_FAILED};

/// Formats a float with 17 significant digits, which round-trips every
/// finite `f64` exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// A named CSV payload: one header row plus data rows of equal width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    name: String,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// File name the table is written to.
    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    /// Appends a row; panics if its width differs from the header's.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width for table {}", self.name);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    /// Not applicable to this configuration (e.g. an order fit on a problem
    /// whose errors are all exactly zero).
    Skip,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        })
    }
}

/// One asserted invariant and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            outcome: if passed { Outcome::Pass } else { Outcome::Fail },
            detail: detail.into(),
        }
    }

    pub fn skip(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            outcome: Outcome::Skip,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", self.outcome, self.name, self.detail)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    config: &'a ExperimentConfig,
    version: &'a str,
    timestamp_unix: u64,
    tables: Vec<String>,
    checks: &'a [Check],
}

/// Everything a study produced: config echo, tables and checks.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub version: &'static str,
    pub timestamp_unix: u64,
    tables: Vec<Table>,
    checks: Vec<Check>,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            version: env!("CARGO_PKG_VERSION"),
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            tables: Vec::new(),
            checks: Vec::new(),
        }
    }

    /// Returns the table with this name, creating it with `header` if absent.
    /// Studies that share a table (e.g. order fits) append to the same one.
    pub fn table_mut(&mut self, name: &str, header: &[&str]) -> &mut Table {
        let pos = match self.tables.iter().position(|t| t.name == name) {
            Some(pos) => {
                assert!(
                    self.tables[pos]
                        .header
                        .iter()
                        .map(String::as_str)
                        .eq(header.iter().copied()),
                    "header mismatch for table {name}"
                );
                pos
            }
            None => {
                self.tables.push(Table::new(name, header));
                self.tables.len() - 1
            }
        };
        &mut self.tables[pos]
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn tables(&self) -> &[Table] {
        &self.tables
    }

    pub fn add_check(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn checks(&self) -> &[Check] {
        &self.checks
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.all_passed() {
            EXIT_PASS
        } else {
            EXIT_VERIFICATION_FAILED
        }
    }

    /// One `PASS|FAIL|SKIP name: detail` line per check.
    pub fn summary_lines(&self) -> Vec<String> {
        self.checks.iter().map(ToString::to_string).collect()
    }

    /// Writes every table as `<name>.csv` plus `manifest.json` into `dir`,
    /// creating it if needed. Returns the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut written = Vec::with_capacity(self.tables.len() + 1);
        for table in &self.tables {
            let path = dir.join(table.file_name());
            std::fs::write(&path, table.to_csv()?).map_err(io(&path))?;
            written.push(path);
        }
        let manifest = Manifest {
            config: &self.config,
            version: self.version,
            timestamp_unix: self.timestamp_unix,
            tables: self.tables.iter().map(Table::file_name).collect(),
            checks: &self.checks,
        };
        let path = dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(io(&path))?;
        written.push(path);
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        let samples = [
            0.1,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            f64::MAX,
            -std::f64::consts::E,
            5e-324,
            0.0,
            -0.0,
            1e-300,
            123456789.12345679,
        ];
        for x in samples {
            let s = format_float(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        let mut x = 0.7_f64;
        for _ in 0..2000 {
            x = (x * 3.9 * (1.0 - x)).abs();
            let y = x * 1e-7;
            assert_eq!(format_float(y).parse::<f64>().unwrap().to_bits(), y.to_bits());
        }
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new("demo", &["k", "value"]);
        t.push(vec!["0".into(), format_float(0.5)]);
        let text = String::from_utf8(t.to_csv().unwrap()).unwrap();
        assert_eq!(text, "k,value\n0,5.0000000000000000e-1\n");
    }

    #[test]
    #[should_panic]
    fn ragged_row_rejected() {
        Table::new("demo", &["a", "b"]).push(vec!["1".into()]);
    }

    #[test]
    fn shared_tables_append_and_exit_codes() {
        let mut r = ExperimentReport::new(ExperimentConfig::default());
        r.table_mut("fits", &["study", "h"]).push(vec!["a".into(), "1".into()]);
        r.table_mut("fits", &["study", "h"]).push(vec!["b".into(), "2".into()]);
        assert_eq!(r.tables().len(), 1);
        assert_eq!(r.table("fits").unwrap().rows().len(), 2);
        assert_eq!(r.exit_code(), EXIT_PASS);
        r.add_check(Check::skip("fit", "all zero"));
        assert_eq!(r.exit_code(), EXIT_PASS);
        r.add_check(Check::new("dominance", false, "worst ratio 2"));
        assert_eq!(r.exit_code(), EXIT_VERIFICATION_FAILED);
        assert_eq!(r.summary_lines()[1], "FAIL dominance: worst ratio 2");
        assert_eq!(r.summary_lines()[0], "SKIP fit: all zero");
    }

    #[test]
    fn writes_tables_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = ExperimentReport::new(ExperimentConfig::default());
        r.table_mut("errors", &["k"]).push(vec!["0".into()]);
        let paths = r.write(&dir.path().join("nested")).unwrap();
        assert_eq!(paths.len(), 2);
        let manifest: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("nested/manifest.json")).unwrap()).unwrap();
        assert_eq!(manifest["config"]["N"], 10);
        assert_eq!(manifest["config"]["coarse"], "forward-euler");
        assert_eq!(manifest["tables"][0], "errors.csv");
    }
}
