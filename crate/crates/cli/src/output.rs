//! Artifact writing: every file goes to a temporary sibling first and is
//! renamed into place.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let target = self.path(name);
        let mut tmp = NamedTempFile::new_in(&self.root).map_err(|e| CliError::io(&self.root, e))?;
        tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
        tmp.persist(&target).map_err(|e| CliError::io(&target, e.error))?;
        Ok(target)
    }

    pub fn write_csv<R: Serialize>(&self, name: &str, rows: &[R]) -> CliResult<PathBuf> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)
                .map_err(|e| CliError::io(self.path(name), std::io::Error::other(e)))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| CliError::io(self.path(name), std::io::Error::other(e.to_string())))?;
        self.write_bytes(name, &bytes)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::io(self.path(name), std::io::Error::other(e)))?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}

/// One named check with its measured value.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

/// Accumulates checks; the command fails if any of them fails.
#[derive(Debug, Default)]
pub struct Checks {
    rows: Vec<CheckRow>,
}

impl Checks {
    pub fn at_most(&mut self, check: impl Into<String>, value: f64, limit: f64) {
        self.rows.push(CheckRow {
            check: check.into(),
            value,
            limit,
            pass: value <= limit,
        });
    }

    pub fn at_least(&mut self, check: impl Into<String>, value: f64, limit: f64) {
        self.rows.push(CheckRow {
            check: check.into(),
            value,
            limit,
            pass: value >= limit,
        });
    }

    pub fn rows(&self) -> &[CheckRow] {
        &self.rows
    }

    /// Prints every check and returns an assertion error naming the
    /// failures.
    pub fn finish(&self) -> CliResult<()> {
        for r in &self.rows {
            println!(
                "{} {}: {:e} (limit {:e})",
                if r.pass { "ok  " } else { "FAIL" },
                r.check,
                r.value,
                r.limit
            );
        }
        let failed: Vec<&str> = self.rows.iter().filter(|r| !r.pass).map(|r| r.check.as_str()).collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Assertion(failed.join("; ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::create(&dir.path().join("nested")).unwrap();
        out.write_bytes("a.txt", b"first").unwrap();
        let p = out.write_bytes("a.txt", b"second").unwrap();
        assert_eq!(std::fs::read_to_string(p).unwrap(), "second");
        let names: Vec<_> = std::fs::read_dir(dir.path().join("nested")).unwrap().collect();
        assert_eq!(names.len(), 1);
    }

    #[test]
    fn checks_report_failures() {
        let mut c = Checks::default();
        c.at_most("small", 1e-9, 1e-8);
        assert!(c.finish().is_ok());
        c.at_least("ratio", 2.0, 3.5);
        assert!(matches!(c.finish(), Err(CliError::Assertion(m)) if m == "ratio"));
    }
}
