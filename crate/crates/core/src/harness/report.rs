//! Pass/fail checks and the on-disk report: `report.json`, one CSV per
//! table, and `metadata.json` holding the only timestamp.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::Result;

/// Where a threshold comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdSource {
    /// A constant fixed by the theory (a proof constant or exact identity).
    TheoryConstant,
    /// A numerical tolerance taken from the config.
    ConfigTolerance,
}

impl ThresholdSource {
    pub fn tag(self) -> &'static str {
        match self {
            Self::TheoryConstant => "theory-constant",
            Self::ConfigTolerance => "config-tolerance",
        }
    }
}

/// `measured <= threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub source: ThresholdSource,
    pub passed: bool,
}

impl Check {
    pub fn le(name: impl Into<String>, measured: f64, threshold: f64, source: ThresholdSource) -> Self {
        Self { name: name.into(), measured, threshold, source, passed: measured <= threshold }
    }

    /// A check that failed outright, e.g. because the quantity could not be computed.
    pub fn failed(name: impl Into<String>, threshold: f64, source: ThresholdSource) -> Self {
        Self { name: name.into(), measured: f64::NAN, threshold, source, passed: false }
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: measured {:.6e} <= threshold {:.6e} [{}]",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold,
            self.source.tag()
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub experiment: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub table_files: Vec<String>,
    pub passed: bool,
    #[serde(skip)]
    pub tables: Vec<(String, String)>,
}

impl TheoremReport {
    pub fn new(experiment: impl Into<String>) -> Self {
        Self { experiment: experiment.into(), checks: Vec::new(), notes: Vec::new(), table_files: Vec::new(), passed: true, tables: Vec::new() }
    }

    pub fn check(&mut self, c: Check) {
        self.passed &= c.passed;
        self.checks.push(c);
    }

    pub fn note(&mut self, n: impl Into<String>) {
        self.notes.push(n.into());
    }

    pub fn table(&mut self, file: impl Into<String>, body: String) {
        let file = file.into();
        self.table_files.push(file.clone());
        self.tables.push((file, body));
    }

    pub fn table_body(&self, file: &str) -> Option<&str> {
        self.tables.iter().find(|(f, _)| f == file).map(|(_, b)| b.as_str())
    }

    pub fn lines(&self) -> Vec<String> {
        self.checks.iter().map(Check::line).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Writes `report.json`, the tables and `metadata.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("report.json"), self.to_json() + "\n")?;
        for (file, body) in &self.tables {
            fs::write(dir.join(file), body)?;
        }
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let meta = serde_json::json!({
            "experiment": self.experiment,
            "written_unix_seconds": secs,
            "version": env!("CARGO_PKG_VERSION"),
        });
        fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checks_and_json() {
        let mut r = TheoremReport::new("demo");
        r.check(Check::le("a", 1e-3, 2e-3, ThresholdSource::ConfigTolerance));
        assert!(r.passed);
        r.check(Check::failed("b", 1.0, ThresholdSource::TheoryConstant));
        assert!(!r.passed);
        assert!(r.lines()[0].starts_with("PASS a"));
        assert!(r.lines()[1].contains("[theory-constant]"));
        r.table("t.csv", "x\n1\n".into());
        let json = r.to_json();
        assert!(json.contains("\"config-tolerance\""));
        assert!(json.contains("t.csv"));
        let dir = tempfile::tempdir().unwrap();
        r.write(dir.path()).unwrap();
        assert_eq!(fs::read_to_string(dir.path().join("t.csv")).unwrap(), "x\n1\n");
        assert!(dir.path().join("metadata.json").exists());
    }
}
