use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use coincidence_core::phasespace::{Quantity, ScanResult};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

pub const SCHEMA: u32 = 1;

/// One inequality or residual check inside a verification suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: Quantity,
    /// The check passes when `value <= tolerance`.
    pub tolerance: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: Quantity, tolerance: f64) -> Self {
        let passed = value.value <= tolerance;
        Check {
            name: name.into(),
            value,
            tolerance,
            passed,
            details: BTreeMap::new(),
        }
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl VerifyResult {
    pub fn new(suite: &str, checks: Vec<Check>, notes: Vec<String>) -> Self {
        VerifyResult {
            suite: suite.to_string(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            notes,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Checks whose name starts with `prefix`.
    pub fn group<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a Check> + 'a {
        self.checks.iter().filter(move |c| c.name.starts_with(prefix))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Record {
    Verify(VerifyResult),
    Scan(ScanResult),
}

impl Record {
    pub fn name(&self) -> &str {
        match self {
            Record::Verify(v) => &v.suite,
            Record::Scan(s) => &s.experiment,
        }
    }

    pub fn passed(&self) -> bool {
        match self {
            Record::Verify(v) => v.passed,
            Record::Scan(_) => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Environment {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

/// The JSON result document. Apart from `timestamp`, its content depends
/// only on the command and the configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema: u32,
    pub command: String,
    pub seed: Option<u64>,
    pub environment: Environment,
    pub config: ExperimentConfig,
    /// Set when the time budget ran out before every record was produced.
    pub partial: bool,
    pub results: Vec<Record>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl Document {
    pub fn new(command: &str, config: &ExperimentConfig, results: Vec<Record>, partial: bool) -> Self {
        Document {
            schema: SCHEMA,
            command: command.to_string(),
            seed: config.seed,
            environment: Environment::current(),
            config: config.clone(),
            partial,
            results,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
        }
    }

    pub fn passed(&self) -> bool {
        !self.partial && self.results.iter().all(Record::passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Writes `<stem>.json` plus one CSV per record into `dir`; returns the
/// paths written.
pub fn write_outputs(dir: &Path, stem: &str, doc: &Document) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    let json = dir.join(format!("{stem}.json"));
    fs::write(&json, doc.to_json()?).with_context(|| format!("writing {}", json.display()))?;
    written.push(json);
    for record in &doc.results {
        let path = dir.join(format!("{}-{}.csv", stem, record.name()));
        match record {
            Record::Scan(s) => write_scan_csv(&path, s)?,
            Record::Verify(v) => write_verify_csv(&path, v)?,
        }
        written.push(path);
    }
    Ok(written)
}

pub fn write_scan_csv(path: &Path, scan: &ScanResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["parameter", "estimate", "bound", "samples", "eta"])?;
    for p in &scan.points {
        let bound = p.bound.as_ref().map_or(String::new(), |b| b.value.to_string());
        w.write_record([
            p.parameter.to_string(),
            p.estimate.value.to_string(),
            bound,
            p.estimate.samples.to_string(),
            p.estimate.eta.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_verify_csv(path: &Path, result: &VerifyResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(["check", "residual", "tolerance", "kind", "samples", "eta", "passed"])?;
    for c in &result.checks {
        w.write_record([
            c.name.clone(),
            c.value.value.to_string(),
            c.tolerance.to_string(),
            serde_json::to_value(c.value.kind)?.as_str().unwrap_or_default().to_string(),
            c.value.samples.to_string(),
            c.value.eta.to_string(),
            c.passed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// The document with its timestamp removed, for run-to-run comparison.
pub fn without_timestamp(json: &str) -> Result<serde_json::Value> {
    let mut value: serde_json::Value = serde_json::from_str(json)?;
    if let Some(map) = value.as_object_mut() {
        map.remove("timestamp");
    }
    Ok(value)
}
