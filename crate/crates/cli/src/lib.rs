//! Experiment runner for the coincidence laboratory: verification suites,
//! parameter scans, JSON/CSV output and a markdown report.

pub mod config;
pub mod model;
pub mod output;
pub mod report;
pub mod scans;
pub mod verify;

use anyhow::Result;

pub use config::{ExperimentConfig, Preset};
pub use output::{Check, Document, Record, VerifyResult};
pub use scans::{Budget, Scan};
pub use verify::Suite;

/// Records of a run and whether the budget cut it short.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub records: Vec<Record>,
    pub partial: bool,
}

pub fn run_verify(suite: Suite, config: &ExperimentConfig, budget: &Budget) -> Result<Outcome> {
    let record = Record::Verify(suite.run(config)?);
    Ok(Outcome {
        records: vec![record],
        partial: budget.exceeded(),
    })
}

pub fn run_scan(scan: Scan, config: &ExperimentConfig, budget: &Budget) -> Result<Outcome> {
    let result = scan.run(config, budget)?;
    let partial = budget.exceeded() || result.notes.iter().any(|n| n.starts_with("partial"));
    Ok(Outcome {
        records: vec![Record::Scan(result)],
        partial,
    })
}

/// Every verification suite, then every scan. `progress` sees each record
/// as it completes.
pub fn run_suite(config: &ExperimentConfig, budget: &Budget, mut progress: impl FnMut(&Record)) -> Result<Outcome> {
    let mut records = Vec::new();
    for suite in Suite::ALL {
        if budget.exceeded() {
            return Ok(Outcome { records, partial: true });
        }
        records.push(Record::Verify(suite.run(config)?));
        progress(records.last().expect("just pushed"));
    }
    for scan in Scan::ALL {
        if budget.exceeded() {
            return Ok(Outcome { records, partial: true });
        }
        let outcome = run_scan(scan, config, budget)?;
        records.extend(outcome.records);
        progress(records.last().expect("just pushed"));
        if outcome.partial {
            return Ok(Outcome { records, partial: true });
        }
    }
    Ok(Outcome { records, partial: false })
}
