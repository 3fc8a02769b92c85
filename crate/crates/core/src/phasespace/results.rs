use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    Exact,
    LowerBound,
    Quadrature,
}

/// A reported number with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quantity {
    pub value: f64,
    pub kind: ValueKind,
    /// Measured truncation error, zero where the evaluation is exact.
    pub eta: f64,
    pub samples: usize,
}

impl Quantity {
    pub fn exact(value: f64) -> Self {
        Quantity {
            value,
            kind: ValueKind::Exact,
            eta: 0.0,
            samples: 1,
        }
    }

    pub fn lower_bound(value: f64, samples: usize) -> Self {
        Quantity {
            value,
            kind: ValueKind::LowerBound,
            eta: 0.0,
            samples,
        }
    }

    pub fn quadrature(value: f64, eta: f64, samples: usize) -> Self {
        Quantity {
            value,
            kind: ValueKind::Quadrature,
            eta,
            samples,
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub parameter: f64,
    pub estimate: Quantity,
    pub bound: Option<Quantity>,
    /// Auxiliary numbers, keyed by name.
    pub details: BTreeMap<String, f64>,
}

impl ScanPoint {
    pub fn new(parameter: f64, estimate: Quantity) -> Self {
        ScanPoint {
            parameter,
            estimate,
            bound: None,
            details: BTreeMap::new(),
        }
    }

    pub fn with_bound(mut self, bound: Quantity) -> Self {
        self.bound = Some(bound);
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }
}

/// One scan over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub experiment: String,
    /// Name of the scanned parameter.
    pub parameter: String,
    pub seed: Option<u64>,
    pub points: Vec<ScanPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ScanResult {
    pub fn new(experiment: &str, parameter: &str, seed: Option<u64>) -> Self {
        ScanResult {
            experiment: experiment.to_string(),
            parameter: parameter.to_string(),
            seed,
            points: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.estimate.value).collect()
    }
}
