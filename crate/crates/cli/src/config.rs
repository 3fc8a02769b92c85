use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// 6401 modes up to |p| = 160; every experiment fits.
    #[default]
    Reference,
    /// 301 modes up to |p| = 6 with radius 1.5; fast, but too coarse for the decay fit.
    Desk,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub mass: f64,
    pub p_max: f64,
    pub n_modes: usize,
    pub n_max: usize,
    pub radius: f64,
    pub n_test: usize,
    pub energy: f64,
    pub kappa: f64,
}

impl ModelConfig {
    pub fn preset(preset: Preset) -> Self {
        let (p_max, n_modes, radius) = match preset {
            Preset::Reference => (160.0, 6401, 0.5),
            Preset::Desk => (6.0, 301, 1.5),
        };
        ModelConfig {
            mass: 1.0,
            p_max,
            n_modes,
            n_max: 6,
            radius,
            n_test: 3,
            energy: 1.2,
            kappa: 0.5,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelOverrides {
    mass: Option<f64>,
    p_max: Option<f64>,
    n_modes: Option<usize>,
    n_max: Option<usize>,
    radius: Option<f64>,
    n_test: Option<usize>,
    energy: Option<f64>,
    kappa: Option<f64>,
}

impl ModelOverrides {
    fn apply(self, mut m: ModelConfig) -> ModelConfig {
        m.mass = self.mass.unwrap_or(m.mass);
        m.p_max = self.p_max.unwrap_or(m.p_max);
        m.n_modes = self.n_modes.unwrap_or(m.n_modes);
        m.n_max = self.n_max.unwrap_or(m.n_max);
        m.radius = self.radius.unwrap_or(m.radius);
        m.n_test = self.n_test.unwrap_or(m.n_test);
        m.energy = self.energy.unwrap_or(m.energy);
        m.kappa = self.kappa.unwrap_or(m.kappa);
        m
    }
}

/// Schedules and sample counts of the scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Number of measurement slots `N`.
    pub slots: usize,
    pub samples: usize,
    pub max_terms: usize,
    pub symbol_scale: f64,
    pub jitter: f64,
    pub deltas: Vec<f64>,
    pub image_points: usize,
    pub probes: usize,
    pub lambdas: Vec<f64>,
    pub clustering_n_max: usize,
    pub averaging_ns: Vec<usize>,
    pub averaging_deltas: Vec<f64>,
    pub functionals: usize,
    pub lengths: Vec<f64>,
    pub ppp_exponent: f64,
    pub ppp_points: usize,
    pub momentum: f64,
    pub radii: Vec<f64>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            slots: 4,
            samples: 200,
            max_terms: 3,
            symbol_scale: 1.0,
            jitter: 1.0,
            deltas: vec![1.0, 2.0, 4.0, 8.0],
            image_points: 16,
            probes: 16,
            lambdas: vec![0.0, 2.0, 5.0, 10.0, 15.0],
            clustering_n_max: 16,
            averaging_ns: vec![4, 8, 16],
            averaging_deltas: vec![1.0, 2.0, 4.0],
            functionals: 20,
            lengths: vec![5.0, 10.0, 20.0],
            ppp_exponent: 0.5,
            ppp_points: 33,
            momentum: 0.5,
            radii: vec![1.0, 0.5, 0.25],
        }
    }
}

/// Instance counts and parameters of the verification suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub instances: usize,
    pub beta: f64,
    pub delta: f64,
    pub quadrature: usize,
    pub sweep_points: usize,
    pub bounds_p_max: f64,
    pub bounds_n_modes: usize,
    pub bounds_energy: f64,
    pub bounds_instances: usize,
    pub weyl_n_max: usize,
    pub window_energy: f64,
    pub expo_degree: u32,
    pub tau_cases: usize,
    pub fit_range: [f64; 2],
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            instances: 20,
            beta: 1.0,
            delta: 1.0,
            quadrature: 512,
            sweep_points: 1000,
            bounds_p_max: 6.0,
            bounds_n_modes: 25,
            bounds_energy: 3.2,
            bounds_instances: 50,
            weyl_n_max: 12,
            window_energy: 2.5,
            expo_degree: 8,
            tau_cases: 50,
            fit_range: [5.0, 15.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seed: Option<u64>,
    pub output: PathBuf,
    /// Measure truncation errors against a refined truncation.
    pub measure_eta: bool,
    pub budget_seconds: Option<f64>,
    pub model: ModelConfig,
    pub scan: ScanConfig,
    pub verify: VerifyConfig,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    preset: Option<Preset>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    measure_eta: Option<bool>,
    budget_seconds: Option<f64>,
    #[serde(default)]
    model: ModelOverrides,
    #[serde(default)]
    scan: ScanConfig,
    #[serde(default)]
    verify: VerifyConfig,
}

impl ExperimentConfig {
    pub fn preset(preset: Preset) -> Self {
        ExperimentConfig {
            preset,
            seed: None,
            output: PathBuf::from("results"),
            measure_eta: true,
            budget_seconds: None,
            model: ModelConfig::preset(preset),
            scan: ScanConfig::default(),
            verify: VerifyConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| anyhow!("invalid config: {e}"))?;
        let preset = file.preset.unwrap_or_default();
        let base = Self::preset(preset);
        let config = ExperimentConfig {
            preset,
            seed: file.seed,
            output: file.output.unwrap_or(base.output),
            measure_eta: file.measure_eta.unwrap_or(base.measure_eta),
            budget_seconds: file.budget_seconds,
            model: file.model.apply(base.model),
            scan: file.scan,
            verify: file.verify,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Issues::default();
        let m = &self.model;
        issues.positive("model.mass", m.mass);
        issues.positive("model.p_max", m.p_max);
        issues.positive("model.radius", m.radius);
        issues.positive("model.energy", m.energy);
        issues.positive("model.kappa", m.kappa);
        issues.count("model.n_modes", m.n_modes);
        issues.count("model.n_max", m.n_max);
        issues.count("model.n_test", m.n_test);
        if m.kappa >= 1.0 {
            issues.push("model.kappa", format!("{} is not below 1", m.kappa));
        }
        if m.n_modes % 2 == 0 {
            issues.push("model.n_modes", format!("{} is even; the grid needs a p = 0 mode", m.n_modes));
        }

        let s = &self.scan;
        issues.count("scan.slots", s.slots);
        issues.count("scan.samples", s.samples);
        issues.count("scan.max_terms", s.max_terms);
        issues.count("scan.image_points", s.image_points);
        issues.count("scan.probes", s.probes);
        issues.count("scan.clustering_n_max", s.clustering_n_max);
        issues.count("scan.functionals", s.functionals);
        issues.count("scan.ppp_points", s.ppp_points);
        issues.positive("scan.symbol_scale", s.symbol_scale);
        issues.non_negative("scan.jitter", s.jitter);
        issues.positive("scan.ppp_exponent", s.ppp_exponent);
        issues.non_negative("scan.momentum", s.momentum);
        issues.schedule("scan.deltas", &s.deltas, true);
        issues.schedule("scan.lambdas", &s.lambdas, false);
        issues.schedule("scan.averaging_deltas", &s.averaging_deltas, true);
        issues.schedule("scan.lengths", &s.lengths, true);
        let ns: Vec<f64> = s.averaging_ns.iter().map(|&n| n as f64).collect();
        issues.schedule("scan.averaging_ns", &ns, true);
        if s.averaging_ns.len() != s.averaging_deltas.len() {
            issues.push("scan.averaging_deltas", "needs one entry per averaging_ns entry".to_string());
        }
        // Ball radii shrink along the scan.
        let reversed: Vec<f64> = s.radii.iter().rev().copied().collect();
        issues.schedule("scan.radii (decreasing)", &reversed, true);

        let v = &self.verify;
        issues.count("verify.instances", v.instances);
        issues.count("verify.quadrature", v.quadrature);
        issues.count("verify.sweep_points", v.sweep_points);
        issues.count("verify.bounds_n_modes", v.bounds_n_modes);
        issues.count("verify.bounds_instances", v.bounds_instances);
        issues.count("verify.tau_cases", v.tau_cases);
        issues.positive("verify.beta", v.beta);
        issues.positive("verify.delta", v.delta);
        issues.positive("verify.bounds_p_max", v.bounds_p_max);
        issues.positive("verify.bounds_energy", v.bounds_energy);
        issues.positive("verify.window_energy", v.window_energy);
        issues.schedule("verify.fit_range", &v.fit_range, true);
        if v.weyl_n_max < 8 {
            issues.push("verify.weyl_n_max", format!("{} is below 8", v.weyl_n_max));
        }
        if let Some(b) = self.budget_seconds {
            issues.positive("budget_seconds", b);
        }
        issues.finish()
    }

    /// Seed for a sampled experiment.
    pub fn seed_for(&self, experiment: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| anyhow!("seed: required for the sampled experiment `{experiment}`"))
    }
}

#[derive(Default)]
struct Issues(Vec<(String, String)>);

impl Issues {
    fn push(&mut self, field: &str, message: String) {
        self.0.push((field.to_string(), message));
    }

    fn positive(&mut self, field: &str, x: f64) {
        if !(x > 0.0 && x.is_finite()) {
            self.push(field, format!("{x} is not strictly positive"));
        }
    }

    fn non_negative(&mut self, field: &str, x: f64) {
        if !(x >= 0.0 && x.is_finite()) {
            self.push(field, format!("{x} is negative"));
        }
    }

    fn count(&mut self, field: &str, n: usize) {
        if n == 0 {
            self.push(field, "must be at least 1".to_string());
        }
    }

    fn schedule(&mut self, field: &str, values: &[f64], positive: bool) {
        if values.is_empty() {
            self.push(field, "is empty".to_string());
        }
        if let Some(w) = values.windows(2).find(|w| !(w[1] > w[0])) {
            self.push(field, format!("not strictly increasing at {} -> {}", w[0], w[1]));
        }
        if values.iter().any(|x| !x.is_finite() || (positive && *x <= 0.0) || *x < 0.0) {
            self.push(field, "entries must be finite and positive".to_string());
        }
    }

    fn finish(self) -> Result<()> {
        if self.0.is_empty() {
            return Ok(());
        }
        Err(anyhow!(InvalidConfig(self.0)))
    }
}

/// Field-level validation failures.
#[derive(Debug)]
pub struct InvalidConfig(pub Vec<(String, String)>);

impl fmt::Display for InvalidConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config:")?;
        for (field, message) in &self.0 {
            write!(f, "\n  {field}: {message}")?;
        }
        Ok(())
    }
}

impl std::error::Error for InvalidConfig {}
