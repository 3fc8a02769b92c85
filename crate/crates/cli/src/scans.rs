use std::time::{Duration, Instant};

use anyhow::Result;
use clap::ValueEnum;
use coincidence_core::linalg::c;
use coincidence_core::phasespace::{
    averaging_experiment, clustering_experiment, diameter, epsilon_content, image_set, one_particle_functional,
    pi_norm_estimate, ppp_averaging, sharp_momentum_experiment, AveragingParams, PppParams, Quantity, SampleSpec,
    ScanPoint, ScanResult, SharpParams, WeylPolynomial, WindowModel,
};
use coincidence_core::rng::seeded;
use coincidence_core::singleparticle::FieldVector;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::model::{random_symbol, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scan {
    Pinorm,
    Epscontent,
    Clustering,
    Averaging,
    Ppp,
    Sharp,
}

/// Wall-clock allowance shared by the cells of a run.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    start: Instant,
    limit: Option<Duration>,
}

impl Budget {
    pub fn new(seconds: Option<f64>) -> Self {
        Budget {
            start: Instant::now(),
            limit: seconds.map(Duration::from_secs_f64),
        }
    }

    pub fn unlimited() -> Self {
        Self::new(None)
    }

    pub fn exceeded(&self) -> bool {
        self.limit.is_some_and(|l| self.start.elapsed() > l)
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}

const BUDGET_NOTE: &str = "partial: time budget exhausted";

impl Scan {
    pub const ALL: [Scan; 6] = [Scan::Pinorm, Scan::Epscontent, Scan::Clustering, Scan::Averaging, Scan::Ppp, Scan::Sharp];

    pub fn name(self) -> &'static str {
        match self {
            Scan::Pinorm => "pinorm",
            Scan::Epscontent => "epscontent",
            Scan::Clustering => "clustering",
            Scan::Averaging => "averaging",
            Scan::Ppp => "ppp",
            Scan::Sharp => "sharp",
        }
    }

    pub fn run(self, config: &ExperimentConfig, budget: &Budget) -> Result<ScanResult> {
        let seed = config.seed_for(self.name())?;
        let model = Model::build(config)?;
        match self {
            Scan::Pinorm => pinorm(config, &model, seed, budget),
            Scan::Epscontent => epscontent(config, &model, seed, budget),
            Scan::Clustering => clustering(config, &model, seed),
            Scan::Averaging => averaging(config, &model, seed),
            Scan::Ppp => ppp(config, &model, seed),
            Scan::Sharp => sharp(config, &model, seed),
        }
    }
}

/// Shared by the norm and content scans, so both see the same slot tuples.
fn sample_spec(config: &ExperimentConfig, seed: u64) -> SampleSpec {
    let s = &config.scan;
    SampleSpec {
        slots: s.slots,
        max_terms: s.max_terms,
        symbol_scale: s.symbol_scale,
        jitter: s.jitter,
        seed,
    }
}

fn pinorm(config: &ExperimentConfig, model: &Model, seed: u64, budget: &Budget) -> Result<ScanResult> {
    let window = WindowModel::new(&model.basis, config.model.energy)?;
    let spec = sample_spec(config, seed);
    let samples = config.scan.samples;
    let mut result = ScanResult::new("pinorm", "delta", Some(seed));
    for &delta in &config.scan.deltas {
        if budget.exceeded() {
            result.notes.push(BUDGET_NOTE.to_string());
            break;
        }
        let est = pi_norm_estimate(&window, &model.frame, &spec, delta, samples)?;
        result.points.push(
            ScanPoint::new(delta, Quantity::lower_bound(est.best_norm, samples))
                .detail("best_form", est.best_form)
                .detail("argmax", est.argmax as f64),
        );
    }
    Ok(result)
}

fn epscontent(config: &ExperimentConfig, model: &Model, seed: u64, budget: &Budget) -> Result<ScanResult> {
    let window = WindowModel::new(&model.basis, config.model.energy)?;
    let spec = sample_spec(config, seed);
    let s = &config.scan;
    let mut result = ScanResult::new("epscontent", "delta", Some(seed));
    let mut eps = None;
    for &delta in &s.deltas {
        if budget.exceeded() {
            result.notes.push(BUDGET_NOTE.to_string());
            break;
        }
        let d = image_set(&window, &model.frame, &spec, delta, s.image_points, s.probes)?.distances();
        let diam = diameter(&d);
        let eps = *eps.get_or_insert(diam / 10.0);
        let content = epsilon_content(&d, eps);
        result.points.push(
            ScanPoint::new(delta, Quantity::lower_bound(content as f64, s.image_points))
                .detail("diameter", diam)
                .detail("epsilon", eps)
                .detail("probes", s.probes as f64),
        );
    }
    Ok(result)
}

fn clustering(config: &ExperimentConfig, model: &Model, seed: u64) -> Result<ScanResult> {
    let mut rng = seeded(seed);
    let f = random_symbol(&model.frame, &mut rng, 0.5)?;
    let mass = config.model.mass;
    let lambdas: Vec<f64> = config.scan.lambdas.iter().map(|&l| model.basis.snap(l / mass)).collect();
    let mut result = clustering_experiment(&f, &f, &lambdas, config.scan.clustering_n_max)?;
    result.seed = Some(seed);
    Ok(result)
}

fn averaging(config: &ExperimentConfig, model: &Model, seed: u64) -> Result<ScanResult> {
    let window = WindowModel::new(&model.basis, config.model.energy)?;
    let mut rng = seeded(seed);
    let slot = WeylPolynomial::centered_cosine(&random_symbol(&model.frame, &mut rng, 1.0)?);
    let s = &config.scan;
    let params = AveragingParams {
        ns: s.averaging_ns.clone(),
        deltas: s.averaging_deltas.clone(),
        functionals: s.functionals,
        seed,
    };
    Ok(averaging_experiment(&window, config.model.radius, &slot, &params)?)
}

/// Narrow Gaussian wave packet around `p = 0`.
fn wave_packet(model: &Model) -> FieldVector {
    FieldVector::from_fn(&model.basis, |p, _| c((-(p / 0.2).powi(2)).exp()))
}

fn ppp(config: &ExperimentConfig, model: &Model, seed: u64) -> Result<ScanResult> {
    let window = WindowModel::new(&model.basis, config.model.energy)?;
    let mut rng = seeded(seed);
    let slot = WeylPolynomial::centered_weyl(random_symbol(&model.frame, &mut rng, 0.8)?);
    let omega = one_particle_functional(&window, &wave_packet(model))?;
    let s = &config.scan;
    let params = PppParams {
        lengths: s.lengths.iter().map(|l| l / config.model.mass).collect(),
        exponent: s.ppp_exponent,
        points: s.ppp_points,
    };
    let mut result = ppp_averaging(&window, &omega, &slot, &params)?;
    result.seed = Some(seed);
    Ok(result)
}

fn sharp(config: &ExperimentConfig, model: &Model, seed: u64) -> Result<ScanResult> {
    let mut rng = seeded(seed);
    let slot = WeylPolynomial::sample(&model.frame, 2, 1.0, &mut rng)?;
    let s = &config.scan;
    let params = SharpParams::on_shell(config.model.mass, s.momentum, s.radii.clone(), s.functionals, seed);
    Ok(sharp_momentum_experiment(&model.basis, &slot, &params)?)
}
