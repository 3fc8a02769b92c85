use std::f64::consts::PI;
use std::sync::Arc;

use anyhow::Result;
use clap::ValueEnum;
use coincidence_core::analytic::{conformal_map, g_function, tensor_instance, verify_claim_identity, DampingParams};
use coincidence_core::fock::{
    annihilator, low_sector, normal_ordered_weyl_coeffs, weyl_coeffs, weyl_verified, EnergyFunctional, FockBasis,
    SamplingMode,
};
use coincidence_core::linalg::{c, hermitian_eigen, operator_norm, CMatrix, CVector, C64};
use coincidence_core::multiindex::{
    arrow_ratio, creation_residual, expo_check, mu_bound, prodstate_bounds, series_bound, summunu_check, tau_formula,
    tau_norm_bound, tau_weyl_bruteforce, Bundle, CorrelationContext, EBasisCoefficients, MultiIndex, PairBundle,
    SContext, TauFunctional,
};
use coincidence_core::phasespace::{s_vanishing_check, AdmissibleConfig, Quantity, WindowModel};
use coincidence_core::rng::{seeded, Rng};
use coincidence_core::singleparticle::{decay_fit, measured_g, FieldVector, Sign};
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::model::{random_symbol, spectrum, Model};
use crate::output::{Check, VerifyResult};

/// Eigenmodes of `T` used by the multiindex checks.
const MODES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma42,
    Claim,
    Taudual,
    Energybounds,
    Expansions,
    Bounds,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Lemma42,
        Suite::Claim,
        Suite::Taudual,
        Suite::Energybounds,
        Suite::Expansions,
        Suite::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma42 => "lemma42",
            Suite::Claim => "claim",
            Suite::Taudual => "taudual",
            Suite::Energybounds => "energybounds",
            Suite::Expansions => "expansions",
            Suite::Bounds => "bounds",
        }
    }

    pub fn run(self, config: &ExperimentConfig) -> Result<VerifyResult> {
        let seed = config.seed_for(self.name())?;
        match self {
            Suite::Lemma42 => lemma42(config, seed),
            Suite::Claim => claim(config, seed),
            Suite::Taudual => taudual(config, seed),
            Suite::Energybounds => energybounds(config, seed),
            Suite::Expansions => expansions(config, seed),
            Suite::Bounds => bounds(config, seed),
        }
    }
}

/// The normal-ordered alternating sum over partitions vanishes on the energy
/// window once `N > 2E/m`; computed by partition sum and by the product of
/// `M(f) - M(0)` maps.
fn lemma42(config: &ExperimentConfig, seed: u64) -> Result<VerifyResult> {
    let model = Model::build(config)?;
    let window = WindowModel::new(&model.basis, config.model.energy)?;
    let mut rng = seeded(seed);
    let phis: Vec<EnergyFunctional> = (0..config.verify.instances)
        .map(|_| window.sample_functional(SamplingMode::Signed, &mut rng))
        .collect::<Result<_, _>>()?;
    let n = config.scan.slots;
    let mut checks = Vec::new();
    for k in 0..config.verify.instances {
        let delta = config.scan.deltas[k % config.scan.deltas.len()];
        let gaps: Vec<f64> = (1..n).map(|_| config.scan.jitter * rng.random::<f64>()).collect();
        let sites = AdmissibleConfig::from_gaps(&model.basis, n, delta, config.model.radius, &gaps)?;
        let symbols: Vec<FieldVector> = (0..n)
            .map(|_| random_symbol(&model.frame, &mut rng, config.scan.symbol_scale))
            .collect::<Result<_>>()?;
        let s = s_vanishing_check(&window, &phis, &sites, &symbols)?;
        let value = Quantity::exact(s.residual()).with_samples(s.functionals);
        checks.push(
            Check::new(format!("S[{k}]"), value, 1e-10 * s.scale)
                .detail("scale", s.scale)
                .detail("delta", delta),
        );
        checks.push(Check::new(format!("routes[{k}]"), Quantity::exact(s.cross), 1e-10 * s.scale));
    }
    let mut notes = Vec::new();
    let degree = window.window().degree();
    if degree > config.model.n_max {
        notes.push(format!("window holds {degree} particles, above n_max = {}", config.model.n_max));
    }
    Ok(VerifyResult::new("lemma42", checks, notes))
}

fn gaussian_matrix(n: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

fn positive_hamiltonian(n: usize, rng: &mut Rng) -> CMatrix {
    let g = gaussian_matrix(n, rng);
    let h = (&g + g.adjoint()) * c(0.25);
    let (e, _) = hermitian_eigen(&h);
    h - CMatrix::identity(n, n) * c(e[0])
}

fn unit_vector(n: usize, rng: &mut Rng) -> CVector {
    let v = CVector::from_fn(n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / c(norm)
}

/// Conformal boundary values and the ring/core splitting of products of
/// commuting observables on tensor-product instances.
fn claim(config: &ExperimentConfig, seed: u64) -> Result<VerifyResult> {
    let v = &config.verify;
    let params = DampingParams::new(v.beta, v.delta)?;
    let mut rng = seeded(seed);
    let mut checks = Vec::new();
    for k in 0..v.instances {
        let h1 = positive_hamiltonian(4, &mut rng);
        let h2 = positive_hamiltonian(4, &mut rng);
        let a1 = gaussian_matrix(4, &mut rng);
        let b2 = gaussian_matrix(4, &mut rng);
        let (a, b, h) = tensor_instance(&a1, &b2, &h1, &h2);
        let psi1 = unit_vector(16, &mut rng);
        let psi2 = unit_vector(16, &mut rng);
        let r = verify_claim_identity(&a, &b, &h, &params, &psi1, &psi2, v.quadrature)?;
        checks.push(Check::new(format!("claim[{k}]"), Quantity::quadrature(r, 0.0, v.quadrature), 1e-7));
    }

    let g0 = (g_function(&params, 0.0)? - v.delta).abs();
    let gpi = (g_function(&params, PI)? + v.delta).abs();
    checks.push(Check::new("g(0) = delta", Quantity::exact(g0), 1e-12));
    checks.push(Check::new("g(pi) = -delta", Quantity::exact(gpi), 1e-12));

    let gamma = params.gamma();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for k in 0..v.sweep_points {
        let phi = -PI + 2.0 * PI * (k as f64 + 0.5) / v.sweep_points as f64;
        if (phi.abs() - gamma).abs() < 1e-3 || (phi.abs() - (PI - gamma)).abs() < 1e-3 {
            continue;
        }
        let z = conformal_map(&params, C64::from_polar(1.0, phi))?;
        worst = worst.max((z.re - g_function(&params, phi)?).abs());
        used += 1;
    }
    checks.push(
        Check::new("boundary sweep", Quantity::exact(worst).with_samples(used), 1e-9)
            .detail("skipped", (v.sweep_points - used) as f64),
    );
    Ok(VerifyResult::new("claim", checks, Vec::new()))
}

fn random_multiindex(len: usize, degree: u32, rng: &mut Rng) -> MultiIndex {
    let mut e = vec![0u32; len];
    for _ in 0..degree {
        e[rng.random_range(0..len)] += 1;
    }
    MultiIndex::new(e)
}

fn random_pair_bundle(slots: usize, len: usize, degree: u32, rng: &mut Rng) -> Result<PairBundle> {
    let pairs = slots * (slots - 1) / 2;
    let mut plus = vec![MultiIndex::zeros(len); pairs];
    let mut minus = vec![MultiIndex::zeros(len); pairs];
    for _ in 0..degree {
        let p = rng.random_range(0..pairs);
        let k = rng.random_range(0..len);
        let target = if rng.random::<bool>() { &mut plus[p] } else { &mut minus[p] };
        *target = target.add(&MultiIndex::unit(len, k));
    }
    Ok(PairBundle::new(slots, plus, minus)?)
}

/// Closed form of `tau_mu(W(f))` against the Fock-space vacuum matrix
/// element, plus the functional norm bound.
fn taudual(config: &ExperimentConfig, seed: u64) -> Result<VerifyResult> {
    let modes = 3;
    let fb = FockBasis::abstract_modes(modes, config.verify.weyl_n_max)?;
    let mut rng = seeded(seed);
    let mut checks = Vec::new();
    for case in 0..config.verify.tau_cases {
        let degree = (case % 4) as u32;
        let split = rng.random_range(0..=degree);
        let mu_plus = random_multiindex(modes, split, &mut rng);
        let mu_minus = random_multiindex(modes, degree - split, &mut rng);
        let raw: Vec<C64> = (0..modes)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let target = rng.random::<f64>();
        let coeffs: Vec<C64> = raw.iter().map(|z| z * (target / norm)).collect();
        let e = EBasisCoefficients::new(coeffs.iter().map(|z| z.re).collect(), coeffs.iter().map(|z| z.im).collect());

        let (brute, eta) = tau_weyl_bruteforce(&fb, &mu_plus, &mu_minus, &coeffs)?;
        let formula = tau_formula(&mu_plus, &mu_minus, &e, target * target);
        let gap = (brute - c(formula)).norm();
        checks.push(
            Check::new(format!("routes[{case}]"), Quantity::exact(gap).with_eta(eta), 1e-8 + eta)
                .detail("degree", degree as f64)
                .detail("formula", formula),
        );

        let tau = TauFunctional::new(&fb, &mu_plus, &mu_minus)?;
        let bound = tau_norm_bound(&Bundle {
            plus: vec![mu_plus],
            minus: vec![mu_minus],
        });
        checks.push(Check::new(format!("norm[{case}]"), Quantity::exact(tau.norm()), bound));
    }
    Ok(VerifyResult::new("taudual", checks, Vec::new()))
}

/// `|a(f_1) ... a(f_n) P_E| <= (E/m)^{n/2} prod |f_i|` by singular values,
/// with no slack.
fn energybounds(config: &ExperimentConfig, seed: u64) -> Result<VerifyResult> {
    let v = &config.verify;
    let basis = coincidence_core::singleparticle::ModeBasis::shared(config.model.mass, v.bounds_p_max, v.bounds_n_modes)?;
    let energy = v.bounds_energy;
    let fb = FockBasis::energy_window(&basis, energy)?;
    let rows: Vec<usize> = (0..fb.dim()).collect();
    let cols = fb.window(energy)?;
    let ratio = energy / basis.mass();
    let mut rng = seeded(seed);
    let mut checks = Vec::new();
    for n in 1..=3 {
        for k in 0..v.bounds_instances {
            let mut product: Option<coincidence_core::fock::FockOperator> = None;
            let mut norms = 1.0;
            for _ in 0..n {
                let width = 0.1 + 3.0 * rng.random::<f64>();
                let amps: Vec<C64> = basis
                    .momenta()
                    .iter()
                    .map(|p| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * (-(p / width).powi(2)).exp())
                    .collect();
                let f = FieldVector::new(&basis, amps)?;
                norms *= f.norm();
                let a = annihilator(&fb, &f)?;
                product = Some(match product {
                    None => a,
                    Some(p) => p.compose(&a),
                });
            }
            let op = product.expect("n >= 1");
            let value = operator_norm(&op.block(&rows, &cols));
            let bound = ratio.powf(n as f64 / 2.0) * norms;
            checks.push(
                Check::new(format!("n={n}[{k}]"), Quantity::exact(value), bound).detail("ratio", value / bound),
            );
        }
    }
    let notes = vec![format!("grid p_max = {}, {} modes, E = {energy}, window dimension {}", v.bounds_p_max, v.bounds_n_modes, cols.len())];
    Ok(VerifyResult::new("energybounds", checks, notes))
}

fn sites(model: &Model, count: usize, delta: f64) -> Vec<f64> {
    let b = &model.basis;
    let step = b.snap(2.0 * model.frame.radius() + delta + b.lattice_spacing());
    (0..count).map(|i| b.snap(i as f64 * step)).collect()
}

/// Weyl calculus on the particle-number truncation, and the normal-ordered,
/// exponential and creation-operator expansions over the eigenbasis of `T`.
fn expansions(config: &ExperimentConfig, seed: u64) -> Result<VerifyResult> {
    let v = &config.verify;
    let mut rng = seeded(seed);
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let modes = 2;
    let fb = FockBasis::abstract_modes(modes, v.weyl_n_max)?;
    let sector = (v.weyl_n_max / 3) as u32;
    let low = low_sector(&fb, sector);
    let vacuum = fb.vacuum();
    if !config.measure_eta {
        notes.push("truncation errors not measured".to_string());
    }
    for k in 0..v.instances {
        let raw: Vec<C64> = (0..modes)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let target = (k + 1) as f64 / v.instances as f64;
        let coeffs: Vec<C64> = raw.iter().map(|z| z * (target / norm)).collect();
        let (w, eta) = if config.measure_eta {
            weyl_verified(&fb, &coeffs, sector)?
        } else {
            (weyl_coeffs(&fb, &coeffs)?, 0.0)
        };
        let damping = (-0.5 * target * target).exp();
        let vac = (w.matrix()[(vacuum, vacuum)] - c(damping)).norm();
        let normal = normal_ordered_weyl_coeffs(&fb, &coeffs)?;
        let gap = operator_norm(&(w.block(&low, &low) - normal.block(&low, &low) * c(damping)));
        checks.push(Check::new(format!("weyl vacuum[{k}]"), Quantity::exact(vac).with_eta(eta), 1e-6).detail("norm", target));
        checks.push(Check::new(format!("weyl normal order[{k}]"), Quantity::exact(gap).with_eta(eta), 1e-6).detail("norm", target));
        if config.measure_eta {
            checks.push(Check::new(format!("weyl eta[{k}]"), Quantity::exact(eta), 1e-6));
        }
    }

    let model = Model::build(config)?;
    let energy = v.window_energy;
    let s = spectrum(&model, energy)?;
    let ctx = CorrelationContext::new(Arc::clone(&s), MODES, sites(&model, 2, 1.0))?;
    let window = FockBasis::energy_window(&model.basis, energy)?;
    let sctx = SContext::new(ctx, window.clone(), energy)?;
    for k in 0..3 {
        let phi = EnergyFunctional::sample(&window, energy, SamplingMode::Default, &mut rng)?;
        let symbols = [random_symbol(&model.frame, &mut rng, 0.6)?, random_symbol(&model.frame, &mut rng, 0.6)?];
        let check = summunu_check(&sctx, &phi, &symbols)?;
        checks.push(
            Check::new(format!("summunu[{k}]"), Quantity::exact(check.residual), 1e-8 + check.tail_bound)
                .detail("reconstruction", check.reconstruction)
                .detail("terms", check.terms as f64),
        );
    }

    let s = spectrum(&model, config.model.energy)?;
    for (k, (count, delta)) in [(2, 0.0), (2, 0.5), (3, 0.0)].into_iter().enumerate() {
        let ctx = CorrelationContext::new(Arc::clone(&s), MODES, sites(&model, count, delta))?;
        let symbols: Vec<FieldVector> = (0..count)
            .map(|_| random_symbol(&model.frame, &mut rng, 1.0))
            .collect::<Result<_>>()?;
        let check = expo_check(&ctx, &symbols, v.expo_degree)?;
        checks.push(
            Check::new(format!("expo[{k}]"), Quantity::exact(check.residual), 1e-8 + check.tail_bound)
                .detail("tail_bound", check.tail_bound)
                .detail("closed_abs", check.closed.norm()),
        );
    }

    let ctx = CorrelationContext::new(Arc::clone(&s), MODES, sites(&model, 2, 1.0))?;
    for m in 1..=3 {
        for sign in Sign::BOTH {
            let f = random_symbol(&model.frame, &mut rng, 1.0)?;
            let r = creation_residual(&ctx, sign, 1, &f, m)?;
            let label = if sign == Sign::Plus { "+" } else { "-" };
            checks.push(Check::new(format!("creation m={m} {label}"), Quantity::exact(r), 1e-8));
        }
    }
    Ok(VerifyResult::new("expansions", checks, notes))
}

/// Majorants of the multiindex series, and the exponential decay of
/// localized correlations that feeds them.
fn bounds(config: &ExperimentConfig, seed: u64) -> Result<VerifyResult> {
    let v = &config.verify;
    let model = Model::build(config)?;
    let mass = config.model.mass;
    let mut rng = seeded(seed);
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let s = spectrum(&model, config.model.energy)?;
    let (lo, hi) = (v.fit_range[0] / mass, v.fit_range[1] / mass);
    for (i, j) in [(0, 0), (0, 1), (2, 2), (5, 5)] {
        let slope = decay_fit(&s, i, j, Sign::Plus, lo, hi, 21);
        let relative = (slope + mass).abs() / mass;
        checks.push(Check::new(format!("decay({i},{j})"), Quantity::exact(relative), 0.15).detail("slope", slope));
    }

    let mut previous = f64::INFINITY;
    for delta in [4.0, 8.0, 16.0] {
        let g = measured_g(&s, delta, MODES);
        match series_bound(&s, 2, config.model.energy, g) {
            Ok(b) => {
                checks.push(
                    Check::new(format!("series delta={delta}"), Quantity::exact(b.value()), previous.min(f64::MAX))
                        .detail("g", g)
                        .detail("ratio", b.ratio),
                );
                previous = b.value();
            }
            Err(e) => notes.push(format!("series at delta = {delta}: {e}")),
        }
    }
    checks.push(Check::new("series N=1", Quantity::exact(series_bound(&s, 1, config.model.energy, 0.3)?.value()), 0.0));

    let energy = v.window_energy;
    let s = spectrum(&model, energy)?;
    let ctx = CorrelationContext::new(Arc::clone(&s), MODES, sites(&model, 2, 1.0))?;
    let fb = FockBasis::energy_window(&model.basis, energy)?;
    let sctx = SContext::new(ctx, fb.clone(), energy)?;
    let t = s.values();
    for k in 0..v.instances {
        let phi = EnergyFunctional::sample(&fb, energy, SamplingMode::Default, &mut rng)?;
        let pick = |rng: &mut Rng| {
            let degree = rng.random_range(0..=2);
            Bundle::from_flat(2, MODES, &random_multiindex(4 * MODES, degree, rng))
        };
        let mu = pick(&mut rng);
        let nu = pick(&mut rng);
        let monomial = sctx.monomial(&phi, &mu, &nu).norm();
        let bound = mu_bound(t, sctx.energy_ratio(), &mu, &nu) * phi.trace_norm();
        checks.push(Check::new(format!("monomial[{k}]"), Quantity::exact(monomial), bound));

        let alpha = random_pair_bundle(2, MODES, rng.random_range(0..=4), &mut rng)?;
        let beta = random_pair_bundle(2, MODES, rng.random_range(0..=4), &mut rng)?;
        let p = prodstate_bounds(&mu, &nu, &alpha, &beta);
        checks.push(Check::new(format!("prodstate[{k}]"), Quantity::exact(p.direct), p.split * (1.0 + 1e-12)));
    }
    for k in 0..v.bounds_instances {
        let slots = rng.random_range(2..=5);
        let alpha = random_pair_bundle(slots, 3, rng.random_range(0..=8), &mut rng)?;
        let (ratio, cap) = arrow_ratio(&alpha);
        checks.push(Check::new(format!("arrows[{k}]"), Quantity::exact(ratio), cap * (1.0 + 1e-12)));
    }
    Ok(VerifyResult::new("bounds", checks, notes))
}
