use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::forms::CoincidenceForm;
use super::geometry::AdmissibleConfig;
use super::results::{Quantity, ScanPoint, ScanResult};
use super::weyl::{WeylPolynomial, WindowModel};
use crate::error::{invalid, Error, Result};
use crate::fock::{weyl_apply, EnergyFunctional, FockBasis, ModeSet, Occupation, SamplingMode};
use crate::linalg::{c, hermitian_eigen, operator_norm, CMatrix, CVector, C64};
use crate::rng::stream;
use crate::singleparticle::{gram_schmidt, FieldVector, LocalizationFrame, ModeBasis};

/// Stream offset separating image-point draws from slot draws.
const POINT_STREAMS: u64 = 1 << 40;

/// How slot tuples and configurations are drawn. Sample `s` always uses
/// RNG stream `s` of `seed`, so a scan over `delta` sees the same slots and
/// the same gap jitter at every `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpec {
    pub slots: usize,
    pub max_terms: usize,
    pub symbol_scale: f64,
    /// Extra gap beyond `2r + delta`, drawn uniformly from `[0, jitter)`.
    pub jitter: f64,
    pub seed: u64,
}

impl SampleSpec {
    fn draw_slots<R: Rng + ?Sized>(&self, frame: &LocalizationFrame, rng: &mut R) -> Result<Vec<WeylPolynomial>> {
        (0..self.slots)
            .map(|_| WeylPolynomial::sample(frame, self.max_terms, self.symbol_scale, rng))
            .collect()
    }

    fn draw_gaps<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (1..self.slots).map(|_| self.jitter * rng.random::<f64>()).collect()
    }

    fn config(&self, basis: &ModeBasis, frame: &LocalizationFrame, delta: f64, gaps: &[f64]) -> Result<AdmissibleConfig> {
        AdmissibleConfig::from_gaps(basis, self.slots, delta, frame.radius(), gaps)
    }

    /// Slot tuple `s` (independent of `delta`).
    pub fn slots_for(&self, frame: &LocalizationFrame, s: u64) -> Result<Vec<WeylPolynomial>> {
        self.draw_slots(frame, &mut stream(self.seed, s))
    }
}

/// Outcome of maximizing over sampled slot tuples and configurations.
#[derive(Debug, Clone, PartialEq)]
pub struct PiNormEstimate {
    pub delta: f64,
    /// `max_s |P_E A^s_1(x^s_1) ... A^s_N(x^s_N) P_E|`.
    pub best_norm: f64,
    /// `max_s |phi_s(A^s_1(x^s_1) ... )|` over one sampled functional per sample.
    pub best_form: f64,
    pub argmax: usize,
    pub samples: usize,
}

/// Lower bound on `sup |P_E A_1(x_1) ... A_N(x_N) P_E|` over centered slots
/// of norm at most 1 and admissible configurations at time window `delta`.
pub fn pi_norm_estimate(model: &WindowModel, frame: &LocalizationFrame, spec: &SampleSpec, delta: f64, samples: usize) -> Result<PiNormEstimate> {
    if spec.slots == 0 {
        return Err(invalid("slots", "need N >= 1"));
    }
    let cells: Vec<(f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|s| -> Result<(f64, f64)> {
            let mut rng = stream(spec.seed, s);
            let slots = spec.draw_slots(frame, &mut rng)?;
            let gaps = spec.draw_gaps(&mut rng);
            let phi = model.sample_functional(SamplingMode::Default, &mut rng)?;
            let config = spec.config(model.basis(), frame, delta, &gaps)?;
            let form = CoincidenceForm::new(model, phi, config);
            let x = form.compressed(&slots)?;
            let value = form.functional().evaluate_window(model.window(), &x).norm();
            Ok((operator_norm(&x), value))
        })
        .collect::<Result<_>>()?;
    let mut best = PiNormEstimate {
        delta,
        best_norm: 0.0,
        best_form: 0.0,
        argmax: 0,
        samples,
    };
    for (s, (norm, value)) in cells.into_iter().enumerate() {
        if norm > best.best_norm {
            best.best_norm = norm;
            best.argmax = s;
        }
        best.best_form = best.best_form.max(value);
    }
    Ok(best)
}

/// Sampled image of `(phi, x) -> phi_x`, each form recorded by its values
/// on a shared family of slot tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageSet {
    pub delta: f64,
    /// `values[k][s] = phi_k(A^s_1(x^k_1) ... A^s_N(x^k_N))`.
    pub values: Vec<Vec<C64>>,
}

impl ImageSet {
    /// `d(k, l) = max_s |phi_k(..) - phi_l(..)|`, the form norm restricted to
    /// the probe family.
    pub fn distances(&self) -> Vec<Vec<f64>> {
        let n = self.values.len();
        let mut d = vec![vec![0.0; n]; n];
        for k in 0..n {
            for l in k + 1..n {
                let v = self.values[k]
                    .iter()
                    .zip(&self.values[l])
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                d[k][l] = v;
                d[l][k] = v;
            }
        }
        d
    }
}

pub fn image_set(
    model: &WindowModel,
    frame: &LocalizationFrame,
    spec: &SampleSpec,
    delta: f64,
    points: usize,
    probes: usize,
) -> Result<ImageSet> {
    let probe_slots: Vec<Vec<WeylPolynomial>> = (0..probes as u64).map(|s| spec.slots_for(frame, s)).collect::<Result<_>>()?;
    let values = (0..points as u64)
        .into_par_iter()
        .map(|k| -> Result<Vec<C64>> {
            let mut rng = stream(spec.seed, POINT_STREAMS + k);
            let phi = model.sample_functional(SamplingMode::Default, &mut rng)?;
            let gaps = spec.draw_gaps(&mut rng);
            let form = CoincidenceForm::new(model, phi, spec.config(model.basis(), frame, delta, &gaps)?);
            probe_slots.iter().map(|slots| form.evaluate(slots)).collect()
        })
        .collect::<Result<_>>()?;
    Ok(ImageSet { delta, values })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AveragingParams {
    pub ns: Vec<usize>,
    /// Time window used for `n = ns[i]`.
    pub deltas: Vec<f64>,
    pub functionals: usize,
    pub seed: u64,
}

fn lattice_sites(basis: &ModeBasis, n: usize, step: f64) -> Vec<f64> {
    let h = basis.lattice_spacing();
    let k = (step / h - 1e-9).ceil();
    (0..n).map(|i| i as f64 * k * h).collect()
}

/// `Q_n = (1/n) sum_i A(x_i)` at equally spaced admissible sites, measured
/// against `(max_{i != j} |P_E A(x_i) A(x_j) P_E| + f_n |A|^2)^{1/2}` where
/// `f_n = (n^2 - n(n-1)) / n^2` is the exact fraction of coincident index
/// pairs. The slot must be self-adjoint; functionals are positive.
pub fn averaging_experiment(model: &WindowModel, radius: f64, slot: &WeylPolynomial, params: &AveragingParams) -> Result<ScanResult> {
    if params.ns.len() != params.deltas.len() {
        return Err(invalid("deltas", "need one time window per n"));
    }
    let mut result = ScanResult::new("averaging", "n", Some(params.seed));
    let norm_a = slot.norm_bound();
    for (&n, &delta) in params.ns.iter().zip(&params.deltas) {
        if n < 2 {
            return Err(invalid("ns", "need n >= 2"));
        }
        let sites = lattice_sites(model.basis(), n, 2.0 * radius + delta);
        let config = AdmissibleConfig::new(sites.clone(), delta, radius)?;
        config.check_period(model.basis().period())?;
        let local: Vec<CMatrix> = sites
            .iter()
            .map(|&x| model.compress_product(&[slot.translate(0.0, x)]))
            .collect::<Result<_>>()?;
        let q = local.iter().fold(CMatrix::zeros(model.dim(), model.dim()), |acc, m| acc + m) / c(n as f64);

        let mut rng = stream(params.seed, n as u64);
        let mut phis: Vec<EnergyFunctional> = (0..params.functionals)
            .map(|_| model.sample_functional(SamplingMode::Default, &mut rng))
            .collect::<Result<_>>()?;
        let (values, vectors) = hermitian_eigen(&q);
        let top = (0..values.len())
            .max_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs()))
            .expect("nonempty window");
        let mut extremal = CVector::zeros(model.fock_basis().dim());
        for (w, &i) in model.window().indices().iter().enumerate() {
            extremal[i] = vectors[(w, top)];
        }
        phis.push(EnergyFunctional::pure(model.fock_basis(), model.energy(), extremal)?);
        let measured = phis
            .iter()
            .map(|phi| phi.evaluate_window(model.window(), &q).norm())
            .fold(0.0, f64::max);

        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect();
        let distinct = pairs
            .par_iter()
            .map(|&(i, j)| -> Result<f64> {
                let m = model.compress_product(&[slot.translate(0.0, sites[i]), slot.translate(0.0, sites[j])])?;
                Ok(operator_norm(&m))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let nn = (n * n) as f64;
        let fraction = (nn - (n * (n - 1)) as f64) / nn;
        let bound = (distinct + fraction * norm_a * norm_a).sqrt();
        result.points.push(
            ScanPoint::new(n as f64, Quantity::exact(measured).with_samples(phis.len()))
                .with_bound(Quantity::exact(bound))
                .detail("delta", delta)
                .detail("distinct_sup", distinct)
                .detail("remainder_fraction", fraction)
                .detail("slot_norm_bound", norm_a),
        );
    }
    Ok(result)
}

/// `omega_0(A B(lambda))` for `A = W(f) - omega_0(W(f))`, `B = W(g) - omega_0(W(g))`,
/// by the closed form `e^{-|f|^2/2 - |g|^2/2} (e^{-<f|g_lambda>} - 1)` and by
/// the vacuum matrix element on a Fock space over `span{f, g_lambda}`.
/// The closed form keeps `Im<f|g_lambda>`, which vanishes at spacelike separation.
pub fn clustering_experiment(f: &FieldVector, g: &FieldVector, lambdas: &[f64], n_max: usize) -> Result<ScanResult> {
    let mut result = ScanResult::new("clustering", "lambda", None);
    let damping = (-0.5 * (f.norm_sqr() + g.norm_sqr())).exp();
    for &lambda in lambdas {
        let gl = g.translate(0.0, lambda);
        let formula = damping * ((-f.inner(&gl)).exp() - 1.0);
        let family = gram_schmidt(&[f.clone(), gl.clone()], 1e-10);
        let trace = |extra: usize| -> Result<C64> {
            let fb = FockBasis::family(family.clone(), n_max + extra)?;
            let mut omega = CVector::zeros(fb.dim());
            omega[fb.vacuum()] = c(1.0);
            let center = |h: &FieldVector, v: &CVector| -> Result<CVector> {
                Ok(weyl_apply(&fb, &fb.coefficients(h)?, v)? - v * c((-0.5 * h.norm_sqr()).exp()))
            };
            let v = center(&gl, &omega)?;
            let v = center(f, &v)?;
            Ok(omega.dotc(&v))
        };
        let value = trace(0)?;
        let eta = (value - trace(4)?).norm();
        result.points.push(
            ScanPoint::new(lambda, Quantity::exact(value.norm()).with_eta(eta))
                .detail("trace_re", value.re)
                .detail("trace_im", value.im)
                .detail("formula_re", formula.re)
                .detail("formula_im", formula.im)
                .detail("route_difference", (value - formula).norm()),
        );
    }
    Ok(result)
}

/// Vector state `a*(psi) Omega / |.|` on the window; the part of `psi` on
/// modes above the window energy is dropped.
pub fn one_particle_functional(model: &WindowModel, psi: &FieldVector) -> Result<EnergyFunctional> {
    let fb = model.fock_basis();
    let grid_modes = match fb.modes() {
        ModeSet::Grid { indices, .. } => indices.clone(),
        _ => return Err(invalid("model", "window model must be built over grid modes")),
    };
    let w = model.basis().dp().sqrt();
    let mut v = CVector::zeros(fb.dim());
    for (local, &k) in grid_modes.iter().enumerate() {
        let mut counts = vec![0u32; grid_modes.len()];
        counts[local] = 1;
        if let Some(i) = fb.index_of(&Occupation::from_dense(&counts)) {
            if model.window().indices().contains(&i) {
                v[i] = psi.amplitude(k) * w;
            }
        }
    }
    if v.norm() == 0.0 {
        return Err(invalid("psi", "no weight on window one-particle states"));
    }
    EnergyFunctional::pure(fb, model.energy(), v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PppParams {
    pub lengths: Vec<f64>,
    pub exponent: f64,
    /// Trapezoid nodes per axis (odd).
    pub points: usize,
}

/// Largest node count per axis accepted by [`ppp_averaging`].
const QUADRATURE_BUDGET: usize = 257;

fn trapezoid(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let w = if k == 0 || k == n - 1 { 0.5 * h } else { h };
            (a + k as f64 * h, w)
        })
        .collect()
}

/// `(1/|K_L|) int_{K_L} omega(alpha_x A) dx` over
/// `K_L = {|t| <= L^eps, |x| <= L}` by the product trapezoid rule, reported
/// as `|average - omega_0(A)|` with `eta` from the rule on half the nodes.
pub fn ppp_averaging(model: &WindowModel, omega: &EnergyFunctional, slot: &WeylPolynomial, params: &PppParams) -> Result<ScanResult> {
    if !(params.exponent > 0.0 && params.exponent < 1.0) {
        return Err(invalid("exponent", format!("{} not in (0, 1)", params.exponent)));
    }
    if params.points < 3 || params.points % 2 == 0 {
        return Err(invalid("points", "need an odd node count of at least 3"));
    }
    if params.points > QUADRATURE_BUDGET {
        return Err(Error::Quadrature {
            estimate: params.points as f64,
            tolerance: QUADRATURE_BUDGET as f64,
        });
    }
    let vacuum = slot.vacuum_expectation();
    let mut result = ScanResult::new("ppp", "L", None);
    for &l in &params.lengths {
        let tmax = l.powf(params.exponent);
        let average = |nodes: usize| -> Result<C64> {
            let ts = trapezoid(-tmax, tmax, nodes);
            let xs = trapezoid(-l, l, nodes);
            let cells: Vec<(f64, f64, f64)> = ts
                .iter()
                .flat_map(|&(t, wt)| xs.iter().map(move |&(x, wx)| (t, x, wt * wx)))
                .collect();
            let sum: C64 = cells
                .par_iter()
                .map(|&(t, x, w)| -> Result<C64> {
                    let leaves = model.product_leaves(&[slot.translate(t, x)])?;
                    Ok(model.expect(omega, &leaves)? * w)
                })
                .collect::<Result<Vec<C64>>>()?
                .into_iter()
                .sum();
            Ok(sum / (4.0 * l * tmax))
        };
        let fine = average(params.points)?;
        let coarse = average(params.points / 2 + 1)?;
        let deviation = (fine - vacuum * omega.trace()).norm();
        result.points.push(
            ScanPoint::new(l, Quantity::quadrature(deviation, (fine - coarse).norm(), params.points * params.points))
                .detail("average_re", fine.re)
                .detail("average_im", fine.im)
                .detail("time_half_width", tmax),
        );
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharpParams {
    pub energy: f64,
    pub momentum: f64,
    pub radii: Vec<f64>,
    pub functionals: usize,
    pub seed: u64,
}

/// `sup |phi(A) - phi(I) omega_0(A)|` over functionals of trace norm 1
/// supported on the joint spectral ball of `(H, P)` of radius `r` around
/// `(energy, momentum)`: the operator norm of the compression to the ball, with
/// sampled vector states reported alongside.
impl SharpParams {
    /// Centered on the one-particle shell `(omega(p), p)`.
    pub fn on_shell(mass: f64, momentum: f64, radii: Vec<f64>, functionals: usize, seed: u64) -> Self {
        SharpParams {
            energy: (momentum * momentum + mass * mass).sqrt(),
            momentum,
            radii,
            functionals,
            seed,
        }
    }
}

pub fn sharp_momentum_experiment(basis: &Arc<ModeBasis>, slot: &WeylPolynomial, params: &SharpParams) -> Result<ScanResult> {
    let (e0, p0) = (params.energy, params.momentum);
    if !(e0 >= 0.0) {
        return Err(invalid("energy", format!("{e0} is negative")));
    }
    let mut result = ScanResult::new("sharp", "r", Some(params.seed));
    let vacuum = slot.vacuum_expectation();
    for (step, &r) in params.radii.iter().enumerate() {
        let model = WindowModel::new(basis, e0 + r)?;
        let fb = model.fock_basis();
        let energies = fb.state_energies().ok_or(Error::MissingEnergies)?;
        let momenta = fb.modes().momenta().ok_or(Error::MissingEnergies)?;
        let ball: Vec<usize> = model
            .window()
            .indices()
            .iter()
            .enumerate()
            .filter(|&(_, &i)| {
                let p: f64 = fb.states()[i].iter().map(|(k, n)| n as f64 * momenta[k]).sum();
                let e = energies[i];
                (e - e0).powi(2) + (p - p0).powi(2) <= r * r
            })
            .map(|(w, _)| w)
            .collect();
        let vacuum_only = ball.iter().all(|&w| model.window().indices()[w] == fb.vacuum());
        if ball.is_empty() || vacuum_only {
            let what = if ball.is_empty() { "empty" } else { "vacuum-only" };
            result.notes.push(format!("spectral ball at r = {r} is {what}"));
            result.points.push(ScanPoint::new(r, Quantity::exact(0.0)).detail("ball_dim", ball.len() as f64));
            continue;
        }
        let full = model.compress_product(std::slice::from_ref(slot))? - model.window().identity() * vacuum;
        let block = CMatrix::from_fn(ball.len(), ball.len(), |a, b| full[(ball[a], ball[b])]);
        let sup = operator_norm(&block);
        let mut rng = stream(params.seed, step as u64);
        let sampled = (0..params.functionals)
            .map(|_| {
                let v = CVector::from_fn(ball.len(), |_, _| {
                    C64::new(rng.sample(rand_distr::StandardNormal), rng.sample(rand_distr::StandardNormal))
                });
                let v = &v / c(v.norm());
                v.dotc(&(&block * &v)).norm()
            })
            .fold(0.0, f64::max);
        result.points.push(
            ScanPoint::new(r, Quantity::exact(sup))
                .detail("ball_dim", ball.len() as f64)
                .detail("sampled_vector_states", sampled),
        );
    }
    Ok(result)
}
