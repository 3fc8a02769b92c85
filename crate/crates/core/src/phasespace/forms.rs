use super::geometry::AdmissibleConfig;
use super::weyl::{WeylPolynomial, WindowModel};
use crate::error::{invalid, Error, Result};
use crate::fock::{weyl_apply, EnergyFunctional, FockBasis, ModeSet, Occupation};
use crate::linalg::{c, operator_norm, CMatrix, CVector, C64};
use crate::multiindex::ordered_partitions;
use crate::singleparticle::{gram_schmidt, linear_combination, FieldVector};

/// `A_1 x .. x A_N -> phi(A_1(x_1) ... A_N(x_N))` for a functional on the
/// energy window and an admissible configuration.
#[derive(Debug, Clone)]
pub struct CoincidenceForm<'a> {
    model: &'a WindowModel,
    phi: EnergyFunctional,
    config: AdmissibleConfig,
}

impl<'a> CoincidenceForm<'a> {
    pub fn new(model: &'a WindowModel, phi: EnergyFunctional, config: AdmissibleConfig) -> Self {
        CoincidenceForm { model, phi, config }
    }

    pub fn functional(&self) -> &EnergyFunctional {
        &self.phi
    }

    pub fn config(&self) -> &AdmissibleConfig {
        &self.config
    }

    fn translated(&self, slots: &[WeylPolynomial]) -> Result<Vec<WeylPolynomial>> {
        if slots.len() != self.config.len() {
            return Err(Error::Arity {
                expected: self.config.len(),
                found: slots.len(),
            });
        }
        Ok(slots.iter().zip(self.config.sites()).map(|(a, &x)| a.translate(0.0, x)).collect())
    }

    pub fn evaluate(&self, slots: &[WeylPolynomial]) -> Result<C64> {
        let factors = self.translated(slots)?;
        self.model.expect(&self.phi, &self.model.product_leaves(&factors)?)
    }

    /// `P_E A_1(x_1) ... A_N(x_N) P_E` in window coordinates.
    pub fn compressed(&self, slots: &[WeylPolynomial]) -> Result<CMatrix> {
        self.model.compress_product(&self.translated(slots)?)
    }

    /// `sup |psi(A_1(x_1)...A_N(x_N))|` over the trace-norm unit ball of the window.
    pub fn slot_norm(&self, slots: &[WeylPolynomial]) -> Result<f64> {
        Ok(operator_norm(&self.compressed(slots)?))
    }
}

fn translated_symbols(config: &AdmissibleConfig, symbols: &[FieldVector]) -> Result<Vec<FieldVector>> {
    if symbols.len() != config.len() {
        return Err(Error::Arity {
            expected: config.len(),
            found: symbols.len(),
        });
    }
    Ok(symbols.iter().zip(config.sites()).map(|(f, &x)| f.translate(0.0, x)).collect())
}

fn sum_of(g: &[FieldVector], subset: &[usize]) -> FieldVector {
    let basis = g[0].basis();
    linear_combination(basis, &subset.iter().map(|&i| (c(1.0), &g[i])).collect::<Vec<_>>())
}

fn real_overlaps(g: &[FieldVector], subset: &[usize]) -> f64 {
    let mut total = 0.0;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            total += g[i].inner(&g[j]).re;
        }
    }
    total
}

fn normal_ordered_value(model: &WindowModel, phi: &EnergyFunctional, f: &FieldVector) -> Result<C64> {
    Ok(phi.evaluate_window(model.window(), &model.normal_ordered(f)?))
}

/// Partition expansion of `phi(prod_i (W(f_{i,x_i}) - omega_0(W(f_i))))`:
/// `sum_{R1,R2} (-1)^{|R2|} e^{-sum_all |f|^2/2} e^{-sum_{k<l in R1} Re<f_k|f_l>} phi(:W(sum_{R1} f):)`.
/// The Weyl phases `Im<f_k|f_l>` are dropped, which is exact for mutually
/// spacelike symbols.
pub fn crucial_expansion(model: &WindowModel, phi: &EnergyFunctional, config: &AdmissibleConfig, symbols: &[FieldVector]) -> Result<C64> {
    let g = translated_symbols(config, symbols)?;
    let damping: f64 = (-0.5 * g.iter().map(FieldVector::norm_sqr).sum::<f64>()).exp();
    let mut total = c(0.0);
    for (r1, r2) in ordered_partitions(g.len())? {
        let sign = if r2.len() % 2 == 0 { 1.0 } else { -1.0 };
        let value = if r1.is_empty() {
            phi.trace()
        } else {
            normal_ordered_value(model, phi, &sum_of(&g, &r1))?
        };
        total += value * (sign * damping * (-real_overlaps(&g, &r1)).exp());
    }
    Ok(total)
}

/// `Pi'(W(g_1), .., W(g_M)) = e^{-sum |g|^2/2} (e^{-sum_{i<j} Re<g_i|g_j>} - 1) phi(:W(sum g):)`
/// for already translated symbols.
pub fn pi_prime(model: &WindowModel, phi: &EnergyFunctional, translated: &[FieldVector]) -> Result<C64> {
    if translated.len() < 2 {
        return Ok(c(0.0));
    }
    let all: Vec<usize> = (0..translated.len()).collect();
    let damping = (-0.5 * translated.iter().map(FieldVector::norm_sqr).sum::<f64>()).exp();
    let factor = (-real_overlaps(translated, &all)).exp_m1();
    Ok(normal_ordered_value(model, phi, &sum_of(translated, &all))? * (damping * factor))
}

/// `sum_{R1,R2} (-1)^{|R2|} prod_{R2} omega_0(W(f)) Pi'(W(f_{R1}))`, the
/// part of the partition expansion that survives once the normal-ordered
/// alternating sum vanishes.
pub fn correlation_part(model: &WindowModel, phi: &EnergyFunctional, config: &AdmissibleConfig, symbols: &[FieldVector]) -> Result<C64> {
    let g = translated_symbols(config, symbols)?;
    let mut total = c(0.0);
    for (r1, r2) in ordered_partitions(g.len())? {
        if r1.len() < 2 {
            continue;
        }
        let sign = if r2.len() % 2 == 0 { 1.0 } else { -1.0 };
        let vacuum: f64 = r2.iter().map(|&i| (-0.5 * g[i].norm_sqr()).exp()).product();
        let chosen: Vec<FieldVector> = r1.iter().map(|&i| g[i].clone()).collect();
        total += pi_prime(model, phi, &chosen)? * (sign * vacuum);
    }
    Ok(total)
}

/// Residuals of the normal-ordered alternating sum
/// `S = sum_{R1,R2} (-1)^{|R2|} P_E :W(sum_{R1} f_{i,x_i}): P_E`.
#[derive(Debug, Clone, PartialEq)]
pub struct SVanishing {
    /// `max_phi |phi(S)|` with `S` summed over partitions.
    pub alternating: f64,
    /// `max_phi |phi(S)|` with `S = (M(f_1) - M(0)) ... (M(f_N) - M(0))(I)`.
    pub product: f64,
    /// `|S_alternating - S_product|` in operator norm.
    pub cross: f64,
    /// Largest operator norm among the summed or intermediate matrices.
    pub scale: f64,
    pub functionals: usize,
}

impl SVanishing {
    pub fn residual(&self) -> f64 {
        self.alternating.max(self.product)
    }
}

/// Checks that `S` vanishes on the window when `N > 2E/m`. Every exponential
/// involved is a finite sum on the window.
pub fn s_vanishing_check(
    model: &WindowModel,
    phis: &[EnergyFunctional],
    config: &AdmissibleConfig,
    symbols: &[FieldVector],
) -> Result<SVanishing> {
    let n = config.len();
    let threshold = 2.0 * model.energy_ratio();
    if !((n as f64) > threshold * (1.0 + 1e-12)) {
        return Err(invalid("slots", format!("N = {n} does not exceed 2E/m = {threshold}")));
    }
    let g = translated_symbols(config, symbols)?;
    let dim = model.dim();
    let mut scale: f64 = 1.0;

    let mut alternating = CMatrix::zeros(dim, dim);
    for (r1, r2) in ordered_partitions(n)? {
        let sign = if r2.len() % 2 == 0 { 1.0 } else { -1.0 };
        let term = if r1.is_empty() {
            CMatrix::identity(dim, dim)
        } else {
            model.normal_ordered(&sum_of(&g, &r1))?
        };
        scale = scale.max(operator_norm(&term));
        alternating += term * c(sign);
    }

    let mut product = CMatrix::identity(dim, dim);
    for f in g.iter().rev() {
        let a = model.lowering(f)?;
        let map = crate::fock::MMap::new(model.window(), &a);
        product = map.apply(&product) - &product;
        scale = scale.max(operator_norm(&product));
    }

    let residual = |m: &CMatrix| phis.iter().map(|phi| phi.evaluate_window(model.window(), m).norm()).fold(0.0, f64::max);
    Ok(SVanishing {
        alternating: residual(&alternating),
        product: residual(&product),
        cross: operator_norm(&(&alternating - &product)),
        scale,
        functionals: phis.len(),
    })
}

/// Independent evaluation of `phi(A_1(x_1) ... A_N(x_N))` on a
/// particle-number-truncated Fock space over an orthonormal family spanning
/// every translated symbol and the one-particle part of each state vector.
/// Returns the value and `eta`, the change under `n_max + 4`.
///
/// Requires states with at most one particle (`E < 2m`).
pub fn form_bruteforce(
    model: &WindowModel,
    phi: &EnergyFunctional,
    config: &AdmissibleConfig,
    slots: &[WeylPolynomial],
    n_max: usize,
) -> Result<(C64, f64)> {
    if model.window().degree() > 1 {
        return Err(invalid("energy", "brute force supports states with at most one particle"));
    }
    if slots.len() != config.len() {
        return Err(Error::Arity {
            expected: config.len(),
            found: slots.len(),
        });
    }
    let factors: Vec<WeylPolynomial> = slots.iter().zip(config.sites()).map(|(a, &x)| a.translate(0.0, x)).collect();
    let fb = model.fock_basis();
    let grid_modes = match fb.modes() {
        ModeSet::Grid { indices, .. } => indices.clone(),
        _ => return Err(invalid("model", "window model must be built over grid modes")),
    };
    let basis = model.basis();
    let w = basis.dp().sqrt();

    let mut coarse = c(0.0);
    let mut fine = c(0.0);
    for (weight, v) in phi.terms() {
        let mut vacuum_amp = c(0.0);
        let mut amplitudes = vec![c(0.0); basis.n_modes()];
        for &i in model.window().indices() {
            let occ = &fb.states()[i];
            match occ.particles() {
                0 => vacuum_amp = v[i],
                1 => {
                    let (mode, _) = occ.iter().next().expect("one particle");
                    amplitudes[grid_modes[mode]] = v[i] / w;
                }
                _ => unreachable!("degree checked"),
            }
        }
        let psi1 = FieldVector::new(basis, amplitudes)?;
        let mut span: Vec<FieldVector> = factors.iter().flat_map(|p| p.terms().iter().map(|(_, f)| f.clone())).collect();
        span.push(psi1.clone());
        let family = gram_schmidt(&span, 1e-10);
        for (extra, slot) in [(0, &mut coarse), (4, &mut fine)] {
            let family_fb = FockBasis::family(family.clone(), n_max + extra)?;
            let mut state = CVector::zeros(family_fb.dim());
            state[family_fb.vacuum()] = vacuum_amp;
            for (k, u) in family.iter().enumerate() {
                let mut counts = vec![0u32; family.len()];
                counts[k] = 1;
                let idx = family_fb
                    .index_of(&Occupation::from_dense(&counts))
                    .ok_or_else(|| invalid("n_max", "family basis lacks one-particle states"))?;
                state[idx] += u.inner(&psi1);
            }
            let mut out = state.clone();
            for p in factors.iter().rev() {
                let mut next = &out * p.identity();
                for (cw, f) in p.terms() {
                    next += weyl_apply(&family_fb, &family_fb.coefficients(f)?, &out)? * *cw;
                }
                out = next;
            }
            *slot += weight * state.dotc(&out);
        }
    }
    Ok((coarse, (coarse - fine).norm()))
}
