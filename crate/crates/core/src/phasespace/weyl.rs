use std::sync::Arc;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::fock::{EnergyFunctional, EnergyWindow, FockBasis, SamplingMode};
use crate::linalg::{c, CMatrix, CVector, C64, I};
use crate::singleparticle::{FieldVector, LocalizationFrame, ModeBasis};

/// Energy-window Fock space over the grid, on which `P_E X P_E` of finite
/// Weyl polynomials is represented exactly.
#[derive(Debug, Clone)]
pub struct WindowModel {
    basis: Arc<ModeBasis>,
    fb: FockBasis,
    window: EnergyWindow,
}

impl WindowModel {
    pub fn new(basis: &Arc<ModeBasis>, energy: f64) -> Result<Self> {
        let fb = FockBasis::energy_window(basis, energy)?;
        Self::with_fock(basis, fb, energy)
    }

    /// Window of energy `energy` inside an existing grid basis.
    pub fn with_fock(basis: &Arc<ModeBasis>, fb: FockBasis, energy: f64) -> Result<Self> {
        let window = EnergyWindow::new(&fb, energy)?;
        Ok(WindowModel {
            basis: Arc::clone(basis),
            fb,
            window,
        })
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn fock_basis(&self) -> &FockBasis {
        &self.fb
    }

    pub fn window(&self) -> &EnergyWindow {
        &self.window
    }

    pub fn energy(&self) -> f64 {
        self.window.energy()
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    /// `E / m`.
    pub fn energy_ratio(&self) -> f64 {
        self.energy() / self.basis.mass()
    }

    pub fn sample_functional<R: Rng + ?Sized>(&self, mode: SamplingMode, rng: &mut R) -> Result<EnergyFunctional> {
        EnergyFunctional::sample(&self.fb, self.energy(), mode, rng)
    }

    pub fn lowering(&self, f: &FieldVector) -> Result<CMatrix> {
        self.window.annihilator(&self.fb, f)
    }

    /// `P_E W(f) P_E`.
    pub fn weyl(&self, f: &FieldVector) -> Result<CMatrix> {
        Ok(self.window.weyl(&self.lowering(f)?, f.norm_sqr()))
    }

    /// `P_E :W(f): P_E`.
    pub fn normal_ordered(&self, f: &FieldVector) -> Result<CMatrix> {
        Ok(self.window.normal_ordered_weyl(&self.lowering(f)?))
    }

    /// `P_E X P_E` for `X = sum_leaves weight W(G)`.
    pub fn compress(&self, leaves: &[Leaf]) -> Result<CMatrix> {
        let mut out = CMatrix::zeros(self.dim(), self.dim());
        for leaf in leaves {
            let scale = leaf.weight * (-0.5 * leaf.norm_sqr).exp();
            if scale == c(0.0) {
                continue;
            }
            if leaf.is_identity() {
                for k in 0..self.dim() {
                    out[(k, k)] += scale;
                }
                continue;
            }
            let a = self.window.annihilator_coeffs(&self.fb, &leaf.coeffs)?;
            out += self.window.normal_ordered_weyl(&a) * scale;
        }
        Ok(out)
    }

    /// `phi(X)` for `X = sum_leaves weight W(G)`, using
    /// `phi(:W(G):) = sum_j w_j <e^{-i a(G)} psi_j | e^{i a(G)} psi_j>`.
    pub fn expect(&self, phi: &EnergyFunctional, leaves: &[Leaf]) -> Result<C64> {
        let terms = phi.window_terms(&self.window);
        let mut total = c(0.0);
        for leaf in leaves {
            let scale = leaf.weight * (-0.5 * leaf.norm_sqr).exp();
            if scale == c(0.0) {
                continue;
            }
            let inner: C64 = if leaf.is_identity() {
                terms.iter().map(|(w, v)| w * v.norm_squared()).sum()
            } else {
                let a = self.window.annihilator_coeffs(&self.fb, &leaf.coeffs)?;
                terms
                    .iter()
                    .map(|(w, v)| w * self.exp_apply(&a, -I, v).dotc(&self.exp_apply(&a, I, v)))
                    .sum()
            };
            total += scale * inner;
        }
        Ok(total)
    }

    fn exp_apply(&self, a: &CMatrix, s: C64, v: &CVector) -> CVector {
        let mut term = v.clone();
        let mut out = v.clone();
        for l in 1..=self.window.degree() {
            term = a * term * (s / l as f64);
            out += &term;
        }
        out
    }

    /// Expands `A_1 ... A_N` into single Weyl operators using
    /// `W(g) W(h) = exp(-i Im<g|h>) W(g + h)`.
    pub fn product_leaves(&self, factors: &[WeylPolynomial]) -> Result<Vec<Leaf>> {
        let mut vectors: Vec<&FieldVector> = Vec::new();
        let mut owners: Vec<Vec<(C64, Option<usize>)>> = Vec::with_capacity(factors.len());
        for p in factors {
            let mut choices = Vec::with_capacity(p.terms.len() + 1);
            if p.identity != c(0.0) {
                choices.push((p.identity, None));
            }
            for (w, f) in &p.terms {
                choices.push((*w, Some(vectors.len())));
                vectors.push(f);
            }
            owners.push(choices);
        }
        let coeffs: Vec<Vec<C64>> = vectors.iter().map(|f| self.fb.coefficients(f)).collect::<Result<_>>()?;
        let n = vectors.len();
        let mut gram = vec![vec![c(0.0); n]; n];
        for a in 0..n {
            for b in a..n {
                let z = vectors[a].inner(vectors[b]);
                gram[a][b] = z;
                gram[b][a] = z.conj();
            }
        }

        let modes = self.fb.n_modes();
        let mut leaves = vec![Leaf {
            weight: c(1.0),
            coeffs: vec![c(0.0); modes],
            norm_sqr: 0.0,
        }];
        let mut chosen: Vec<Vec<usize>> = vec![Vec::new()];
        for choices in &owners {
            let mut next = Vec::with_capacity(leaves.len() * choices.len());
            let mut next_chosen = Vec::with_capacity(leaves.len() * choices.len());
            for (leaf, used) in leaves.iter().zip(&chosen) {
                for &(w, idx) in choices {
                    let mut l = leaf.clone();
                    let mut u = used.clone();
                    l.weight *= w;
                    if let Some(k) = idx {
                        let overlap: C64 = used.iter().map(|&j| gram[j][k]).sum();
                        l.weight *= (-I * overlap.im).exp();
                        l.norm_sqr += gram[k][k].re + 2.0 * overlap.re;
                        for (x, y) in l.coeffs.iter_mut().zip(&coeffs[k]) {
                            *x += y;
                        }
                        u.push(k);
                    }
                    next.push(l);
                    next_chosen.push(u);
                }
            }
            leaves = next;
            chosen = next_chosen;
        }
        for (leaf, used) in leaves.iter_mut().zip(&chosen) {
            if used.is_empty() {
                leaf.norm_sqr = 0.0;
            }
        }
        Ok(leaves)
    }

    /// `P_E A_1 ... A_N P_E`.
    pub fn compress_product(&self, factors: &[WeylPolynomial]) -> Result<CMatrix> {
        self.compress(&self.product_leaves(factors)?)
    }
}

/// `weight W(G)`: window coefficients of `G` and the full norm `|G|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub weight: C64,
    pub coeffs: Vec<C64>,
    pub norm_sqr: f64,
}

impl Leaf {
    pub fn is_identity(&self) -> bool {
        self.norm_sqr == 0.0 && self.coeffs.iter().all(|z| *z == c(0.0))
    }
}

/// `identity I + sum_k c_k W(f_k)`.
#[derive(Debug, Clone)]
pub struct WeylPolynomial {
    identity: C64,
    terms: Vec<(C64, FieldVector)>,
}

impl WeylPolynomial {
    pub fn new(identity: C64, terms: Vec<(C64, FieldVector)>) -> Self {
        WeylPolynomial { identity, terms }
    }

    /// `sum_k c_k (W(f_k) - omega_0(W(f_k)) I)`.
    pub fn centered(terms: Vec<(C64, FieldVector)>) -> Self {
        let identity = -terms.iter().map(|(w, f)| w * (-0.5 * f.norm_sqr()).exp()).sum::<C64>();
        WeylPolynomial { identity, terms }
    }

    /// `W(f) - omega_0(W(f)) I`.
    pub fn centered_weyl(f: FieldVector) -> Self {
        Self::centered(vec![(c(1.0), f)])
    }

    /// `((W(f) + W(-f))/2 - omega_0(W(f))) / (1 + omega_0(W(f)))`:
    /// self-adjoint, centered, norm at most 1.
    pub fn centered_cosine(f: &FieldVector) -> Self {
        let damping = (-0.5 * f.norm_sqr()).exp();
        let w = c(0.5 / (1.0 + damping));
        Self::centered(vec![(w, f.clone()), (w, -f)])
    }

    /// Random centered combination of `1..=max_terms` Weyl operators with
    /// frame symbols of coefficient size up to `scale`, normalized so that
    /// `sum_k |c_k| (1 + exp(-|f_k|^2/2)) = 1`, which bounds the norm by 1.
    pub fn sample<R: Rng + ?Sized>(frame: &LocalizationFrame, max_terms: usize, scale: f64, rng: &mut R) -> Result<Self> {
        if max_terms == 0 {
            return Err(invalid("max_terms", "need at least one term"));
        }
        let count = rng.random_range(1..=max_terms);
        let n = frame.n_test();
        let mut terms = Vec::with_capacity(count);
        for _ in 0..count {
            let plus: Vec<f64> = (0..n).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
            let minus: Vec<f64> = (0..n).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
            let f = frame.symbol(&plus, &minus)?;
            let w = C64::from_polar(0.2 + 0.8 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
            terms.push((w, f));
        }
        let total: f64 = terms.iter().map(|(w, f)| w.norm() * (1.0 + (-0.5 * f.norm_sqr()).exp())).sum();
        for (w, _) in terms.iter_mut() {
            *w /= total;
        }
        Ok(Self::centered(terms))
    }

    pub fn identity(&self) -> C64 {
        self.identity
    }

    pub fn terms(&self) -> &[(C64, FieldVector)] {
        &self.terms
    }

    pub fn translate(&self, t: f64, x: f64) -> Self {
        WeylPolynomial {
            identity: self.identity,
            terms: self.terms.iter().map(|(w, f)| (*w, f.translate(t, x))).collect(),
        }
    }

    pub fn vacuum_expectation(&self) -> C64 {
        self.identity + self.terms.iter().map(|(w, f)| w * (-0.5 * f.norm_sqr()).exp()).sum::<C64>()
    }

    /// `|identity| + sum_k |c_k|`, an upper bound on the operator norm.
    pub fn norm_bound(&self) -> f64 {
        self.identity.norm() + self.terms.iter().map(|(w, _)| w.norm()).sum::<f64>()
    }
}
