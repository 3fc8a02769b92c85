use std::collections::HashMap;
use std::sync::Arc;

use super::{pair_list, Bundle, MultiIndex, PairBundle};
use crate::error::{invalid, Error, Result};
use crate::fock::{lowering_sparse, EnergyFunctional, FockBasis};
use crate::linalg::{c, i_pow, permanent, CMatrix, CVector, SparseMatrix, C64};
use crate::singleparticle::{FieldVector, Sign, TSpectrum};

/// Largest `|alpha| + |beta|` accepted by [`f_correlation`].
pub const CORRELATION_CAP: u32 = 24;

fn sign_slot(sign: Sign) -> usize {
    match sign {
        Sign::Plus => 0,
        Sign::Minus => 1,
    }
}

/// Localized modes `L^± e_{k, x_i}` for the first `modes` eigenvectors of `T`
/// at each site, with their pairwise Gram matrices.
#[derive(Debug, Clone)]
pub struct CorrelationContext {
    spectrum: Arc<TSpectrum>,
    modes: usize,
    sites: Vec<f64>,
    localized: Vec<[Vec<FieldVector>; 2]>,
    grams: HashMap<(usize, usize, usize), CMatrix>,
}

impl CorrelationContext {
    pub fn new(spectrum: Arc<TSpectrum>, modes: usize, sites: Vec<f64>) -> Result<Self> {
        if modes == 0 || modes > spectrum.values().len() {
            return Err(invalid("modes", format!("{modes} not in 1..={}", spectrum.values().len())));
        }
        let localized: Vec<[Vec<FieldVector>; 2]> = sites
            .iter()
            .map(|&x| Sign::BOTH.map(|s| (0..modes).map(|k| spectrum.localized_mode(s, k, x)).collect()))
            .collect();
        let mut grams = HashMap::new();
        for (i, j) in pair_list(sites.len()) {
            for s in 0..2 {
                let (u, v) = (&localized[i][s], &localized[j][s]);
                grams.insert((i, j, s), CMatrix::from_fn(modes, modes, |r, k| u[r].inner(&v[k])));
            }
        }
        Ok(CorrelationContext {
            spectrum,
            modes,
            sites,
            localized,
            grams,
        })
    }

    pub fn spectrum(&self) -> &Arc<TSpectrum> {
        &self.spectrum
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn slots(&self) -> usize {
        self.sites.len()
    }

    /// `t_k` for the retained modes.
    pub fn t(&self) -> &[f64] {
        &self.spectrum.values()[..self.modes]
    }

    pub fn localized(&self, sign: Sign, site: usize) -> &[FieldVector] {
        &self.localized[site][sign_slot(sign)]
    }

    /// `G_{kl} = <L^± e_{k,x_i} | L^± e_{l,x_j}>` for `i < j`.
    pub fn gram(&self, sign: Sign, i: usize, j: usize) -> &CMatrix {
        &self.grams[&(i, j, sign_slot(sign))]
    }
}

/// `(Omega| a(u)^alpha a*(v)^beta Omega)` for `G_{kl} = <u_k|v_l>`: zero
/// unless `|alpha| = |beta|`, otherwise the permanent of the Gram matrix with
/// rows and columns repeated by multiplicity.
pub fn vacuum_element(gram: &CMatrix, alpha: &MultiIndex, beta: &MultiIndex) -> C64 {
    if alpha.abs() != beta.abs() {
        return c(0.0);
    }
    let rows = alpha.expand();
    let cols = beta.expand();
    permanent(&CMatrix::from_fn(rows.len(), cols.len(), |r, k| gram[(rows[r], cols[k])]))
}

/// `F_{alpha,beta}(x)`, the product over slot pairs and signs of
/// `(-1)^{|alpha|} (alpha! beta!)^{-1/2} (Omega| a(L e_{x_i})^alpha a*(L e_{x_j})^beta Omega)`.
pub fn f_correlation(ctx: &CorrelationContext, alpha: &PairBundle, beta: &PairBundle) -> Result<C64> {
    if alpha.slots() != ctx.slots() || beta.slots() != ctx.slots() {
        return Err(Error::Arity {
            expected: ctx.slots(),
            found: alpha.slots().min(beta.slots()),
        });
    }
    let degree = alpha.abs() + beta.abs();
    if degree > CORRELATION_CAP {
        return Err(invalid("alpha", format!("|alpha| + |beta| = {degree} exceeds {CORRELATION_CAP}")));
    }
    let mut value = c(1.0);
    for (p, (i, j)) in pair_list(ctx.slots()).into_iter().enumerate() {
        for (sign, a, b) in [
            (Sign::Plus, &alpha.plus[p], &beta.plus[p]),
            (Sign::Minus, &alpha.minus[p], &beta.minus[p]),
        ] {
            if a.len() != ctx.modes() || b.len() != ctx.modes() {
                return Err(Error::Arity {
                    expected: ctx.modes(),
                    found: a.len().min(b.len()),
                });
            }
            let element = vacuum_element(ctx.gram(sign, i, j), a, b);
            if element == c(0.0) {
                return Ok(c(0.0));
            }
            let parity = if a.abs() % 2 == 0 { 1.0 } else { -1.0 };
            value *= element * parity / (0.5 * (a.ln_factorial() + b.ln_factorial())).exp();
        }
    }
    Ok(value)
}

/// Localized-mode ladder operators on an energy-window Fock basis, for the
/// monomials `phi(a*(L e_x)^mu a(L e_x)^nu)` entering `S`.
#[derive(Debug, Clone)]
pub struct SContext {
    correlation: CorrelationContext,
    fb: FockBasis,
    energy: f64,
    lowering: Vec<[Vec<SparseMatrix>; 2]>,
}

impl SContext {
    /// `fb` must carry mode energies; `energy` fixes `M_E = E/m`.
    pub fn new(correlation: CorrelationContext, fb: FockBasis, energy: f64) -> Result<Self> {
        if fb.mass_gap().is_none() {
            return Err(Error::MissingEnergies);
        }
        let lowering = (0..correlation.slots())
            .map(|i| -> Result<[Vec<SparseMatrix>; 2]> {
                let mut out: [Vec<SparseMatrix>; 2] = [Vec::new(), Vec::new()];
                for sign in Sign::BOTH {
                    out[sign_slot(sign)] = correlation
                        .localized(sign, i)
                        .iter()
                        .map(|v| lowering_sparse(&fb, &fb.coefficients(v)?))
                        .collect::<Result<_>>()?;
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(SContext {
            correlation,
            fb,
            energy,
            lowering,
        })
    }

    pub fn correlation(&self) -> &CorrelationContext {
        &self.correlation
    }

    pub fn fock_basis(&self) -> &FockBasis {
        &self.fb
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// `M_E = E/m`.
    pub fn energy_ratio(&self) -> f64 {
        self.energy / self.fb.mass_gap().expect("checked at construction")
    }

    /// `a(L e_x)^mu psi_j` for every state vector of `phi`.
    pub fn lowered(&self, phi: &EnergyFunctional, mu: &Bundle) -> Vec<CVector> {
        phi.terms().iter().map(|(_, v)| self.apply_lowering(mu, v.clone())).collect()
    }

    fn apply_lowering(&self, mu: &Bundle, mut v: CVector) -> CVector {
        for (i, (plus, minus)) in mu.plus.iter().zip(&mu.minus).enumerate() {
            for (s, m) in [(0, plus), (1, minus)] {
                for k in m.expand() {
                    v = self.lowering[i][s][k].mul_vec(&v);
                }
            }
        }
        v
    }

    /// `phi(a*(L e_x)^mu a(L e_x)^nu) = sum_j w_j <a^mu psi_j | a^nu psi_j>`.
    pub fn monomial(&self, phi: &EnergyFunctional, mu: &Bundle, nu: &Bundle) -> C64 {
        pair_value(phi, &self.lowered(phi, mu), &self.lowered(phi, nu))
    }

    /// `S_{mu,nu,alpha,beta}(phi)`.
    pub fn s_functional(
        &self,
        phi: &EnergyFunctional,
        mu: &Bundle,
        nu: &Bundle,
        alpha: &PairBundle,
        beta: &PairBundle,
    ) -> Result<C64> {
        let f = f_correlation(&self.correlation, alpha, beta)?;
        if f == c(0.0) {
            return Ok(f);
        }
        let phase = i_pow(mu.abs_plus() as i64 + nu.abs_plus() as i64 + 2 * mu.abs_minus() as i64);
        let scale = (-mu.ln_factorial() - nu.ln_factorial() - 0.5 * (alpha.ln_factorial() + beta.ln_factorial())).exp();
        Ok(phase * scale * f * self.monomial(phi, mu, nu))
    }
}

pub(crate) fn pair_value(phi: &EnergyFunctional, left: &[CVector], right: &[CVector]) -> C64 {
    phi.terms()
        .iter()
        .zip(left.iter().zip(right))
        .map(|((w, _), (l, r))| w * l.dotc(r))
        .sum()
}
