use super::{Bundle, MultiIndex};
use crate::error::{invalid, Result};
use crate::fock::{lowering_sparse, low_sector, weyl_apply, FockBasis};
use crate::linalg::{c, i_pow, nuclear_norm, CMatrix, CVector, SparseMatrix, C64};
use crate::singleparticle::{FieldVector, Sign, TSpectrum};

/// Largest `|mu+| + |mu-|` the brute-force route accepts.
pub const BRUTE_FORCE_CAP: u32 = 6;

/// Real coordinates `<e_k|f^+>`, `<e_k|f^->` of a symbol over the first
/// eigenvectors of `T`, with the reconstruction residual
/// `max_± |f^± - sum_k <e_k|f^±> L^± e_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EBasisCoefficients {
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    pub residual: f64,
}

impl EBasisCoefficients {
    pub fn new(plus: Vec<f64>, minus: Vec<f64>) -> Self {
        EBasisCoefficients {
            plus,
            minus,
            residual: 0.0,
        }
    }

    /// `c_k = <e_k|f^+> + i <e_k|f^->`, the abstract-mode coefficients of `f`.
    pub fn complex(&self) -> Vec<C64> {
        self.plus.iter().zip(&self.minus).map(|(&p, &m)| C64::new(p, m)).collect()
    }

    pub fn len(&self) -> usize {
        self.plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plus.is_empty()
    }
}

pub fn e_coefficients(spectrum: &TSpectrum, modes: usize, f: &FieldVector) -> EBasisCoefficients {
    let frame = spectrum.frame();
    let e = &spectrum.vectors()[..modes];
    let mut residual: f64 = 0.0;
    let mut parts = Vec::with_capacity(2);
    for (sign, part) in [(Sign::Plus, f.j_real_part()), (Sign::Minus, f.j_imag_part())] {
        let coeffs: Vec<f64> = e.iter().map(|v| v.inner(&part).re).collect();
        let mut rebuilt = FieldVector::zeros(f.basis());
        for (v, &a) in e.iter().zip(&coeffs) {
            rebuilt = &rebuilt + &frame.project(sign, v).scale(c(a));
        }
        residual = residual.max((&part - &rebuilt).norm());
        parts.push(coeffs);
    }
    let minus = parts.pop().unwrap();
    let plus = parts.pop().unwrap();
    EBasisCoefficients { plus, minus, residual }
}

/// `tau_{mu+,mu-}(W(f)) = exp(-|f|^2/2) <e|f^+>^{mu+} <e|f^->^{mu-}`.
pub fn tau_formula(mu_plus: &MultiIndex, mu_minus: &MultiIndex, coeffs: &EBasisCoefficients, norm_sqr: f64) -> f64 {
    (-0.5 * norm_sqr).exp() * mu_plus.power(&coeffs.plus) * mu_minus.power(&coeffs.minus)
}

/// Product of slot formulas, `exp(-sum |f_k|^2 / 2) <e|f>^mu`.
pub fn tau_tensor_formula(mu: &Bundle, coeffs: &[EBasisCoefficients], norm_sqrs: &[f64]) -> f64 {
    let damping: f64 = norm_sqrs.iter().map(|n| (-0.5 * n).exp()).product();
    damping * mu.power(coeffs)
}

fn multinomial(total: &MultiIndex, parts: [&MultiIndex; 3]) -> f64 {
    (total.ln_factorial() - parts.iter().map(|p| p.ln_factorial()).sum::<f64>()).exp()
}

/// `tau_{mu+,mu-}` as a normal functional on a Fock space over abstract
/// modes `e_k`, assembled from vacuum matrix elements of ladder monomials:
/// `tau(A) = sum_terms coef <L|A|R>`.
#[derive(Debug, Clone)]
pub struct TauFunctional {
    dim: usize,
    support: Vec<usize>,
    rights: Vec<CVector>,
    terms: Vec<(C64, CVector, usize)>,
}

impl TauFunctional {
    pub fn new(fb: &FockBasis, mu_plus: &MultiIndex, mu_minus: &MultiIndex) -> Result<Self> {
        let modes = fb.n_modes();
        if mu_plus.len() != modes || mu_minus.len() != modes {
            return Err(invalid("mu", format!("multiindices must have length {modes}")));
        }
        let degree = mu_plus.abs() + mu_minus.abs();
        if degree > BRUTE_FORCE_CAP {
            return Err(invalid("mu", format!("|mu| = {degree} exceeds the brute-force cap {BRUTE_FORCE_CAP}")));
        }
        if fb.n_max() < degree as usize {
            return Err(invalid("n_max", format!("{} cannot hold {degree} particles", fb.n_max())));
        }
        let lowering: Vec<SparseMatrix> = (0..modes)
            .map(|k| {
                let mut e = vec![c(0.0); modes];
                e[k] = c(1.0);
                lowering_sparse(fb, &e)
            })
            .collect::<Result<_>>()?;
        let raising: Vec<SparseMatrix> = lowering.iter().map(SparseMatrix::adjoint).collect();
        let mut vacuum = CVector::zeros(fb.dim());
        vacuum[fb.vacuum()] = c(1.0);
        let apply = |ops: &[SparseMatrix], m: &MultiIndex, v: CVector| {
            m.expand().into_iter().fold(v, |acc, k| ops[k].mul_vec(&acc))
        };

        let prefactor = 0.5f64.powi(degree as i32) * i_pow(-(mu_plus.abs() as i64) - 2 * mu_minus.abs() as i64);
        let mut rights: Vec<(MultiIndex, CVector)> = Vec::new();
        let mut terms = Vec::new();
        let plus_splits = mu_plus.splits3();
        let minus_splits = mu_minus.splits3();
        for (a_p, b_p, c_p) in &plus_splits {
            for (a_m, b_m, c_m) in &minus_splits {
                let sign = if (b_p.abs() + c_m.abs()) % 2 == 0 { 1.0 } else { -1.0 };
                let weight = sign * multinomial(mu_plus, [a_p, b_p, c_p]) * multinomial(mu_minus, [a_m, b_m, c_m]);
                let alpha = a_p.add(a_m);
                let alpha1 = b_p.add(b_m);
                let alpha2 = c_p.add(c_m);
                let left = apply(&lowering, &alpha1, apply(&raising, &alpha, vacuum.clone()));
                if left.norm() == 0.0 {
                    continue;
                }
                let slot = match rights.iter().position(|(m, _)| *m == alpha2) {
                    Some(s) => s,
                    None => {
                        rights.push((alpha2.clone(), apply(&raising, &alpha2, vacuum.clone())));
                        rights.len() - 1
                    }
                };
                terms.push((prefactor * weight, left, slot));
            }
        }
        Ok(TauFunctional {
            dim: fb.dim(),
            support: low_sector(fb, degree),
            rights: rights.into_iter().map(|(_, v)| v).collect(),
            terms,
        })
    }

    /// `tau(A)` given the action `v -> A v`.
    pub fn evaluate(&self, apply: impl Fn(&CVector) -> Result<CVector>) -> Result<C64> {
        let images: Vec<CVector> = self.rights.iter().map(&apply).collect::<Result<_>>()?;
        Ok(self
            .terms
            .iter()
            .map(|(coef, left, slot)| coef * left.dotc(&images[*slot]))
            .sum())
    }

    pub fn evaluate_matrix(&self, a: &CMatrix) -> C64 {
        self.evaluate(|v| Ok(a * v)).expect("infallible")
    }

    /// `rho = sum coef |R><L|`, so that `tau(A) = tr(rho A)`.
    pub fn density(&self) -> CMatrix {
        let mut rho = CMatrix::zeros(self.dim, self.dim);
        for (coef, left, slot) in &self.terms {
            rho += &self.rights[*slot] * left.adjoint() * *coef;
        }
        rho
    }

    /// Trace norm of the density, computed on the sector that supports it.
    pub fn norm(&self) -> f64 {
        let rho = self.density();
        let s = &self.support;
        nuclear_norm(&CMatrix::from_fn(s.len(), s.len(), |r, k| rho[(s[r], s[k])]))
    }
}

/// Brute-force `tau(W(f))` for abstract coefficients `c_k`, with the
/// truncation error `eta` measured against four more particles.
pub fn tau_weyl_bruteforce(fb: &FockBasis, mu_plus: &MultiIndex, mu_minus: &MultiIndex, coeffs: &[C64]) -> Result<(C64, f64)> {
    let value = |basis: &FockBasis| -> Result<C64> {
        TauFunctional::new(basis, mu_plus, mu_minus)?.evaluate(|v| weyl_apply(basis, coeffs, v))
    };
    let coarse = value(fb)?;
    let fine = value(&fb.refined(4)?)?;
    Ok((coarse, (coarse - fine).norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_multiindex_is_the_vacuum() {
        let fb = FockBasis::abstract_modes(2, 4).unwrap();
        let tau = TauFunctional::new(&fb, &MultiIndex::zeros(2), &MultiIndex::zeros(2)).unwrap();
        let m = CMatrix::from_fn(fb.dim(), fb.dim(), |r, k| C64::new(r as f64, k as f64));
        assert_eq!(tau.evaluate_matrix(&m), m[(fb.vacuum(), fb.vacuum())]);
        assert!((tau.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_reads_off_the_real_part() {
        let fb = FockBasis::abstract_modes(1, 12).unwrap();
        let coeffs = [C64::new(0.3, -0.4)];
        let (v, eta) = tau_weyl_bruteforce(&fb, &MultiIndex::new(vec![1]), &MultiIndex::zeros(1), &coeffs).unwrap();
        let expected = (-0.5f64 * 0.25).exp() * 0.3;
        assert!((v - c(expected)).norm() < 1e-10 + eta);
        let (v, eta) = tau_weyl_bruteforce(&fb, &MultiIndex::zeros(1), &MultiIndex::new(vec![1]), &coeffs).unwrap();
        assert!((v - c((-0.125f64).exp() * -0.4)).norm() < 1e-10 + eta);
    }

    #[test]
    fn cap_is_enforced() {
        let fb = FockBasis::abstract_modes(1, 12).unwrap();
        assert!(TauFunctional::new(&fb, &MultiIndex::new(vec![4]), &MultiIndex::new(vec![3])).is_err());
    }
}
