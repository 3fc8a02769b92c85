//! Exact calculus on the range of an energy projection `P_E`.
//!
//! Annihilators map `ran P_E` into itself, so `a(f) P_E = P_E a(f) P_E` and,
//! taking adjoints, `P_E a*(f) = P_E a*(f) P_E`. Products of ladder operators
//! sandwiched between energy projections are therefore products of compressed
//! matrices, and exponentials of compressed annihilators are finite sums: each
//! annihilator removes energy at least `m`, so powers above `floor(E/m)` vanish.

use super::basis::FockBasis;
use super::operators::{truncated_exponential, FockOperator};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, CMatrix, C64, I};
use crate::singleparticle::FieldVector;

/// The states of a Fock basis with energy at most `E`, with the compressed
/// ladder calculus on them. Matrices returned here are in window coordinates.
#[derive(Debug, Clone)]
pub struct EnergyWindow {
    energy: f64,
    indices: Vec<usize>,
    position: Vec<Option<usize>>,
    degree: usize,
    parent_dim: usize,
}

impl EnergyWindow {
    pub fn new(fb: &FockBasis, energy: f64) -> Result<Self> {
        if !(energy >= 0.0) {
            return Err(invalid("energy", format!("{energy} is negative")));
        }
        let indices = fb.window(energy)?;
        let mass = fb.mass_gap().ok_or(Error::MissingEnergies)?;
        let mut position = vec![None; fb.dim()];
        for (w, &i) in indices.iter().enumerate() {
            position[i] = Some(w);
        }
        Ok(EnergyWindow {
            energy,
            degree: (energy * (1.0 + 1e-12) / mass).floor() as usize,
            indices,
            position,
            parent_dim: fb.dim(),
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Largest power of a compressed annihilator that can be nonzero.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn compress(&self, op: &FockOperator) -> CMatrix {
        op.block(&self.indices, &self.indices)
    }

    /// Window matrix as an operator on the parent basis, zero off the window.
    pub fn embed(&self, m: &CMatrix) -> FockOperator {
        let mut out = CMatrix::zeros(self.parent_dim, self.parent_dim);
        for (r, &i) in self.indices.iter().enumerate() {
            for (k, &j) in self.indices.iter().enumerate() {
                out[(i, j)] = m[(r, k)];
            }
        }
        FockOperator::new(out)
    }

    /// `P_E a(f) P_E` from coefficient data.
    pub fn annihilator_coeffs(&self, fb: &FockBasis, coeffs: &[C64]) -> Result<CMatrix> {
        if coeffs.len() != fb.n_modes() || fb.dim() != self.parent_dim {
            return Err(Error::Shape("window and coefficient data disagree".into()));
        }
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for l in fb.lowering_table() {
            if let (Some(from), Some(to)) = (self.position[l.from], self.position[l.to]) {
                m[(to, from)] += coeffs[l.mode].conj() * l.amplitude;
            }
        }
        Ok(m)
    }

    pub fn annihilator(&self, fb: &FockBasis, f: &FieldVector) -> Result<CMatrix> {
        self.annihilator_coeffs(fb, &fb.coefficients(f)?)
    }

    /// `P_E exp(s a) P_E` as an exact finite sum.
    pub fn exp_lowering(&self, lowering: &CMatrix, s: C64) -> CMatrix {
        truncated_exponential(lowering, s, self.degree)
    }

    /// `P_E :W(f): P_E = (P_E e^{i a*} P_E)(P_E e^{i a} P_E)`.
    pub fn normal_ordered_weyl(&self, lowering: &CMatrix) -> CMatrix {
        let right = self.exp_lowering(lowering, I);
        let left = self.exp_lowering(lowering, -I).adjoint();
        left * right
    }

    /// `P_E W(f) P_E = exp(-|f|^2/2) P_E :W(f): P_E`. The norm is that of the
    /// full one-particle vector, not of its window part.
    pub fn weyl(&self, lowering: &CMatrix, norm_sqr: f64) -> CMatrix {
        self.normal_ordered_weyl(lowering) * c((-0.5 * norm_sqr).exp())
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.dim(), self.dim())
    }
}

/// `M(f)(C) = P_E e^{i a*(f)} C e^{i a(f)} P_E`, acting on window matrices.
#[derive(Debug, Clone)]
pub struct MMap {
    left: CMatrix,
    right: CMatrix,
}

impl MMap {
    pub fn new(window: &EnergyWindow, lowering: &CMatrix) -> Self {
        MMap {
            left: window.exp_lowering(lowering, -I).adjoint(),
            right: window.exp_lowering(lowering, I),
        }
    }

    pub fn apply(&self, c: &CMatrix) -> CMatrix {
        &self.left * c * &self.right
    }
}

/// `M(f)` on the energy-`E` window of `fb`.
pub fn m_map(fb: &FockBasis, energy: f64, f: &FieldVector) -> Result<(EnergyWindow, MMap)> {
    let window = EnergyWindow::new(fb, energy)?;
    let a = window.annihilator(fb, f)?;
    let map = MMap::new(&window, &a);
    Ok((window, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operators::{annihilator_coeffs, energy_projection, normal_ordered_weyl_coeffs};
    use crate::singleparticle::ModeBasis;

    fn coeffs(n: usize, seed: f64) -> Vec<C64> {
        (0..n)
            .map(|k| C64::new((seed * (k as f64 + 1.1)).sin(), (seed * (k as f64 + 0.3)).cos()) * 0.3)
            .collect()
    }

    fn random_matrix(n: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(n, n, |r, k| C64::new((seed * (r * 7 + k) as f64).sin(), (seed * (3 * r + 2 * k) as f64).cos()))
    }

    #[test]
    fn zero_symbol_is_plain_compression() {
        let fb = FockBasis::with_energies(vec![1.0, 1.3, 1.7], 4).unwrap();
        let w = EnergyWindow::new(&fb, 2.5).unwrap();
        let map = MMap::new(&w, &w.annihilator_coeffs(&fb, &[c(0.0); 3]).unwrap());
        let m = random_matrix(w.dim(), 0.37);
        assert_eq!(map.apply(&m), m);
    }

    #[test]
    fn maps_commute() {
        let fb = FockBasis::with_energies(vec![1.0, 1.3, 1.7], 4).unwrap();
        let w = EnergyWindow::new(&fb, 3.1).unwrap();
        let f = MMap::new(&w, &w.annihilator_coeffs(&fb, &coeffs(3, 1.0)).unwrap());
        let g = MMap::new(&w, &w.annihilator_coeffs(&fb, &coeffs(3, 2.2)).unwrap());
        let m = random_matrix(w.dim(), 0.71);
        let fg = f.apply(&g.apply(&m));
        let gf = g.apply(&f.apply(&m));
        assert!((fg - gf).norm() < 1e-12);
    }

    #[test]
    fn below_the_mass_only_the_vacuum_survives() {
        let fb = FockBasis::with_energies(vec![1.0, 1.3], 3).unwrap();
        let w = EnergyWindow::new(&fb, 0.7).unwrap();
        assert_eq!(w.dim(), 1);
        assert_eq!(w.degree(), 0);
        let map = MMap::new(&w, &w.annihilator_coeffs(&fb, &coeffs(2, 0.4)).unwrap());
        let m = CMatrix::from_element(1, 1, C64::new(0.3, -2.0));
        assert_eq!(map.apply(&m), m);
    }

    #[test]
    fn window_weyl_matches_projected_truncation() {
        let fb = FockBasis::with_energies(vec![1.0, 1.2], 8).unwrap();
        let f = coeffs(2, 0.8);
        let w = EnergyWindow::new(&fb, 2.5).unwrap();
        let a = w.annihilator_coeffs(&fb, &f).unwrap();
        let p = energy_projection(&fb, 2.5).unwrap();
        let full = normal_ordered_weyl_coeffs(&fb, &f).unwrap();
        let projected = p.compose(&full).compose(&p);
        assert!((w.compress(&projected) - w.normal_ordered_weyl(&a)).norm() < 1e-13);
        let dense_a = annihilator_coeffs(&fb, &f).unwrap();
        assert!((w.compress(&dense_a) - a).norm() == 0.0);
    }

    #[test]
    fn results_are_bitwise_stable_in_n_max() {
        let b = ModeBasis::shared(1.0, 3.0, 7).unwrap();
        let f = FieldVector::from_fn(&b, |p, _| C64::new((-p * p).exp(), 0.2 * p));
        let small = FockBasis::grid(&b, 3).unwrap();
        let large = FockBasis::grid(&b, 6).unwrap();
        let (ws, ms) = m_map(&small, 2.3, &f).unwrap();
        let (wl, ml) = m_map(&large, 2.3, &f).unwrap();
        assert_eq!(ws.dim(), wl.dim());
        assert_eq!(ms.apply(&ws.identity()), ml.apply(&wl.identity()));
    }
}
