//! One-particle space of the massive scalar field on a discrete momentum grid.
//!
//! Momenta sit on a symmetric grid `p_k = (k - c) dp` with an odd number of
//! modes. The grid is paired with the configuration lattice `x_j = (j - c) dx`,
//! `dx = 2 pi / (n dp)`, so the Fourier transform between the two is a unitary
//! DFT. Translations by lattice multiples are then exact symmetries of the
//! discrete model, which keeps localization and locality statements exact.

mod frame;
mod spectrum;

pub use frame::{bump, LocalizationFrame, Sign};
pub(crate) use frame::gram_schmidt;
pub use spectrum::{decay_fit, measured_g, two_point_correlation, TSpectrum};

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, C64, I};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeBasis {
    mass: f64,
    p_max: f64,
    dp: f64,
    momenta: Vec<f64>,
    energies: Vec<f64>,
}

impl ModeBasis {
    pub fn new(mass: f64, p_max: f64, n_modes: usize) -> Result<Self> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(invalid("mass", format!("{mass} is not a positive number")));
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(invalid("p_max", format!("{p_max} is not a positive number")));
        }
        if n_modes < 3 || n_modes % 2 == 0 {
            return Err(invalid("n_modes", format!("{n_modes} must be odd and at least 3")));
        }
        let centre = (n_modes - 1) as f64 / 2.0;
        let dp = p_max / centre;
        let momenta: Vec<f64> = (0..n_modes).map(|k| (k as f64 - centre) * dp).collect();
        let energies = momenta.iter().map(|p| (p * p + mass * mass).sqrt()).collect();
        Ok(ModeBasis {
            mass,
            p_max,
            dp,
            momenta,
            energies,
        })
    }

    pub fn shared(mass: f64, p_max: f64, n_modes: usize) -> Result<Arc<Self>> {
        Self::new(mass, p_max, n_modes).map(Arc::new)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn n_modes(&self) -> usize {
        self.momenta.len()
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Index of `-p_k`.
    pub fn mirror(&self, k: usize) -> usize {
        self.n_modes() - 1 - k
    }

    /// Spacing of the dual configuration lattice.
    pub fn lattice_spacing(&self) -> f64 {
        2.0 * PI / (self.n_modes() as f64 * self.dp)
    }

    /// Length of the periodic box seen by the grid.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.dp
    }

    pub fn positions(&self) -> Vec<f64> {
        let n = self.n_modes();
        let centre = (n - 1) as f64 / 2.0;
        let dx = self.lattice_spacing();
        (0..n).map(|j| (j as f64 - centre) * dx).collect()
    }

    /// Nearest configuration-lattice point.
    pub fn snap(&self, x: f64) -> f64 {
        let dx = self.lattice_spacing();
        (x / dx).round() * dx
    }
}

/// A one-particle vector `f(p_k)` with inner product `dp * sum conj(f) g`.
#[derive(Debug, Clone)]
pub struct FieldVector {
    basis: Arc<ModeBasis>,
    amplitudes: Vec<C64>,
}

impl FieldVector {
    pub fn new(basis: &Arc<ModeBasis>, amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.len() != basis.n_modes() {
            return Err(Error::Shape(format!(
                "{} amplitudes for {} modes",
                amplitudes.len(),
                basis.n_modes()
            )));
        }
        Ok(FieldVector {
            basis: Arc::clone(basis),
            amplitudes,
        })
    }

    pub fn zeros(basis: &Arc<ModeBasis>) -> Self {
        FieldVector {
            basis: Arc::clone(basis),
            amplitudes: vec![C64::new(0.0, 0.0); basis.n_modes()],
        }
    }

    pub fn from_fn(basis: &Arc<ModeBasis>, f: impl Fn(f64, f64) -> C64) -> Self {
        let amplitudes = basis
            .momenta()
            .iter()
            .zip(basis.energies())
            .map(|(&p, &w)| f(p, w))
            .collect();
        FieldVector {
            basis: Arc::clone(basis),
            amplitudes,
        }
    }

    /// Continuum-normalised transform of samples on the configuration lattice.
    pub fn from_configuration(basis: &Arc<ModeBasis>, samples: &[C64]) -> Result<Self> {
        if samples.len() != basis.n_modes() {
            return Err(Error::Shape(format!(
                "{} samples for {} lattice sites",
                samples.len(),
                basis.n_modes()
            )));
        }
        let positions = basis.positions();
        let pref = basis.lattice_spacing() / (2.0 * PI).sqrt();
        let support: Vec<(f64, C64)> = positions
            .iter()
            .zip(samples)
            .filter(|(_, s)| s.norm() > 0.0)
            .map(|(&x, &s)| (x, s))
            .collect();
        let amplitudes = basis
            .momenta()
            .iter()
            .map(|&p| {
                support
                    .iter()
                    .map(|&(x, s)| s * (-I * p * x).exp())
                    .sum::<C64>()
                    * pref
            })
            .collect();
        Ok(FieldVector {
            basis: Arc::clone(basis),
            amplitudes,
        })
    }

    /// Samples of the inverse transform on the configuration lattice.
    pub fn to_configuration(&self) -> Vec<C64> {
        let pref = self.basis.dp() / (2.0 * PI).sqrt();
        let p0 = self.basis.momenta()[0];
        let dp = self.basis.dp();
        self.basis
            .positions()
            .iter()
            .map(|&x| {
                let step = (I * dp * x).exp();
                let mut phase = (I * p0 * x).exp();
                let mut acc = C64::new(0.0, 0.0);
                for &f in &self.amplitudes {
                    acc += f * phase;
                    phase *= step;
                }
                acc * pref
            })
            .collect()
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amplitudes[k]
    }

    pub fn same_grid(&self, other: &FieldVector) -> bool {
        Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis
    }

    pub fn try_inner(&self, other: &FieldVector) -> Result<C64> {
        if !self.same_grid(other) {
            return Err(Error::BasisMismatch);
        }
        Ok(self.inner(other))
    }

    /// `<self|other>`, antilinear in `self`. Panics on mismatched grids.
    pub fn inner(&self, other: &FieldVector) -> C64 {
        assert!(self.same_grid(other), "inner product across different grids");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.basis.dp()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.basis.dp()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, s: C64) -> FieldVector {
        self.map(|_, _, a| a * s)
    }

    /// Pointwise map over `(p, omega, amplitude)`.
    pub fn map(&self, f: impl Fn(f64, f64, C64) -> C64) -> FieldVector {
        let amplitudes = self
            .basis
            .momenta()
            .iter()
            .zip(self.basis.energies())
            .zip(&self.amplitudes)
            .map(|((&p, &w), &a)| f(p, w, a))
            .collect();
        FieldVector {
            basis: Arc::clone(&self.basis),
            amplitudes,
        }
    }

    /// `U(t, x) f (p) = exp(i (omega t - p x)) f(p)`.
    pub fn translate(&self, t: f64, x: f64) -> FieldVector {
        self.map(|p, w, a| a * (I * (w * t - p * x)).exp())
    }

    /// `J f (p) = conj(f(-p))`.
    pub fn conjugate_j(&self) -> FieldVector {
        let n = self.amplitudes.len();
        let amplitudes = (0..n).map(|k| self.amplitudes[n - 1 - k].conj()).collect();
        FieldVector {
            basis: Arc::clone(&self.basis),
            amplitudes,
        }
    }

    /// `(f + J f) / 2`.
    pub fn j_real_part(&self) -> FieldVector {
        let jf = self.conjugate_j();
        (self + &jf).scale(c(0.5))
    }

    /// `(f - J f) / (2 i)`.
    pub fn j_imag_part(&self) -> FieldVector {
        let jf = self.conjugate_j();
        (self - &jf).scale(C64::new(0.0, -0.5))
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

impl<'a> Add<&'a FieldVector> for &'a FieldVector {
    type Output = FieldVector;
    fn add(self, rhs: &FieldVector) -> FieldVector {
        assert!(self.same_grid(rhs), "sum across different grids");
        let amplitudes = self.amplitudes.iter().zip(&rhs.amplitudes).map(|(a, b)| a + b).collect();
        FieldVector {
            basis: Arc::clone(&self.basis),
            amplitudes,
        }
    }
}

impl<'a> Sub<&'a FieldVector> for &'a FieldVector {
    type Output = FieldVector;
    fn sub(self, rhs: &FieldVector) -> FieldVector {
        assert!(self.same_grid(rhs), "difference across different grids");
        let amplitudes = self.amplitudes.iter().zip(&rhs.amplitudes).map(|(a, b)| a - b).collect();
        FieldVector {
            basis: Arc::clone(&self.basis),
            amplitudes,
        }
    }
}

impl Neg for &FieldVector {
    type Output = FieldVector;
    fn neg(self) -> FieldVector {
        self.scale(c(-1.0))
    }
}

impl Mul<C64> for &FieldVector {
    type Output = FieldVector;
    fn mul(self, rhs: C64) -> FieldVector {
        self.scale(rhs)
    }
}

impl Mul<f64> for &FieldVector {
    type Output = FieldVector;
    fn mul(self, rhs: f64) -> FieldVector {
        self.scale(c(rhs))
    }
}

/// `sum_k w_k v_k` over vectors on one grid.
pub fn linear_combination(basis: &Arc<ModeBasis>, terms: &[(C64, &FieldVector)]) -> FieldVector {
    let mut amplitudes = vec![C64::new(0.0, 0.0); basis.n_modes()];
    for (w, v) in terms {
        for (a, b) in amplitudes.iter_mut().zip(v.amplitudes()) {
            *a += w * b;
        }
    }
    FieldVector {
        basis: Arc::clone(basis),
        amplitudes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<ModeBasis> {
        ModeBasis::shared(1.0, 6.0, 25).unwrap()
    }

    fn sample(basis: &Arc<ModeBasis>) -> FieldVector {
        FieldVector::from_fn(basis, |p, w| C64::new((-p * p / 4.0).exp(), 0.3 * p / w))
    }

    #[test]
    fn grid_layout() {
        let b = grid();
        assert_eq!(b.n_modes(), 25);
        assert!((b.dp() - 0.5).abs() < 1e-15);
        assert!((b.momenta()[12]).abs() < 1e-15);
        assert!((b.energies()[12] - 1.0).abs() < 1e-15);
        assert!((b.momenta()[b.mirror(3)] + b.momenta()[3]).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModeBasis::new(0.0, 6.0, 25).is_err());
        assert!(ModeBasis::new(1.0, 6.0, 24).is_err());
        assert!(ModeBasis::new(1.0, -1.0, 25).is_err());
    }

    #[test]
    fn translation_is_unitary_and_group_like() {
        let b = grid();
        let f = sample(&b);
        let g = f.translate(0.7, -1.3);
        assert!((g.norm() - f.norm()).abs() < 1e-14);
        let h = f.translate(0.3, 0.5).translate(0.4, -1.8);
        assert!((&g - &h).norm() < 1e-13);
    }

    #[test]
    fn j_is_an_antiunitary_involution() {
        let b = grid();
        let f = sample(&b);
        let g = f.translate(0.0, 0.9);
        assert!((&f.conjugate_j().conjugate_j() - &f).norm() < 1e-15);
        let lhs = f.conjugate_j().inner(&g.conjugate_j());
        assert!((lhs - g.inner(&f)).norm() < 1e-14);
        let recombined = &f.j_real_part() + &f.j_imag_part().scale(I);
        assert!((&recombined - &f).norm() < 1e-14);
    }

    #[test]
    fn lattice_transform_is_unitary() {
        let b = grid();
        let f = sample(&b);
        let samples = f.to_configuration();
        let mass: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * b.lattice_spacing();
        assert!((mass - f.norm_sqr()).abs() < 1e-12);
        let back = FieldVector::from_configuration(&b, &samples).unwrap();
        assert!((&back - &f).norm() < 1e-12);
    }

    #[test]
    fn lattice_shift_moves_samples() {
        let b = grid();
        let f = sample(&b);
        let shifted = f.translate(0.0, 3.0 * b.lattice_spacing()).to_configuration();
        let orig = f.to_configuration();
        for j in 0..b.n_modes() - 3 {
            assert!((shifted[j + 3] - orig[j]).norm() < 1e-12);
        }
    }
}
