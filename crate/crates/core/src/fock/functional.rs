use rand::Rng;
use rand_distr::StandardNormal;

use super::basis::FockBasis;
use super::window::EnergyWindow;
use crate::error::{invalid, Result};
use crate::linalg::{c, nuclear_norm, CMatrix, CVector, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    Vacuum,
    Pure,
    Mixture,
    /// `(rho_1 - rho_2 + i rho_3 - i rho_4) / 4` with positive `rho_j`.
    Signed,
}

/// How [`EnergyFunctional::sample`] draws states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Haar pure state or mixture of 2 to 5, each with probability 1/2.
    Default,
    Pure,
    Mixture,
    Signed,
}

/// Normal functional `phi(X) = sum_j w_j <psi_j| X |psi_j>` with every
/// `psi_j` supported on the energy-`E` window of a Fock basis.
#[derive(Debug, Clone)]
pub struct EnergyFunctional {
    energy: f64,
    kind: FunctionalKind,
    dim: usize,
    terms: Vec<(C64, CVector)>,
}

impl EnergyFunctional {
    pub fn vacuum(fb: &FockBasis) -> Self {
        let mut v = CVector::zeros(fb.dim());
        v[fb.vacuum()] = c(1.0);
        EnergyFunctional {
            energy: 0.0,
            kind: FunctionalKind::Vacuum,
            dim: fb.dim(),
            terms: vec![(c(1.0), v)],
        }
    }

    /// Vector state of a normalized vector supported on the window.
    pub fn pure(fb: &FockBasis, energy: f64, psi: CVector) -> Result<Self> {
        let window = fb.window(energy)?;
        let mut inside = vec![false; fb.dim()];
        for &i in &window {
            inside[i] = true;
        }
        if psi.len() != fb.dim() || psi.iter().enumerate().any(|(i, z)| !inside[i] && z.norm() > 0.0) {
            return Err(invalid("psi", "vector must live on the energy window"));
        }
        let n = psi.norm();
        Ok(EnergyFunctional {
            energy,
            kind: FunctionalKind::Pure,
            dim: fb.dim(),
            terms: vec![(c(1.0), psi / c(n))],
        })
    }

    pub fn sample<R: Rng + ?Sized>(fb: &FockBasis, energy: f64, mode: SamplingMode, rng: &mut R) -> Result<Self> {
        let window = fb.window(energy)?;
        if window.len() == 1 && window[0] == fb.vacuum() {
            let mut f = Self::vacuum(fb);
            f.energy = energy;
            return Ok(f);
        }
        let kind = match mode {
            SamplingMode::Default => {
                if rng.random::<f64>() < 0.5 {
                    FunctionalKind::Pure
                } else {
                    FunctionalKind::Mixture
                }
            }
            SamplingMode::Pure => FunctionalKind::Pure,
            SamplingMode::Mixture => FunctionalKind::Mixture,
            SamplingMode::Signed => FunctionalKind::Signed,
        };
        let terms = match kind {
            FunctionalKind::Pure => vec![(c(1.0), haar_vector(fb.dim(), &window, rng))],
            FunctionalKind::Mixture => mixture(fb.dim(), &window, rng),
            FunctionalKind::Signed => {
                let mut out = Vec::new();
                for phase in [c(1.0), c(-1.0), I, -I] {
                    let part = if rng.random::<f64>() < 0.5 {
                        vec![(c(1.0), haar_vector(fb.dim(), &window, rng))]
                    } else {
                        mixture(fb.dim(), &window, rng)
                    };
                    out.extend(part.into_iter().map(|(w, v)| (w * phase * 0.25, v)));
                }
                out
            }
            FunctionalKind::Vacuum => unreachable!(),
        };
        Ok(EnergyFunctional {
            energy,
            kind,
            dim: fb.dim(),
            terms,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kind(&self) -> FunctionalKind {
        self.kind
    }

    pub fn terms(&self) -> &[(C64, CVector)] {
        &self.terms
    }

    /// `phi(X)` for an operator on the parent basis.
    pub fn evaluate(&self, op: &CMatrix) -> C64 {
        self.terms
            .iter()
            .map(|(w, v)| w * v.dotc(&(op * v)))
            .sum()
    }

    /// `phi(X)` for a window matrix `X = P_E X P_E`.
    pub fn evaluate_window(&self, window: &EnergyWindow, op: &CMatrix) -> C64 {
        self.terms
            .iter()
            .map(|(w, v)| {
                let local = CVector::from_iterator(window.dim(), window.indices().iter().map(|&i| v[i]));
                w * local.dotc(&(op * &local))
            })
            .sum()
    }

    /// Window coordinates of the state vectors.
    pub fn window_terms(&self, window: &EnergyWindow) -> Vec<(C64, CVector)> {
        self.terms
            .iter()
            .map(|(w, v)| (*w, CVector::from_iterator(window.dim(), window.indices().iter().map(|&i| v[i]))))
            .collect()
    }

    pub fn density(&self) -> CMatrix {
        let mut rho = CMatrix::zeros(self.dim, self.dim);
        for (w, v) in &self.terms {
            rho += v * v.adjoint() * *w;
        }
        rho
    }

    pub fn trace(&self) -> C64 {
        self.terms.iter().map(|(w, v)| w * v.norm_squared()).sum()
    }

    pub fn trace_norm(&self) -> f64 {
        match self.kind {
            FunctionalKind::Signed => nuclear_norm(&self.density()),
            _ => self.terms.iter().map(|(w, v)| w.norm() * v.norm_squared()).sum(),
        }
    }
}

fn haar_vector<R: Rng + ?Sized>(dim: usize, support: &[usize], rng: &mut R) -> CVector {
    let mut v = CVector::zeros(dim);
    for &i in support {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        v[i] = C64::new(re, im);
    }
    let n = v.norm();
    v / c(n)
}

fn mixture<R: Rng + ?Sized>(dim: usize, support: &[usize], rng: &mut R) -> Vec<(C64, CVector)> {
    let count = rng.random_range(2..=5usize);
    let raw: Vec<f64> = (0..count).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter()
        .map(|w| (c(w / total), haar_vector(dim, support, rng)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::operators::energy_projection;
    use crate::rng::seeded;

    #[test]
    fn zero_energy_gives_the_vacuum() {
        let fb = FockBasis::with_energies(vec![1.0, 1.4], 3).unwrap();
        let mut rng = seeded(3);
        for _ in 0..5 {
            let f = EnergyFunctional::sample(&fb, 0.0, SamplingMode::Default, &mut rng).unwrap();
            let rho = f.density();
            assert_eq!(rho[(0, 0)], c(1.0));
            assert_eq!(rho.iter().filter(|z| z.norm() > 0.0).count(), 1);
        }
    }

    #[test]
    fn samples_are_normalized_and_supported() {
        let fb = FockBasis::with_energies(vec![1.0, 1.4, 2.0], 3).unwrap();
        let p = energy_projection(&fb, 2.5).unwrap().into_matrix();
        let mut rng = seeded(11);
        for mode in [SamplingMode::Default, SamplingMode::Pure, SamplingMode::Mixture] {
            for _ in 0..10 {
                let f = EnergyFunctional::sample(&fb, 2.5, mode, &mut rng).unwrap();
                assert!((f.trace_norm() - 1.0).abs() < 1e-12);
                let rho = f.density();
                assert_eq!(&p * &rho * &p, rho);
            }
        }
        let s = EnergyFunctional::sample(&fb, 2.5, SamplingMode::Signed, &mut rng).unwrap();
        assert!(s.trace_norm() <= 1.0 + 1e-12);
    }
}
