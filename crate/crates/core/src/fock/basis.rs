use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{binomial, C64};
use crate::singleparticle::{linear_combination, FieldVector, ModeBasis};

/// Default cap on the number of enumerated Fock states.
pub const DEFAULT_STATE_BUDGET: usize = 250_000;

/// The single-particle modes a Fock basis is built over.
#[derive(Debug, Clone)]
pub enum ModeSet {
    /// Bare modes addressed by coefficient vectors, optionally with energies.
    Abstract { count: usize, energies: Option<Vec<f64>> },
    /// A subset of grid modes; `a_k = sqrt(dp) a(p_k)`.
    Grid { basis: Arc<ModeBasis>, indices: Vec<usize> },
    /// An orthonormal family of one-particle vectors.
    Family { vectors: Vec<FieldVector> },
}

impl ModeSet {
    pub fn len(&self) -> usize {
        match self {
            ModeSet::Abstract { count, .. } => *count,
            ModeSet::Grid { indices, .. } => indices.len(),
            ModeSet::Family { vectors } => vectors.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn energies(&self) -> Option<Vec<f64>> {
        match self {
            ModeSet::Abstract { energies, .. } => energies.clone(),
            ModeSet::Grid { basis, indices } => Some(indices.iter().map(|&k| basis.energies()[k]).collect()),
            ModeSet::Family { .. } => None,
        }
    }

    pub fn momenta(&self) -> Option<Vec<f64>> {
        match self {
            ModeSet::Grid { basis, indices } => Some(indices.iter().map(|&k| basis.momenta()[k]).collect()),
            _ => None,
        }
    }

    /// Expansion coefficients `c_k` with `a(f) = sum_k conj(c_k) a_k`.
    ///
    /// Grid modes outside the subset are dropped; family expansions must be
    /// complete to `1e-9` relative accuracy.
    pub fn coefficients(&self, f: &FieldVector) -> Result<Vec<C64>> {
        match self {
            ModeSet::Abstract { .. } => Err(invalid(
                "modes",
                "abstract modes take coefficient vectors, not field vectors",
            )),
            ModeSet::Grid { basis, indices } => {
                if !(Arc::ptr_eq(basis, f.basis()) || **basis == **f.basis()) {
                    return Err(Error::BasisMismatch);
                }
                let w = basis.dp().sqrt();
                Ok(indices.iter().map(|&k| f.amplitude(k) * w).collect())
            }
            ModeSet::Family { vectors } => {
                let coeffs: Vec<C64> = vectors.iter().map(|u| u.try_inner(f)).collect::<Result<_>>()?;
                let terms: Vec<(C64, &FieldVector)> = coeffs.iter().copied().zip(vectors).collect();
                let residual = (f - &linear_combination(f.basis(), &terms)).norm();
                if residual > 1e-9 * f.norm().max(1e-300) {
                    return Err(Error::OutsideModeSpan { residual });
                }
                Ok(coeffs)
            }
        }
    }
}

/// Sparse occupation vector: sorted `(mode, count)` pairs with `count > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Occupation(Vec<(u32, u32)>);

impl Occupation {
    pub fn from_dense(counts: &[u32]) -> Self {
        Occupation(
            counts
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(k, &n)| (k as u32, n))
                .collect(),
        )
    }

    pub fn count(&self, mode: usize) -> u32 {
        self.0
            .binary_search_by_key(&(mode as u32), |&(k, _)| k)
            .map(|pos| self.0[pos].1)
            .unwrap_or(0)
    }

    pub fn particles(&self) -> u32 {
        self.0.iter().map(|&(_, n)| n).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(k, n)| (k as usize, n))
    }

    pub fn dense(&self, n_modes: usize) -> Vec<u32> {
        let mut out = vec![0; n_modes];
        for (k, n) in self.iter() {
            out[k] = n;
        }
        out
    }

    /// The occupation with `delta` added to `mode`, or `None` if it would go negative.
    pub fn shifted(&self, mode: usize, delta: i32) -> Option<Occupation> {
        let mut pairs = self.0.clone();
        match pairs.binary_search_by_key(&(mode as u32), |&(k, _)| k) {
            Ok(pos) => {
                let n = pairs[pos].1 as i64 + delta as i64;
                if n < 0 {
                    return None;
                }
                if n == 0 {
                    pairs.remove(pos);
                } else {
                    pairs[pos].1 = n as u32;
                }
            }
            Err(pos) => {
                if delta < 0 {
                    return None;
                }
                if delta > 0 {
                    pairs.insert(pos, (mode as u32, delta as u32));
                }
            }
        }
        Some(Occupation(pairs))
    }
}

/// One nonzero entry `<to| a_mode |from> = amplitude`.
#[derive(Debug, Clone, Copy)]
pub struct Lowering {
    pub from: usize,
    pub to: usize,
    pub mode: usize,
    pub amplitude: f64,
}

/// Occupation-number basis over a finite mode set with at most `n_max`
/// particles and optionally a total-energy cap.
///
/// States are ordered by particle number, then reverse-lexicographically in
/// the dense occupation vector: `00, 10, 01, 20, 11, 02, ...`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    modes: ModeSet,
    mode_energies: Option<Vec<f64>>,
    n_max: usize,
    energy_cap: Option<f64>,
    states: Vec<Occupation>,
    lookup: HashMap<Occupation, usize>,
    lowering: Vec<Lowering>,
    state_energies: Option<Vec<f64>>,
}

impl FockBasis {
    pub fn build(modes: ModeSet, n_max: usize, energy_cap: Option<f64>, budget: usize) -> Result<Self> {
        if modes.is_empty() {
            return Err(invalid("modes", "empty mode set"));
        }
        let mode_energies = modes.energies();
        if let Some(e) = &mode_energies {
            if e.iter().any(|&w| !(w > 0.0)) {
                return Err(invalid("modes", "mode energies must be positive"));
            }
        }
        if let Some(cap) = energy_cap {
            if !(cap >= 0.0) {
                return Err(invalid("energy", format!("{cap} is negative")));
            }
            if mode_energies.is_none() {
                return Err(Error::MissingEnergies);
            }
        } else {
            let count = binomial(n_max + modes.len(), modes.len());
            if count > budget as f64 {
                return Err(Error::DimensionBudget {
                    requested: count.min(usize::MAX as f64) as usize,
                    budget,
                });
            }
        }
        let states = enumerate_states(modes.len(), n_max, mode_energies.as_deref(), energy_cap, budget)?;
        let lookup: HashMap<Occupation, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let mut lowering = Vec::new();
        for (from, s) in states.iter().enumerate() {
            for (mode, n) in s.iter() {
                let target = s.shifted(mode, -1).expect("occupied mode");
                let to = lookup[&target];
                lowering.push(Lowering {
                    from,
                    to,
                    mode,
                    amplitude: (n as f64).sqrt(),
                });
            }
        }
        let state_energies = mode_energies
            .as_ref()
            .map(|w| states.iter().map(|s| s.iter().map(|(k, n)| n as f64 * w[k]).sum()).collect());
        Ok(FockBasis {
            modes,
            mode_energies,
            n_max,
            energy_cap,
            states,
            lookup,
            lowering,
            state_energies,
        })
    }

    /// Bare modes without energies.
    pub fn abstract_modes(n_modes: usize, n_max: usize) -> Result<Self> {
        Self::build(
            ModeSet::Abstract {
                count: n_modes,
                energies: None,
            },
            n_max,
            None,
            DEFAULT_STATE_BUDGET,
        )
    }

    /// Bare modes with the given energies.
    pub fn with_energies(energies: Vec<f64>, n_max: usize) -> Result<Self> {
        Self::build(
            ModeSet::Abstract {
                count: energies.len(),
                energies: Some(energies),
            },
            n_max,
            None,
            DEFAULT_STATE_BUDGET,
        )
    }

    /// Every grid mode, at most `n_max` particles.
    pub fn grid(basis: &Arc<ModeBasis>, n_max: usize) -> Result<Self> {
        Self::build(
            ModeSet::Grid {
                basis: Arc::clone(basis),
                indices: (0..basis.n_modes()).collect(),
            },
            n_max,
            None,
            DEFAULT_STATE_BUDGET,
        )
    }

    /// All states of total energy at most `energy` over the grid modes that
    /// can carry them. Compressions `P_E X P_E` of polynomials in ladder
    /// operators are represented exactly on this basis.
    pub fn energy_window(basis: &Arc<ModeBasis>, energy: f64) -> Result<Self> {
        let indices: Vec<usize> = (0..basis.n_modes()).filter(|&k| basis.energies()[k] <= energy).collect();
        let n_max = (energy / basis.mass()).floor() as usize;
        if indices.is_empty() {
            return Self::build(
                ModeSet::Grid {
                    basis: Arc::clone(basis),
                    indices: vec![basis.n_modes() / 2],
                },
                0,
                Some(energy),
                DEFAULT_STATE_BUDGET,
            );
        }
        Self::build(
            ModeSet::Grid {
                basis: Arc::clone(basis),
                indices,
            },
            n_max,
            Some(energy),
            DEFAULT_STATE_BUDGET,
        )
    }

    /// Fock space over an orthonormal family of one-particle vectors.
    pub fn family(vectors: Vec<FieldVector>, n_max: usize) -> Result<Self> {
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                if (u.try_inner(v)? - want).norm() > 1e-9 {
                    return Err(invalid("family", "vectors are not orthonormal"));
                }
            }
        }
        Self::build(ModeSet::Family { vectors }, n_max, None, DEFAULT_STATE_BUDGET)
    }

    /// Same modes with `extra` more particles allowed.
    pub fn refined(&self, extra: usize) -> Result<Self> {
        Self::build(self.modes.clone(), self.n_max + extra, self.energy_cap, DEFAULT_STATE_BUDGET)
    }

    pub fn modes(&self) -> &ModeSet {
        &self.modes
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn energy_cap(&self) -> Option<f64> {
        self.energy_cap
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn index_of(&self, occupation: &Occupation) -> Option<usize> {
        self.lookup.get(occupation).copied()
    }

    pub fn lowering_table(&self) -> &[Lowering] {
        &self.lowering
    }

    pub fn mode_energies(&self) -> Option<&[f64]> {
        self.mode_energies.as_deref()
    }

    /// Smallest mode energy, the mass gap of the model.
    pub fn mass_gap(&self) -> Option<f64> {
        self.mode_energies
            .as_ref()
            .map(|w| w.iter().cloned().fold(f64::INFINITY, f64::min))
    }

    pub fn state_energies(&self) -> Option<&[f64]> {
        self.state_energies.as_deref()
    }

    pub fn state_energy(&self, index: usize) -> Result<f64> {
        self.state_energies
            .as_ref()
            .map(|e| e[index])
            .ok_or(Error::MissingEnergies)
    }

    /// Indices of states with energy at most `energy`, in basis order.
    pub fn window(&self, energy: f64) -> Result<Vec<usize>> {
        let e = self.state_energies.as_ref().ok_or(Error::MissingEnergies)?;
        Ok((0..self.dim()).filter(|&i| e[i] <= energy * (1.0 + 1e-12)).collect())
    }

    /// Coefficient vector of a one-particle vector in this basis's modes.
    pub fn coefficients(&self, f: &FieldVector) -> Result<Vec<C64>> {
        self.modes.coefficients(f)
    }

    /// Basis index of the vacuum.
    pub fn vacuum(&self) -> usize {
        0
    }
}

fn enumerate_states(
    n_modes: usize,
    n_max: usize,
    energies: Option<&[f64]>,
    cap: Option<f64>,
    budget: usize,
) -> Result<Vec<Occupation>> {
    let cap = cap.map(|e| e * (1.0 + 1e-12));
    let min_energy = energies.map(|w| w.iter().cloned().fold(f64::INFINITY, f64::min));
    let mut states = Vec::new();
    let mut current: Vec<(u32, u32)> = Vec::new();
    for total in 0..=n_max {
        if let (Some(cap), Some(m)) = (cap, min_energy) {
            if total as f64 * m > cap {
                break;
            }
        }
        fill(
            0,
            total as u32,
            0.0,
            n_modes,
            energies,
            cap,
            min_energy,
            &mut current,
            &mut states,
            budget,
        )?;
    }
    Ok(states)
}

#[allow(clippy::too_many_arguments)]
fn fill(
    mode: usize,
    remaining: u32,
    energy: f64,
    n_modes: usize,
    energies: Option<&[f64]>,
    cap: Option<f64>,
    min_energy: Option<f64>,
    current: &mut Vec<(u32, u32)>,
    out: &mut Vec<Occupation>,
    budget: usize,
) -> Result<()> {
    if remaining == 0 {
        if out.len() >= budget {
            return Err(Error::DimensionBudget {
                requested: budget + 1,
                budget,
            });
        }
        out.push(Occupation(current.clone()));
        return Ok(());
    }
    if mode == n_modes {
        return Ok(());
    }
    if let (Some(cap), Some(m)) = (cap, min_energy) {
        if energy + remaining as f64 * m > cap {
            return Ok(());
        }
    }
    for n in (0..=remaining).rev() {
        let e = match (energies, n) {
            (Some(w), n) => energy + n as f64 * w[mode],
            (None, _) => 0.0,
        };
        if let Some(cap) = cap {
            if e > cap {
                continue;
            }
        }
        if n > 0 {
            current.push((mode as u32, n));
        }
        fill(
            mode + 1,
            remaining - n,
            e,
            n_modes,
            energies,
            cap,
            min_energy,
            current,
            out,
            budget,
        )?;
        if n > 0 {
            current.pop();
        }
    }
    Ok(())
}
