use super::basis::FockBasis;
use crate::error::{Error, Result};
use crate::linalg::{c, expm, operator_norm, sparse_expm_apply, CMatrix, CVector, SparseMatrix, C64, I};
use crate::singleparticle::FieldVector;

/// Dense operator on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct FockOperator {
    matrix: CMatrix,
    particle_change: Option<i32>,
    unitary: bool,
}

impl FockOperator {
    pub fn new(matrix: CMatrix) -> Self {
        FockOperator {
            matrix,
            particle_change: None,
            unitary: false,
        }
    }

    pub fn identity(dim: usize) -> Self {
        FockOperator {
            matrix: CMatrix::identity(dim, dim),
            particle_change: Some(0),
            unitary: true,
        }
    }

    pub fn with_flags(matrix: CMatrix, particle_change: Option<i32>, unitary: bool) -> Self {
        FockOperator {
            matrix,
            particle_change,
            unitary,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Net change of particle number, when the operator has a definite one.
    pub fn particle_change(&self) -> Option<i32> {
        self.particle_change
    }

    /// Whether the exact operator this matrix truncates is unitary.
    pub fn is_unitary_claimed(&self) -> bool {
        self.unitary
    }

    pub fn adjoint(&self) -> FockOperator {
        FockOperator {
            matrix: self.matrix.adjoint(),
            particle_change: self.particle_change.map(|d| -d),
            unitary: self.unitary,
        }
    }

    pub fn compose(&self, rhs: &FockOperator) -> FockOperator {
        FockOperator {
            matrix: &self.matrix * &rhs.matrix,
            particle_change: match (self.particle_change, rhs.particle_change) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
            unitary: self.unitary && rhs.unitary,
        }
    }

    pub fn plus(&self, rhs: &FockOperator) -> FockOperator {
        FockOperator::new(&self.matrix + &rhs.matrix)
    }

    pub fn minus(&self, rhs: &FockOperator) -> FockOperator {
        FockOperator::new(&self.matrix - &rhs.matrix)
    }

    pub fn scaled(&self, s: C64) -> FockOperator {
        FockOperator {
            matrix: &self.matrix * s,
            particle_change: self.particle_change,
            unitary: self.unitary && (s.norm() - 1.0).abs() < 1e-15,
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    /// Largest singular value.
    pub fn norm(&self) -> f64 {
        operator_norm(&self.matrix)
    }

    /// Sub-block on the given basis indices.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |r, k| self.matrix[(rows[r], cols[k])])
    }
}

fn coefficient_norm(coeffs: &[C64]) -> f64 {
    coeffs.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_len(fb: &FockBasis, coeffs: &[C64]) -> Result<()> {
    if coeffs.len() != fb.n_modes() {
        return Err(Error::Shape(format!(
            "{} coefficients for {} modes",
            coeffs.len(),
            fb.n_modes()
        )));
    }
    Ok(())
}

/// Sparse `a(f) = sum_k conj(c_k) a_k`.
pub fn lowering_sparse(fb: &FockBasis, coeffs: &[C64]) -> Result<SparseMatrix> {
    check_len(fb, coeffs)?;
    let triplets = fb
        .lowering_table()
        .iter()
        .filter(|l| coeffs[l.mode] != C64::new(0.0, 0.0))
        .map(|l| (l.to, l.from, coeffs[l.mode].conj() * l.amplitude))
        .collect();
    Ok(SparseMatrix::from_triplets(fb.dim(), fb.dim(), triplets))
}

pub fn annihilator_coeffs(fb: &FockBasis, coeffs: &[C64]) -> Result<FockOperator> {
    check_len(fb, coeffs)?;
    let mut m = CMatrix::zeros(fb.dim(), fb.dim());
    for l in fb.lowering_table() {
        m[(l.to, l.from)] += coeffs[l.mode].conj() * l.amplitude;
    }
    Ok(FockOperator::with_flags(m, Some(-1), false))
}

pub fn creator_coeffs(fb: &FockBasis, coeffs: &[C64]) -> Result<FockOperator> {
    Ok(annihilator_coeffs(fb, coeffs)?.adjoint())
}

/// `a(f)`, with matrix elements `<n - e_k| a(f) |n> = conj(f_k) sqrt(n_k dp)` on grid modes.
pub fn annihilator(fb: &FockBasis, f: &FieldVector) -> Result<FockOperator> {
    annihilator_coeffs(fb, &fb.coefficients(f)?)
}

pub fn creator(fb: &FockBasis, f: &FieldVector) -> Result<FockOperator> {
    creator_coeffs(fb, &fb.coefficients(f)?)
}

fn diagonal(values: impl Iterator<Item = C64>, dim: usize, unitary: bool) -> FockOperator {
    let v = CVector::from_iterator(dim, values);
    FockOperator::with_flags(CMatrix::from_diagonal(&v), Some(0), unitary)
}

/// `H = sum_k omega_k n_k`.
pub fn hamiltonian(fb: &FockBasis) -> Result<FockOperator> {
    let e = fb.state_energies().ok_or(Error::MissingEnergies)?;
    Ok(diagonal(e.iter().map(|&x| c(x)), fb.dim(), false))
}

/// Spectral projection of `H` onto energies at most `energy`.
pub fn energy_projection(fb: &FockBasis, energy: f64) -> Result<FockOperator> {
    let e = fb.state_energies().ok_or(Error::MissingEnergies)?;
    let cut = energy * (1.0 + 1e-12);
    Ok(diagonal(
        e.iter().map(|&x| if x <= cut { c(1.0) } else { c(0.0) }),
        fb.dim(),
        false,
    ))
}

pub fn number(fb: &FockBasis) -> FockOperator {
    diagonal(fb.states().iter().map(|s| c(s.particles() as f64)), fb.dim(), false)
}

/// `P = sum_k p_k n_k` on grid modes.
pub fn momentum(fb: &FockBasis) -> Result<FockOperator> {
    let p = fb.modes().momenta().ok_or(Error::MissingEnergies)?;
    Ok(diagonal(
        fb.states().iter().map(|s| c(s.iter().map(|(k, n)| n as f64 * p[k]).sum())),
        fb.dim(),
        false,
    ))
}

/// Second quantization of the translation `U_1(t, x)` on grid modes.
pub fn translation(fb: &FockBasis, t: f64, x: f64) -> Result<FockOperator> {
    let p = fb.modes().momenta().ok_or(Error::MissingEnergies)?;
    let w = fb.mode_energies().ok_or(Error::MissingEnergies)?;
    Ok(diagonal(
        fb.states().iter().map(|s| {
            let phase: f64 = s.iter().map(|(k, n)| n as f64 * (w[k] * t - p[k] * x)).sum();
            (I * phase).exp()
        }),
        fb.dim(),
        true,
    ))
}

fn check_weyl_norm(fb: &FockBasis, coeffs: &[C64]) -> Result<()> {
    let norm = coefficient_norm(coeffs);
    if norm > fb.n_max() as f64 / 8.0 {
        return Err(Error::TruncationRisk {
            norm,
            n_max: fb.n_max(),
        });
    }
    Ok(())
}

/// Sparse generator `i (a*(f) + a(f))`.
pub fn field_generator(fb: &FockBasis, coeffs: &[C64]) -> Result<SparseMatrix> {
    let a = lowering_sparse(fb, coeffs)?;
    Ok(a.add(&a.adjoint()).scaled(I))
}

/// `W(f) = exp(i (a*(f) + a(f)))` by scaling and squaring on the truncated space.
pub fn weyl_coeffs(fb: &FockBasis, coeffs: &[C64]) -> Result<FockOperator> {
    check_weyl_norm(fb, coeffs)?;
    let a = annihilator_coeffs(fb, coeffs)?.into_matrix();
    let generator = (&a + a.adjoint()) * I;
    Ok(FockOperator::with_flags(expm(&generator), None, true))
}

pub fn weyl(fb: &FockBasis, f: &FieldVector) -> Result<FockOperator> {
    weyl_coeffs(fb, &fb.coefficients(f)?)
}

/// `W(f) v` by a sparse Taylor series, for spaces too large for dense exponentials.
pub fn weyl_apply(fb: &FockBasis, coeffs: &[C64], v: &CVector) -> Result<CVector> {
    check_weyl_norm(fb, coeffs)?;
    let generator = field_generator(fb, coeffs)?;
    Ok(sparse_expm_apply(&generator, v, 1e-17))
}

/// `sum_{l <= degree} (s X)^l / l!` for a nilpotent-on-the-space `X`.
pub(crate) fn truncated_exponential(x: &CMatrix, s: C64, degree: usize) -> CMatrix {
    let n = x.nrows();
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    let scaled = x * s;
    for l in 1..=degree {
        term = &scaled * &term / c(l as f64);
        result += &term;
    }
    result
}

/// `:W(f): = exp(i a*(f)) exp(i a(f))`, each factor an exact finite series on
/// the truncated space.
pub fn normal_ordered_weyl_coeffs(fb: &FockBasis, coeffs: &[C64]) -> Result<FockOperator> {
    check_weyl_norm(fb, coeffs)?;
    let a = annihilator_coeffs(fb, coeffs)?.into_matrix();
    let right = truncated_exponential(&a, I, fb.n_max());
    let left = truncated_exponential(&a, -I, fb.n_max()).adjoint();
    Ok(FockOperator::with_flags(left * right, None, false))
}

pub fn normal_ordered_weyl(fb: &FockBasis, f: &FieldVector) -> Result<FockOperator> {
    normal_ordered_weyl_coeffs(fb, &fb.coefficients(f)?)
}

/// States with at most `particles` particles, where truncation effects on
/// operators of bounded norm are smallest.
pub fn low_sector(fb: &FockBasis, particles: u32) -> Vec<usize> {
    (0..fb.dim()).filter(|&i| fb.states()[i].particles() <= particles).collect()
}

/// `W(f)` together with its truncation error `eta`: the largest deviation,
/// on the low sector, from the same operator computed with four more particles.
pub fn weyl_verified(fb: &FockBasis, coeffs: &[C64], sector: u32) -> Result<(FockOperator, f64)> {
    let coarse = weyl_coeffs(fb, coeffs)?;
    let fine_basis = fb.refined(4)?;
    let fine = weyl_coeffs(&fine_basis, coeffs)?;
    let eta = truncation_gap(fb, &fine_basis, &coarse, &fine, sector);
    Ok((coarse, eta))
}

/// Operator norm of the difference of two truncations on the common low sector.
pub fn truncation_gap(coarse_basis: &FockBasis, fine_basis: &FockBasis, coarse: &FockOperator, fine: &FockOperator, sector: u32) -> f64 {
    let rows = low_sector(coarse_basis, sector);
    let mapped: Vec<usize> = rows
        .iter()
        .map(|&i| fine_basis.index_of(&coarse_basis.states()[i]).expect("refinement keeps states"))
        .collect();
    let a = coarse.block(&rows, &rows);
    let b = fine.block(&mapped, &mapped);
    operator_norm(&(a - b))
}
