use std::sync::Arc;

use super::{linear_combination, FieldVector, ModeBasis};
use crate::error::{invalid, Error, Result};
use crate::linalg::{c, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    /// Exponent of omega relating the frame vector to a plain Fourier transform.
    fn omega_power(self) -> f64 {
        match self {
            Sign::Plus => -0.5,
            Sign::Minus => 0.5,
        }
    }
}

/// Smooth bump supported in `(-r, r)`, modulated by `cos(k pi x / r)`.
pub fn bump(radius: f64, k: usize, x: f64) -> f64 {
    let u = x / radius;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    (-1.0 / (1.0 - u * u)).exp() * (k as f64 * std::f64::consts::PI * x / radius).cos()
}

/// Orthonormal vectors `g^+_i = omega^{-1/2} h_i`, `g^-_i = omega^{1/2} h_i`
/// with `h_i` transforms of bumps supported in the ball of radius `r`.
///
/// The frames span the ranges of the projections `L^+` and `L^-` onto
/// localized field and momentum data.
#[derive(Debug, Clone)]
pub struct LocalizationFrame {
    basis: Arc<ModeBasis>,
    radius: f64,
    plus: Vec<FieldVector>,
    minus: Vec<FieldVector>,
}

impl LocalizationFrame {
    pub fn build(basis: &Arc<ModeBasis>, radius: f64, n_test: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid("radius", format!("{radius} is not a positive number")));
        }
        if n_test == 0 {
            return Err(invalid("n_test", "need at least one test function"));
        }
        let positions = basis.positions();
        let raw: Vec<FieldVector> = (0..n_test)
            .map(|k| {
                let samples: Vec<C64> = positions.iter().map(|&x| c(bump(radius, k, x))).collect();
                FieldVector::from_configuration(basis, &samples)
            })
            .collect::<Result<_>>()?;
        let mut frames = Vec::with_capacity(2);
        for sign in Sign::BOTH {
            let power = sign.omega_power();
            let weighted: Vec<FieldVector> = raw.iter().map(|h| h.map(|_, w, a| a * w.powf(power))).collect();
            let ortho = gram_schmidt(&weighted, 1e-8);
            if ortho.len() < n_test {
                return Err(Error::FrameRank {
                    requested: n_test,
                    achieved: ortho.len(),
                });
            }
            frames.push(ortho);
        }
        let minus = frames.pop().unwrap();
        let plus = frames.pop().unwrap();
        Ok(LocalizationFrame {
            basis: Arc::clone(basis),
            radius,
            plus,
            minus,
        })
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        &self.basis
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_test(&self) -> usize {
        self.plus.len()
    }

    pub fn vectors(&self, sign: Sign) -> &[FieldVector] {
        match sign {
            Sign::Plus => &self.plus,
            Sign::Minus => &self.minus,
        }
    }

    /// Symbol `sum_i a_i g^+_i + i sum_j b_j g^-_j`.
    pub fn symbol(&self, plus_coeffs: &[f64], minus_coeffs: &[f64]) -> Result<FieldVector> {
        if plus_coeffs.len() != self.n_test() || minus_coeffs.len() != self.n_test() {
            return Err(Error::Shape(format!(
                "symbol needs {} coefficients per frame",
                self.n_test()
            )));
        }
        let mut terms: Vec<(C64, &FieldVector)> = Vec::with_capacity(2 * self.n_test());
        terms.extend(plus_coeffs.iter().zip(&self.plus).map(|(&a, g)| (c(a), g)));
        terms.extend(minus_coeffs.iter().zip(&self.minus).map(|(&b, g)| (I * b, g)));
        Ok(linear_combination(&self.basis, &terms))
    }

    /// Orthogonal projection onto the span of one frame.
    pub fn project(&self, sign: Sign, f: &FieldVector) -> FieldVector {
        let frame = self.vectors(sign);
        let weights: Vec<C64> = frame.iter().map(|g| g.inner(f)).collect();
        let terms: Vec<(C64, &FieldVector)> = weights.into_iter().zip(frame).collect();
        linear_combination(&self.basis, &terms)
    }

    /// Fraction of configuration-space mass of the unweighted profile of a
    /// frame vector lying outside `|x| <= r + margin`.
    pub fn support_leakage(&self, sign: Sign, index: usize, margin: f64) -> f64 {
        let power = sign.omega_power();
        let plain = self.vectors(sign)[index].map(|_, w, a| a * w.powf(-power));
        let samples = plain.to_configuration();
        let positions = self.basis.positions();
        let total: f64 = samples.iter().map(|s| s.norm_sqr()).sum();
        let outside: f64 = samples
            .iter()
            .zip(&positions)
            .filter(|(_, &x)| x.abs() > self.radius + margin)
            .map(|(s, _)| s.norm_sqr())
            .sum();
        outside / total
    }
}

/// Modified Gram-Schmidt, run twice, dropping vectors whose residual falls
/// below `tol` times their original norm.
pub(crate) fn gram_schmidt(vectors: &[FieldVector], tol: f64) -> Vec<FieldVector> {
    let mut out: Vec<FieldVector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let original = v.norm();
        if original == 0.0 {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let proj = u.inner(&w);
                w = &w - &u.scale(proj);
            }
        }
        let n = w.norm();
        if n > tol * original {
            out.push(w.scale(c(1.0 / n)));
        }
    }
    out
}
