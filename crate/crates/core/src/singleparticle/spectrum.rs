use std::sync::Arc;

use rustfft::FftPlanner;

use super::frame::{gram_schmidt, LocalizationFrame, Sign};
use super::{linear_combination, FieldVector, ModeBasis};
use crate::error::{invalid, Result};
use crate::linalg::{c, hermitian_eigen, CMatrix, C64, I};

/// Spectral data of `T = (|T_E^+|^2 + |T_E^-|^2 + |T_k^+|^2 + |T_k^-|^2)^{1/2}`
/// with `T_E^± = Q_E L^±` and `T_k^± = exp(-|omega|^kappa / 2) L^±`.
///
/// `T` has rank at most `2 n_test` and is diagonalized on the span of both
/// frames. Eigenvalues are sorted descending and eigenvectors are J-invariant.
#[derive(Debug, Clone)]
pub struct TSpectrum {
    frame: Arc<LocalizationFrame>,
    energy: f64,
    kappa: f64,
    values: Vec<f64>,
    vectors: Vec<FieldVector>,
    constituent_norms: [f64; 4],
}

/// Which weight enters a constituent `|T|^2 = L w L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constituent {
    Energy(Sign),
    Damping(Sign),
}

impl Constituent {
    pub const ALL: [Constituent; 4] = [
        Constituent::Energy(Sign::Plus),
        Constituent::Energy(Sign::Minus),
        Constituent::Damping(Sign::Plus),
        Constituent::Damping(Sign::Minus),
    ];
}

impl TSpectrum {
    pub fn build(frame: &Arc<LocalizationFrame>, energy: f64, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(invalid("kappa", format!("{kappa} is outside (0, 1)")));
        }
        if !(energy >= 0.0 && energy.is_finite()) {
            return Err(invalid("energy", format!("{energy} is not a non-negative number")));
        }
        let basis = Arc::clone(frame.basis());
        let mut all: Vec<FieldVector> = frame.vectors(Sign::Plus).to_vec();
        all.extend(frame.vectors(Sign::Minus).iter().cloned());
        let span = gram_schmidt(&all, 1e-12);
        let k = span.len();

        let mut t2 = CMatrix::zeros(k, k);
        let mut constituent_norms = [0.0; 4];
        for (slot, part) in Constituent::ALL.iter().enumerate() {
            let (sign, weight) = constituent_weight(&basis, *part, energy, kappa);
            let g = frame.vectors(sign);
            let gram = weighted_gram(g, g, &weight);
            let (vals, _) = hermitian_eigen(&gram);
            constituent_norms[slot] = vals.iter().map(|v| v.max(0.0).sqrt()).sum();
            let overlap = CMatrix::from_fn(k, g.len(), |a, i| span[a].inner(&g[i]));
            t2 += &overlap * gram * overlap.adjoint();
        }

        let (vals, vecs) = hermitian_eigen(&t2);
        let mut values: Vec<f64> = vals.iter().rev().map(|v| v.max(0.0).sqrt()).collect();
        let mut vectors: Vec<FieldVector> = (0..k)
            .rev()
            .map(|col| {
                let terms: Vec<(C64, &FieldVector)> = (0..k).map(|a| (vecs[(a, col)], &span[a])).collect();
                linear_combination(&basis, &terms)
            })
            .collect();
        symmetrize_clusters(&values, &mut vectors, 1e-10);
        for v in values.iter_mut() {
            if !v.is_finite() {
                *v = 0.0;
            }
        }
        Ok(TSpectrum {
            frame: Arc::clone(frame),
            energy,
            kappa,
            values,
            vectors,
            constituent_norms,
        })
    }

    pub fn frame(&self) -> &Arc<LocalizationFrame> {
        &self.frame
    }

    pub fn basis(&self) -> &Arc<ModeBasis> {
        self.frame.basis()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Eigenvalues `t_i`, descending.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> &[FieldVector] {
        &self.vectors
    }

    pub fn trace_norm(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Trace norms of `T_E^+, T_E^-, T_k^+, T_k^-` in that order.
    pub fn constituent_trace_norms(&self) -> [f64; 4] {
        self.constituent_norms
    }

    /// Number of leading eigenvalues above `rel * t_1`.
    pub fn retained(&self, rel: f64) -> usize {
        let top = self.values.first().copied().unwrap_or(0.0);
        self.values.iter().take_while(|&&t| t > rel * top).count()
    }

    /// `T^2 v` assembled from its spectral decomposition.
    pub fn apply_t_squared(&self, v: &FieldVector) -> FieldVector {
        let terms: Vec<(C64, &FieldVector)> = self
            .values
            .iter()
            .zip(&self.vectors)
            .map(|(t, e)| (e.inner(v) * t * t, e))
            .collect();
        linear_combination(self.basis(), &terms)
    }

    /// `sum_parts L w L v`, assembled from the frames directly.
    pub fn apply_constituents_squared(&self, v: &FieldVector) -> FieldVector {
        let mut out = FieldVector::zeros(self.basis());
        for part in Constituent::ALL {
            let (sign, weight) = constituent_weight(self.basis(), part, self.energy, self.kappa);
            let projected = self.frame.project(sign, v);
            let weighted = FieldVector::new(
                self.basis(),
                projected
                    .amplitudes()
                    .iter()
                    .zip(&weight)
                    .map(|(a, w)| a * w)
                    .collect(),
            )
            .expect("same grid");
            out = &out + &self.frame.project(sign, &weighted);
        }
        out
    }

    /// `L^± e_i` translated in space by `x`.
    pub fn localized_mode(&self, sign: Sign, i: usize, x: f64) -> FieldVector {
        self.frame.project(sign, &self.vectors[i]).translate(0.0, x)
    }
}

fn constituent_weight(basis: &ModeBasis, part: Constituent, energy: f64, kappa: f64) -> (Sign, Vec<f64>) {
    match part {
        Constituent::Energy(sign) => (
            sign,
            basis.energies().iter().map(|&w| if w <= energy { 1.0 } else { 0.0 }).collect(),
        ),
        Constituent::Damping(sign) => (sign, basis.energies().iter().map(|&w| (-w.powf(kappa)).exp()).collect()),
    }
}

fn weighted_gram(a: &[FieldVector], b: &[FieldVector], weight: &[f64]) -> CMatrix {
    CMatrix::from_fn(a.len(), b.len(), |i, j| {
        a[i].amplitudes()
            .iter()
            .zip(b[j].amplitudes())
            .zip(weight)
            .map(|((x, y), w)| x.conj() * y * *w)
            .sum::<C64>()
            * a[i].basis().dp()
    })
}

/// Replace each near-degenerate eigenvector cluster by a J-invariant
/// orthonormal basis of the same subspace.
fn symmetrize_clusters(values: &[f64], vectors: &mut [FieldVector], gap: f64) {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end - 1] - values[end]).abs() < gap {
            end += 1;
        }
        let size = end - start;
        let mut candidates = Vec::with_capacity(2 * size);
        for v in &vectors[start..end] {
            let jv = v.conjugate_j();
            candidates.push((v + &jv).scale(c(0.5)));
            candidates.push((v - &jv).scale(I * 0.5));
        }
        candidates.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
        let ortho = gram_schmidt(&candidates, 1e-6);
        for (slot, w) in ortho.into_iter().take(size).enumerate() {
            vectors[start + slot] = w;
        }
        start = end;
    }
}

/// `<L^± e_{i,x} | L^± e_{j,y}>` for spatial translations `x`, `y`.
pub fn two_point_correlation(spectrum: &TSpectrum, i: usize, j: usize, x: f64, y: f64, sign: Sign) -> C64 {
    let u = spectrum.localized_mode(sign, i, x);
    let v = spectrum.localized_mode(sign, j, y);
    u.inner(&v)
}

/// Least-squares slope of `ln |correlation|` against the separation over
/// `n` equally spaced points in `[d_lo, d_hi]`.
pub fn decay_fit(spectrum: &TSpectrum, i: usize, j: usize, sign: Sign, d_lo: f64, d_hi: f64, n: usize) -> f64 {
    let u = spectrum.frame().project(sign, &spectrum.vectors()[i]);
    let v = spectrum.frame().project(sign, &spectrum.vectors()[j]);
    let points: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let d = d_lo + (d_hi - d_lo) * k as f64 / (n - 1) as f64;
            (d, u.inner(&v.translate(0.0, d)).norm().ln())
        })
        .collect();
    let mean_d = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let mean_l = points.iter().map(|p| p.1).sum::<f64>() / n as f64;
    let num: f64 = points.iter().map(|p| (p.0 - mean_d) * (p.1 - mean_l)).sum();
    let den: f64 = points.iter().map(|p| (p.0 - mean_d).powi(2)).sum();
    num / den
}

/// Measured decay profile: the square root of
/// `max |<L^± e_{i,x}|L^± e_{j,y}>| / (t_i t_j)` over both signs, the first
/// `retained` modes and all lattice separations `d` with
/// `2r + delta <= d <= period / 2`.
///
/// With this choice `|<L^± e_{i,x}|L^± e_{j,y}>| <= t_i t_j g(delta)^2` holds
/// by construction on every lattice configuration with the given spacing.
pub fn measured_g(spectrum: &TSpectrum, delta: f64, retained: usize) -> f64 {
    let basis = spectrum.basis();
    let n = basis.n_modes();
    let dx = basis.lattice_spacing();
    let d_min = 2.0 * spectrum.frame().radius() + delta;
    let d_max = basis.period() / 2.0;
    let first = (d_min / dx - 1e-9).ceil() as usize;
    let last = ((d_max / dx).floor() as usize).min(n - 1);
    let t = spectrum.values();
    // With p_k = p_0 + k dp and dx = 2 pi / (n dp), the overlap at d = s dx is
    // a phase times the inverse DFT of the pointwise product at index s.
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut worst: f64 = 0.0;
    for sign in Sign::BOTH {
        let modes: Vec<FieldVector> = (0..retained)
            .map(|i| spectrum.frame().project(sign, &spectrum.vectors()[i]))
            .collect();
        for (i, u) in modes.iter().enumerate() {
            for (j, v) in modes.iter().enumerate() {
                let mut buffer: Vec<C64> = u
                    .amplitudes()
                    .iter()
                    .zip(v.amplitudes())
                    .map(|(a, b)| a.conj() * b * basis.dp())
                    .collect();
                fft.process(&mut buffer);
                for value in &buffer[first..=last] {
                    worst = worst.max(value.norm() / (t[i] * t[j]));
                }
            }
        }
    }
    worst.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(energy: f64) -> TSpectrum {
        let b = ModeBasis::shared(1.0, 160.0, 6401).unwrap();
        let frame = Arc::new(LocalizationFrame::build(&b, 0.5, 3).unwrap());
        TSpectrum::build(&frame, energy, 0.5).unwrap()
    }

    #[test]
    fn measured_g_dominates_lattice_correlations() {
        let s = spectrum(1.2);
        let delta = 1.5;
        let g = measured_g(&s, delta, 4);
        let dx = s.basis().lattice_spacing();
        let t = s.values();
        for steps in [0usize, 7, 40, 300, 2000] {
            let d = s.basis().snap(2.0 * 0.5 + delta + dx) + steps as f64 * dx;
            for sign in Sign::BOTH {
                for (i, j) in [(0, 0), (1, 3), (3, 2)] {
                    let value = two_point_correlation(&s, i, j, 0.3 * dx, 0.3 * dx + d, sign).norm();
                    assert!(value <= t[i] * t[j] * g * g * (1.0 + 1e-9), "d {d}: {value} vs {}", t[i] * t[j] * g * g);
                }
            }
        }
    }

    #[test]
    fn spectrum_reproduces_t_squared() {
        let s = spectrum(1.2);
        let probe = s.frame().symbol(&[0.4, -0.2, 1.0], &[0.3, 0.8, -0.5]).unwrap().translate(0.0, 0.1);
        let lhs = s.apply_t_squared(&probe);
        let rhs = s.apply_constituents_squared(&probe);
        assert!((&lhs - &rhs).norm() < 1e-12 * rhs.norm().max(1.0));
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_j_invariant() {
        let s = spectrum(1.2);
        let e = s.vectors();
        for i in 0..e.len() {
            assert!((&e[i].conjugate_j() - &e[i]).norm() < 1e-8);
            for j in 0..e.len() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((e[i].inner(&e[j]) - c(want)).norm() < 1e-10);
            }
        }
        assert!(s.values().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trace_norm_is_subadditive() {
        for energy in [0.5, 1.2, 3.0] {
            let s = spectrum(energy);
            let parts: f64 = s.constituent_trace_norms().iter().sum();
            assert!(s.trace_norm() <= parts * (1.0 + 1e-12));
        }
    }

    #[test]
    fn energy_below_mass_leaves_damping_only() {
        let s = spectrum(0.5);
        let norms = s.constituent_trace_norms();
        assert_eq!(norms[0], 0.0);
        assert_eq!(norms[1], 0.0);
    }

    #[test]
    fn diagonal_correlation_is_squared_norm() {
        let s = spectrum(1.2);
        let v = two_point_correlation(&s, 0, 0, 2.0, 2.0, Sign::Plus);
        let norm = s.frame().project(Sign::Plus, &s.vectors()[0]).norm_sqr();
        assert!(v.im.abs() < 1e-14);
        assert!((v.re - norm).abs() < 1e-13);
    }

    #[test]
    fn correlations_decay_at_the_mass() {
        let s = spectrum(1.2);
        for (i, j) in [(0, 0), (0, 1), (2, 2), (5, 5)] {
            let slope = decay_fit(&s, i, j, Sign::Plus, 5.0, 15.0, 21);
            assert!((slope + 1.0).abs() < 0.15, "modes {i},{j}: slope {slope}");
        }
    }
}
