//! Conformal energy damping: the boundary function `g`, the map `z(w)` from
//! the unit disc onto the slit strip, the smeared operators and the damped
//! maps built from them.

use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::linalg::{c, hermitian_eigen, hermitian_function, CMatrix, CVector, C64, I};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    beta: f64,
    delta: f64,
}

impl DampingParams {
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("{beta} is not a positive number")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(invalid("delta", format!("{delta} is not a positive number")));
        }
        Ok(DampingParams { beta, delta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `gamma = 2 arctan exp(-pi delta / (2 beta))`.
    pub fn gamma(&self) -> f64 {
        2.0 * (-PI * self.delta / (2.0 * self.beta)).exp().atan()
    }
}

/// `g(phi) = (beta/pi) ln |cot((phi + gamma)/2) cot((phi - gamma)/2)|`.
pub fn g_function(params: &DampingParams, phi: f64) -> Result<f64> {
    let gamma = params.gamma();
    let u = 0.5 * (phi + gamma);
    let v = 0.5 * (phi - gamma);
    let value = (u.tan() * v.tan()).abs();
    if value == 0.0 || !value.is_finite() || (phi.abs() - gamma).abs() < 1e-15 {
        return Err(Error::Singularity(phi));
    }
    Ok(-params.beta / PI * value.ln())
}

/// `z(w) = (beta/pi) { ln((1 + w e^{i gamma})/(1 - w e^{i gamma})) - ln((1 - w e^{-i gamma})/(1 + w e^{-i gamma})) }`.
pub fn conformal_map(params: &DampingParams, w: C64) -> Result<C64> {
    if w.norm() > 1.0 + 1e-12 {
        return Err(Error::OutsideDisk(format!("{w}")));
    }
    let gamma = params.gamma();
    let up = w * (I * gamma).exp();
    let down = w * (-I * gamma).exp();
    let poles = [(c(1.0) - up).norm(), (c(1.0) + up).norm(), (c(1.0) - down).norm(), (c(1.0) + down).norm()];
    if poles.iter().any(|&d| d < 1e-14) {
        return Err(Error::Singularity(w.arg()));
    }
    let first = ((c(1.0) + up) / (c(1.0) - up)).ln();
    let second = ((c(1.0) - down) / (c(1.0) + down)).ln();
    Ok((first - second) * (params.beta / PI))
}

/// Mean of `f(r e^{i phi})` over `n` equally spaced angles.
pub fn circle_average(r: f64, n: usize, f: impl Fn(C64) -> C64) -> C64 {
    (0..n)
        .map(|k| f(C64::from_polar(r, 2.0 * PI * k as f64 / n as f64)))
        .sum::<C64>()
        / c(n as f64)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A piece of `[0, pi]` with one endpoint at a singularity of `g`,
/// parametrised by the distance `eps` to that endpoint.
#[derive(Debug, Clone, Copy)]
struct Segment {
    at_gamma: bool,
    outward: bool,
    length: f64,
}

impl Segment {
    /// `g` at distance `eps` from the singular endpoint, evaluated without
    /// cancellation in the singular factor.
    fn g(&self, params: &DampingParams, gamma: f64, eps: f64) -> f64 {
        let d = if self.outward { 0.5 * eps } else { -0.5 * eps };
        let (u_abs_cot, v_abs_cot) = if self.at_gamma {
            ((gamma + d).tan().recip().abs(), d.tan().recip().abs())
        } else {
            (d.tan().abs(), (0.5 * PI - gamma + d).tan().recip().abs())
        };
        params.beta / PI * (u_abs_cot.ln() + v_abs_cot.ln())
    }
}

/// The scalar damping weights for one frequency `omega`:
/// `ring = (1/2pi) [int_0^gamma + int_{pi-gamma}^pi] e^{i omega g}` and
/// `core = (1/2pi) int_gamma^{pi-gamma} e^{i omega g}`.
#[derive(Debug, Clone, Copy)]
pub struct DampingWeights {
    pub ring: C64,
    pub core: C64,
    pub error: f64,
}

const TAIL: f64 = 40.0;
const PANEL_NODES: usize = 16;

pub fn damping_weights(params: &DampingParams, omega: f64, quadrature_n: usize) -> Result<DampingWeights> {
    if quadrature_n < 64 {
        return Err(invalid("quadrature_n", format!("{quadrature_n} < 64")));
    }
    let gamma = params.gamma();
    let (nodes, weights) = gauss_legendre(PANEL_NODES);
    let panels = (quadrature_n / PANEL_NODES).max(1);
    let segments = [
        (Segment { at_gamma: true, outward: false, length: gamma }, true),
        (Segment { at_gamma: true, outward: true, length: 0.5 * PI - gamma }, false),
        (Segment { at_gamma: false, outward: false, length: 0.5 * PI - gamma }, false),
        (Segment { at_gamma: false, outward: true, length: gamma }, true),
    ];
    let mut ring = C64::new(0.0, 0.0);
    let mut core = C64::new(0.0, 0.0);
    let mut error = 0.0;
    for (seg, is_ring) in segments {
        let integrand = |s: f64| {
            let eps = seg.length * (-s).exp();
            (I * omega * seg.g(params, gamma, eps)).exp() * eps
        };
        let rule = |a: f64, b: f64| -> C64 {
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            nodes
                .iter()
                .zip(&weights)
                .map(|(&x, &w)| integrand(mid + half * x) * w)
                .sum::<C64>()
                * half
        };
        let mut total = C64::new(0.0, 0.0);
        for p in 0..panels {
            let a = TAIL * p as f64 / panels as f64;
            let b = TAIL * (p + 1) as f64 / panels as f64;
            let (value, err) = adaptive(&rule, a, b, rule(a, b), 1e-15, 0);
            total += value;
            error += err;
        }
        error += seg.length * (-TAIL).exp();
        if is_ring {
            ring += total;
        } else {
            core += total;
        }
    }
    let scale = 1.0 / (2.0 * PI);
    Ok(DampingWeights {
        ring: ring * scale,
        core: core * scale,
        error: error * scale,
    })
}

fn adaptive(rule: &impl Fn(f64, f64) -> C64, a: f64, b: f64, whole: C64, tol: f64, depth: u32) -> (C64, f64) {
    let mid = 0.5 * (a + b);
    let left = rule(a, mid);
    let right = rule(mid, b);
    let diff = (left + right - whole).norm();
    if diff <= tol || depth >= 30 {
        return (left + right, diff);
    }
    let (l, el) = adaptive(rule, a, mid, left, 0.5 * tol, depth + 1);
    let (r, er) = adaptive(rule, mid, b, right, 0.5 * tol, depth + 1);
    (l + r, el + er)
}

/// The smeared pair `(ring, core)` of `B(t) = e^{itH} B e^{-itH}` along `t = g(phi)`.
#[derive(Debug, Clone)]
pub struct Smeared {
    pub ring: CMatrix,
    pub core: CMatrix,
    pub error: f64,
}

/// Computes both smeared operators in the eigenbasis of `H`, where each matrix
/// element only needs the scalar weights at its Bohr frequency.
pub fn smear_operators(b: &CMatrix, h: &CMatrix, params: &DampingParams, quadrature_n: usize) -> Result<Smeared> {
    let n = h.nrows();
    if b.nrows() != n || b.ncols() != n || h.ncols() != n {
        return Err(Error::Shape("B and H must be square of equal size".into()));
    }
    let (energies, v) = hermitian_eigen(h);
    let bb = v.adjoint() * b * &v;
    let mut ring = CMatrix::zeros(n, n);
    let mut core = CMatrix::zeros(n, n);
    let mut error: f64 = 0.0;
    let mut cache: Vec<(f64, DampingWeights)> = Vec::new();
    for r in 0..n {
        for k in 0..n {
            let omega = energies[r] - energies[k];
            let weights = match cache.iter().find(|(w, _)| (w - omega).abs() < 1e-14) {
                Some((_, wts)) => *wts,
                None => {
                    let wts = damping_weights(params, omega, quadrature_n)?;
                    cache.push((omega, wts));
                    wts
                }
            };
            ring[(r, k)] = bb[(r, k)] * weights.ring;
            core[(r, k)] = bb[(r, k)] * weights.core;
            error = error.max(weights.error);
        }
    }
    let b_norm = crate::linalg::operator_norm(b);
    let tolerance = 1e-8;
    let estimate = error * n as f64;
    if estimate > tolerance * b_norm.max(1e-300) {
        return Err(Error::Quadrature { estimate, tolerance });
    }
    Ok(Smeared {
        ring: &v * ring * v.adjoint(),
        core: &v * core * v.adjoint(),
        error: estimate,
    })
}

/// Residual of
/// `phi(AB) = phi(A B_ring + B_ring A) + phi(A e^{-bH} B_core e^{bH}) + phi(e^{bH} B_core e^{-bH} A)`
/// for `phi(X) = <psi1| X psi2>`.
pub fn verify_claim_identity(
    a: &CMatrix,
    b: &CMatrix,
    h: &CMatrix,
    params: &DampingParams,
    psi1: &CVector,
    psi2: &CVector,
    quadrature_n: usize,
) -> Result<f64> {
    let smeared = smear_operators(b, h, params, quadrature_n)?;
    let beta = params.beta();
    let up = hermitian_function(h, |e| c((beta * e).exp()));
    let down = hermitian_function(h, |e| c((-beta * e).exp()));
    let phi = |x: &CMatrix| psi1.dotc(&(x * psi2));
    let lhs = phi(&(a * b));
    let anti = a * &smeared.ring + &smeared.ring * a;
    let upper = a * &down * &smeared.core * &up;
    let lower = &up * &smeared.core * &down * a;
    Ok((lhs - phi(&anti) - phi(&upper) - phi(&lower)).norm())
}

/// `(A_1 (x) 1, 1 (x) B_2, H_1 (x) 1 + 1 (x) H_2)`: commuting at all times.
pub fn tensor_instance(a1: &CMatrix, b2: &CMatrix, h1: &CMatrix, h2: &CMatrix) -> (CMatrix, CMatrix, CMatrix) {
    let id1 = CMatrix::identity(a1.nrows(), a1.nrows());
    let id2 = CMatrix::identity(b2.nrows(), b2.nrows());
    (a1.kronecker(&id2), id1.kronecker(b2), h1.kronecker(&id2) + id1.kronecker(h2))
}

/// `Xi_beta(A) = e^{-beta H} A e^{-beta H}`.
pub fn xi(a: &CMatrix, h: &CMatrix, beta: f64) -> CMatrix {
    let damp = hermitian_function(h, |e| c((-beta * e).exp()));
    &damp * a * &damp
}

/// `Xi_{beta1, beta2}(A) = e^{-beta1 H} A_{beta2} e^{-beta1 H}` with `A_{beta2}`
/// the core smearing at `inner`.
pub fn xi_smeared(a: &CMatrix, h: &CMatrix, beta1: f64, inner: &DampingParams, quadrature_n: usize) -> Result<CMatrix> {
    let smeared = smear_operators(a, h, inner, quadrature_n)?;
    Ok(xi(&smeared.core, h, beta1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> DampingParams {
        DampingParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn gamma_is_monotone() {
        let g1 = DampingParams::new(1.0, 1.0).unwrap().gamma();
        let g2 = DampingParams::new(1.0, 2.0).unwrap().gamma();
        let g3 = DampingParams::new(2.0, 1.0).unwrap().gamma();
        assert!(g1 > 0.0 && g1 < PI / 2.0);
        assert!(g2 < g1 && g3 > g1);
    }

    #[test]
    fn g_endpoints_and_evenness() {
        for (beta, delta) in [(1.0, 1.0), (0.7, 2.5), (3.0, 0.2)] {
            let p = DampingParams::new(beta, delta).unwrap();
            assert!((g_function(&p, 0.0).unwrap() - delta).abs() < 1e-12);
            assert!((g_function(&p, PI).unwrap() + delta).abs() < 1e-12);
            for phi in [0.1, 0.9, 2.0, 3.0] {
                assert!((g_function(&p, phi).unwrap() - g_function(&p, -phi).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn g_rejects_the_singularity() {
        let p = params();
        assert!(matches!(g_function(&p, p.gamma()), Err(Error::Singularity(_))));
    }

    #[test]
    fn conformal_map_basics() {
        let p = params();
        assert_eq!(conformal_map(&p, c(0.0)).unwrap(), c(0.0));
        assert!(conformal_map(&p, c(1.5)).is_err());
        assert!(conformal_map(&p, (I * p.gamma()).exp()).is_err());
    }

    #[test]
    fn boundary_values() {
        let p = params();
        let gamma = p.gamma();
        for k in 0..400 {
            let phi = -PI + 2.0 * PI * (k as f64 + 0.5) / 400.0;
            if (phi.abs() - gamma).abs() < 1e-3 || (phi.abs() - (PI - gamma)).abs() < 1e-3 {
                continue;
            }
            let z = conformal_map(&p, C64::from_polar(1.0, phi)).unwrap();
            assert!((z.re - g_function(&p, phi).unwrap()).abs() < 1e-9);
            let expected_im = if phi.abs() < gamma || phi.abs() > PI - gamma {
                0.0
            } else if phi > 0.0 {
                p.beta()
            } else {
                -p.beta()
            };
            assert!((z.im - expected_im).abs() < 1e-9, "phi {phi}: {}", z.im);
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((integral - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn identity_weights() {
        let p = params();
        let w = damping_weights(&p, 0.0, 128).unwrap();
        assert!((w.ring - c(p.gamma() / PI)).norm() < 1e-13);
        assert!((w.core - c((PI - 2.0 * p.gamma()) / (2.0 * PI))).norm() < 1e-13);
    }

    #[test]
    fn scalar_identity_holds_at_every_frequency() {
        let p = DampingParams::new(1.3, 0.8).unwrap();
        for omega in [-4.0, -1.1, 0.3, 2.0, 5.5] {
            let w = damping_weights(&p, omega, 256).unwrap();
            let total = w.ring * 2.0 + w.core * 2.0 * (p.beta() * omega).cosh();
            assert!((total - c(1.0)).norm() < 1e-11, "omega {omega}: {total}");
        }
    }
}
