use super::correlation::pair_value;
use super::{e_coefficients, pair_list, vacuum_element, Bundle, CorrelationContext, EBasisCoefficients, MultiIndex, SContext};
use crate::error::{invalid, Result};
use crate::fock::{creator, EnergyFunctional, EnergyWindow, FockBasis};
use crate::linalg::{c, i_pow, CMatrix, CVector, C64, I};
use crate::singleparticle::{gram_schmidt, linear_combination, FieldVector, Sign};

/// Truncated expansion against its closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCheck {
    pub series: C64,
    pub closed: C64,
    pub residual: f64,
    /// Rigorous bound on the terms beyond the truncation.
    pub tail_bound: f64,
    /// Worst reconstruction residual of the symbols in the eigenbasis of `T`.
    pub reconstruction: f64,
    pub terms: usize,
}

fn slot_coefficients(ctx: &CorrelationContext, symbols: &[FieldVector]) -> Result<Vec<EBasisCoefficients>> {
    if symbols.len() != ctx.slots() {
        return Err(invalid("symbols", format!("need one symbol per site ({})", ctx.slots())));
    }
    Ok(symbols.iter().map(|f| e_coefficients(ctx.spectrum(), ctx.modes(), f)).collect())
}

/// Normal-ordered Weyl expansion:
/// `sum_{mu,nu} i^{|mu+|+|nu+|+2|mu-|} <e|f>^{mu+nu} / (mu! nu!) phi(a*(L e_x)^mu a(L e_x)^nu)`
/// over `|mu|, |nu| <= floor(E/m)` against `phi(:W(sum_i f_{i,x_i}):)`.
/// The truncation is exact on the energy window.
pub fn summunu_check(ctx: &SContext, phi: &EnergyFunctional, symbols: &[FieldVector]) -> Result<ExpansionCheck> {
    let corr = ctx.correlation();
    let coeffs = slot_coefficients(corr, symbols)?;
    let degree = (ctx.energy_ratio() * (1.0 + 1e-12)).floor() as u32;
    let bundles = Bundle::up_to(corr.slots(), corr.modes(), degree);
    let weights: Vec<f64> = bundles.iter().map(|b| b.power(&coeffs) / b.factorial()).collect();
    let vectors: Vec<Vec<CVector>> = bundles.iter().map(|b| ctx.lowered(phi, b)).collect();

    // The phase splits as i^{|mu+| + 2|mu-|} i^{|nu+|}, so the double sum
    // collapses to one inner product per state vector.
    let mut left = vec![CVector::zeros(ctx.fock_basis().dim()); phi.terms().len()];
    let mut right = left.clone();
    let mut terms = 0;
    for (b, (w, v)) in bundles.iter().zip(weights.iter().zip(&vectors)) {
        if *w == 0.0 {
            continue;
        }
        terms += 1;
        let to_left = (i_pow(b.abs_plus() as i64 + 2 * b.abs_minus() as i64) * *w).conj();
        let to_right = i_pow(b.abs_plus() as i64) * *w;
        for ((l, r), x) in left.iter_mut().zip(right.iter_mut()).zip(v) {
            *l += x * to_left;
            *r += x * to_right;
        }
    }
    let series = pair_value(phi, &left, &right);
    let terms = terms * terms;

    let fb = ctx.fock_basis();
    let translated: Vec<FieldVector> = symbols
        .iter()
        .zip(corr.sites())
        .map(|(f, &x)| f.translate(0.0, x))
        .collect();
    let total = linear_combination(symbols[0].basis(), &translated.iter().map(|f| (c(1.0), f)).collect::<Vec<_>>());
    let window = EnergyWindow::new(fb, ctx.energy())?;
    let lowering = window.annihilator(fb, &total)?;
    let exp_apply = |s: C64, v: &CVector| {
        let mut term = v.clone();
        let mut out = v.clone();
        for l in 1..=window.degree() {
            term = &lowering * term * (s / l as f64);
            out += &term;
        }
        out
    };
    let closed: C64 = phi
        .window_terms(&window)
        .iter()
        .map(|(w, v)| w * exp_apply(-I, v).dotc(&exp_apply(I, v)))
        .sum();
    Ok(ExpansionCheck {
        series,
        closed,
        residual: (series - closed).norm(),
        tail_bound: 0.0,
        reconstruction: coeffs.iter().map(|c| c.residual).fold(0.0, f64::max),
        terms,
    })
}

/// Pair-correlation expansion:
/// `sum_{(alpha,beta) != 0} <e|f>^{alpha_-> + beta_<-} F_{alpha,beta}(x) / sqrt(alpha! beta!)`
/// over `|alpha| + |beta| <= max_degree` against
/// `prod_{i<j} exp(-<f+_i|f+_j> - <f-_i|f-_j>) - 1`.
///
/// `F` factorizes over pairs and signs, so the series is accumulated as a
/// product of per-factor polynomials in the contraction order, truncated
/// at `max_degree / 2`.
pub fn expo_check(ctx: &CorrelationContext, symbols: &[FieldVector], max_degree: u32) -> Result<ExpansionCheck> {
    let coeffs = slot_coefficients(ctx, symbols)?;
    let order = (max_degree / 2) as usize;
    let mut product = vec![c(0.0); order + 1];
    product[0] = c(1.0);
    let mut terms = 0;
    let mut pair_sizes = Vec::new();
    for (i, j) in pair_list(ctx.slots()) {
        for sign in Sign::BOTH {
            let (ci, cj) = match sign {
                Sign::Plus => (&coeffs[i].plus, &coeffs[j].plus),
                Sign::Minus => (&coeffs[i].minus, &coeffs[j].minus),
            };
            let gram = ctx.gram(sign, i, j);
            let mut factor = vec![c(0.0); order + 1];
            for (n, slot) in factor.iter_mut().enumerate() {
                let indices = MultiIndex::of_degree(ctx.modes(), n as u32);
                let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
                for a in &indices {
                    let wa = a.power(ci) / a.factorial();
                    if wa == 0.0 {
                        continue;
                    }
                    for b in &indices {
                        let wb = b.power(cj) / b.factorial();
                        if wb == 0.0 {
                            continue;
                        }
                        *slot += vacuum_element(gram, a, b) * (parity * wa * wb);
                        terms += 1;
                    }
                }
            }
            let mut next = vec![c(0.0); order + 1];
            for (p, x) in product.iter().enumerate() {
                for (q, y) in factor.iter().enumerate().take(order + 1 - p) {
                    next[p + q] += x * y;
                }
            }
            product = next;
        }
        let (fi, fj) = (symbols[i].translate(0.0, ctx.sites()[i]), symbols[j].translate(0.0, ctx.sites()[j]));
        let plus = fi.j_real_part().inner(&fj.j_real_part());
        let minus = fi.j_imag_part().inner(&fj.j_imag_part());
        pair_sizes.push(plus + minus);
    }
    let series: C64 = product.iter().skip(1).sum();
    let exponent: C64 = pair_sizes.iter().sum();
    let closed = (-exponent).exp() - 1.0;
    let x: f64 = pair_sizes.iter().map(|z| z.norm()).sum();
    Ok(ExpansionCheck {
        series,
        closed,
        residual: (series - closed).norm(),
        tail_bound: exponential_tail(x, order),
        reconstruction: coeffs.iter().map(|c| c.residual).fold(0.0, f64::max),
        terms,
    })
}

/// `sum_{n > order} x^n / n!`, summed directly.
fn exponential_tail(x: f64, order: usize) -> f64 {
    let mut term = (1..=order + 1).fold(1.0, |acc, k| acc * x / k as f64);
    let mut total = 0.0;
    let mut n = order + 1;
    while term > 1e-300 && n < order + 400 {
        total += term;
        n += 1;
        term *= x / n as f64;
        if term < total * 1e-18 {
            break;
        }
    }
    total
}

/// Frobenius norm of
/// `a*(f^±_x)^m - sum_{|mu| = m} (m!/mu!) <e|f^±>^mu a*(L^± e_x)^mu`
/// on a Fock space with `m` particles over an orthonormal basis of the
/// localized modes at `site`.
pub fn creation_residual(ctx: &CorrelationContext, sign: Sign, site: usize, symbol: &FieldVector, m: u32) -> Result<f64> {
    let coeffs = e_coefficients(ctx.spectrum(), ctx.modes(), symbol);
    let part = match sign {
        Sign::Plus => symbol.j_real_part(),
        Sign::Minus => symbol.j_imag_part(),
    };
    let x = ctx.sites()[site];
    let target = part.translate(0.0, x);
    let modes = ctx.localized(sign, site);
    let frame: Vec<FieldVector> = ctx.spectrum().frame().vectors(sign).iter().map(|g| g.translate(0.0, x)).collect();
    let family = gram_schmidt(&frame, 1e-9);
    let fb = FockBasis::family(family, m as usize)?;

    let lhs = power(&creator(&fb, &target)?.into_matrix(), m, fb.dim());
    let raising: Vec<CMatrix> = modes
        .iter()
        .map(|v| Ok(creator(&fb, v)?.into_matrix()))
        .collect::<Result<_>>()?;
    let e = match sign {
        Sign::Plus => &coeffs.plus,
        Sign::Minus => &coeffs.minus,
    };
    let m_factorial = MultiIndex::new(vec![m]).factorial();
    let mut rhs = CMatrix::zeros(fb.dim(), fb.dim());
    for mu in MultiIndex::of_degree(ctx.modes(), m) {
        let weight = m_factorial / mu.factorial() * mu.power(e);
        if weight == 0.0 {
            continue;
        }
        let mut op = CMatrix::identity(fb.dim(), fb.dim());
        for k in mu.expand() {
            op = &raising[k] * op;
        }
        rhs += op * c(weight);
    }
    Ok((lhs - rhs).norm())
}

fn power(a: &CMatrix, m: u32, dim: usize) -> CMatrix {
    (0..m).fold(CMatrix::identity(dim, dim), |acc, _| a * acc)
}
