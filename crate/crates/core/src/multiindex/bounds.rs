use super::{Bundle, PairBundle};
use crate::error::{Error, Result};
use crate::linalg::ln_factorial;
use crate::singleparticle::TSpectrum;

/// `4^{|mu|} sqrt(mu!)`, the norm bound for tensor functionals.
pub fn tau_norm_bound(mu: &Bundle) -> f64 {
    (mu.abs() as f64 * 4f64.ln() + 0.5 * mu.ln_factorial()).exp()
}

/// `M_E^{(|mu|+|nu|)/2} t^{mu+nu}`, bounding `|phi(a*(L e_x)^mu a(L e_x)^nu)|` for `|phi| <= 1`.
pub fn mu_bound(t: &[f64], energy_ratio: f64, mu: &Bundle, nu: &Bundle) -> f64 {
    energy_ratio.powf(0.5 * (mu.abs() + nu.abs()) as f64) * mu.t_power(t) * nu.t_power(t)
}

/// `sqrt(|a+|! |a-|! |b+|! |b-|! / (a! b!)) g^{|a|+|b|} t^{a+b}`, bounding `|F_{a,b}|`.
pub fn f_bound(t: &[f64], g: f64, alpha: &PairBundle, beta: &PairBundle) -> f64 {
    let counts = [alpha.abs_plus(), alpha.abs_minus(), beta.abs_plus(), beta.abs_minus()];
    let ln_top: f64 = counts.iter().map(|&n| ln_factorial(n)).sum();
    let ln = 0.5 * (ln_top - alpha.ln_factorial() - beta.ln_factorial());
    ln.exp() * g.powi((alpha.abs() + beta.abs()) as i32) * alpha.t_power(t) * beta.t_power(t)
}

/// The product bound on `|S_{mu,nu,alpha,beta}(phi)|` for `|phi| <= 1`.
pub fn s_bound(t: &[f64], energy_ratio: f64, g: f64, mu: &Bundle, nu: &Bundle, alpha: &PairBundle, beta: &PairBundle) -> f64 {
    let slot_part = mu_bound(t, energy_ratio, mu, nu) / (mu.ln_factorial() + nu.ln_factorial()).exp();
    let pair_part = f_bound(t, g, alpha, beta) / (0.5 * (alpha.ln_factorial() + beta.ln_factorial())).exp();
    slot_part * pair_part
}

/// Two stages of the estimate on `|tau_{mu+nu+alpha_->+beta_<-}|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProdStateBounds {
    /// `4^{|sum|} sqrt(sum!)` for the combined bundle.
    pub direct: f64,
    /// `(4 sqrt 3)^{|mu|+|nu|} sqrt((mu+nu)!) (4 sqrt 3)^{|alpha|+|beta|} sqrt(alpha_->! beta_<-!)`.
    pub split: f64,
}

pub fn prodstate_bounds(mu: &Bundle, nu: &Bundle, alpha: &PairBundle, beta: &PairBundle) -> ProdStateBounds {
    let (right, _) = alpha.arrows();
    let (_, left) = beta.arrows();
    let mn = mu.add(nu);
    let total = mn.add(&right).add(&left);
    let ln_c = (4.0 * 3f64.sqrt()).ln();
    let split = ((mn.abs() + alpha.abs() + beta.abs()) as f64 * ln_c
        + 0.5 * (mn.ln_factorial() + right.ln_factorial() + left.ln_factorial()))
    .exp();
    ProdStateBounds {
        direct: tau_norm_bound(&total),
        split,
    }
}

/// `(alpha_->! / alpha!, M^{|alpha|})`; the first never exceeds the second.
pub fn arrow_ratio(alpha: &PairBundle) -> (f64, f64) {
    let (right, _) = alpha.arrows();
    let ratio = (right.ln_factorial() - alpha.ln_factorial()).exp();
    (ratio, (alpha.slots() as f64).powi(alpha.abs() as i32))
}

/// Explicit majorant of `sum ||tau|| ||S||` over all index tuples with a
/// nonempty pair part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBound {
    /// `ln` of `(sum_{k <= M_E} (4 sqrt(6 M_E) |T|_1)^k / sqrt(k!))^{4M}`.
    pub ln_slot_factor: f64,
    /// `(1 - r)^{-4 (M choose 2)} - 1` with `r = 4 sqrt(3 M^3) g |T|_1`.
    pub pair_factor: f64,
    pub ratio: f64,
    /// `ln` of the bound; `-inf` when the pair factor vanishes.
    pub ln_value: f64,
}

impl SeriesBound {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }
}

/// Evaluates the majorant from `|T|_1`, `M_E = E/m`, the slot count and the
/// decay constant `g`. Slot sums stop at `k = floor(M_E)`, beyond which every
/// `S` vanishes.
pub fn series_bound_from(trace_norm: f64, energy_ratio: f64, slots: usize, g: f64) -> Result<SeriesBound> {
    let pairs = slots * slots.saturating_sub(1) / 2;
    let ratio = 4.0 * (3.0 * (slots as f64).powi(3)).sqrt() * g * trace_norm;
    let kmax = (energy_ratio * (1.0 + 1e-12)).floor() as u32;
    let base = 4.0 * (6.0 * energy_ratio).sqrt() * trace_norm;
    let slot_sum: f64 = (0..=kmax)
        .map(|k| (k as f64 * base.ln() - 0.5 * ln_factorial(k)).exp())
        .sum();
    let ln_slot_factor = 4.0 * slots as f64 * slot_sum.ln();
    if pairs == 0 {
        return Ok(SeriesBound {
            ln_slot_factor,
            pair_factor: 0.0,
            ratio,
            ln_value: f64::NEG_INFINITY,
        });
    }
    if ratio >= 1.0 {
        return Err(Error::Divergent { x: ratio });
    }
    let pair_factor = (-4.0 * pairs as f64 * (-ratio).ln_1p()).exp_m1();
    Ok(SeriesBound {
        ln_slot_factor,
        pair_factor,
        ratio,
        ln_value: ln_slot_factor + pair_factor.ln(),
    })
}

pub fn series_bound(spectrum: &TSpectrum, slots: usize, energy: f64, g: f64) -> Result<SeriesBound> {
    series_bound_from(spectrum.trace_norm(), energy / spectrum.basis().mass(), slots, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;

    #[test]
    fn single_slot_has_no_pair_part() {
        let b = series_bound_from(0.8, 1.2, 1, 0.5).unwrap();
        assert_eq!(b.value(), 0.0);
    }

    #[test]
    fn divergence_is_flagged() {
        assert!(matches!(series_bound_from(1.0, 1.2, 3, 1.0), Err(Error::Divergent { .. })));
    }

    #[test]
    fn pair_factor_vanishes_with_g() {
        let mut previous = f64::INFINITY;
        for g in [1e-2, 1e-4, 1e-8, 0.0] {
            let b = series_bound_from(0.9, 2.0, 4, g).unwrap();
            assert!(b.value() < previous);
            previous = b.value();
        }
        assert_eq!(previous, 0.0);
    }

    #[test]
    fn arrow_ratio_of_two_pairs() {
        let a = PairBundle::new(
            3,
            vec![MultiIndex::new(vec![2]), MultiIndex::new(vec![1]), MultiIndex::new(vec![0])],
            vec![MultiIndex::zeros(1); 3],
        )
        .unwrap();
        let (ratio, cap) = arrow_ratio(&a);
        assert!((ratio - 3.0).abs() < 1e-12);
        assert_eq!(cap, 27.0);
    }
}
