//! Multiindex calculus over the eigenbasis of `T`: bundles over measurement
//! slots, pair bundles over slot pairs, and the functionals built on them.

mod bounds;
mod correlation;
mod expansions;
mod tau;

pub use bounds::{
    arrow_ratio, f_bound, mu_bound, prodstate_bounds, s_bound, series_bound, series_bound_from, tau_norm_bound,
    ProdStateBounds, SeriesBound,
};
pub use correlation::{f_correlation, vacuum_element, CorrelationContext, SContext, CORRELATION_CAP};
pub use expansions::{creation_residual, expo_check, summunu_check, ExpansionCheck};
pub use tau::{
    e_coefficients, tau_formula, tau_tensor_formula, tau_weyl_bruteforce, EBasisCoefficients, TauFunctional,
    BRUTE_FORCE_CAP,
};

use crate::error::{Error, Result};
use crate::linalg::{ln_factorial, C64};

/// Largest slot count for which [`ordered_partitions`] enumerates.
pub const PARTITION_CAP: usize = 12;

/// Exponents over the first `len` eigenvectors of `T`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(len: usize) -> Self {
        MultiIndex(vec![0; len])
    }

    pub fn unit(len: usize, k: usize) -> Self {
        let mut v = vec![0; len];
        v[k] = 1;
        MultiIndex(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// `|mu|`.
    pub fn abs(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `mu!`.
    pub fn factorial(&self) -> f64 {
        self.ln_factorial().exp()
    }

    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&e| ln_factorial(e)).sum()
    }

    /// `x^mu`.
    pub fn power(&self, x: &[f64]) -> f64 {
        self.0.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }

    pub fn cpower(&self, x: &[C64]) -> C64 {
        self.0.iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Mode indices repeated by multiplicity, ascending.
    pub fn expand(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(k, &e)| std::iter::repeat_n(k, e as usize))
            .collect()
    }

    /// All multiindices of length `len` with `|mu| = degree`, in
    /// lexicographically descending order.
    pub fn of_degree(len: usize, degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut current = vec![0u32; len];
        fill(&mut current, 0, degree, &mut out);
        out
    }

    pub fn up_to(len: usize, degree: u32) -> Vec<MultiIndex> {
        (0..=degree).flat_map(|d| Self::of_degree(len, d)).collect()
    }

    /// All ordered triples `(a, b, c)` with `a + b + c = self`.
    pub fn splits3(&self) -> Vec<(MultiIndex, MultiIndex, MultiIndex)> {
        let mut out = vec![(Vec::new(), Vec::new(), Vec::new())];
        for &e in &self.0 {
            let mut next = Vec::with_capacity(out.len() * ((e as usize + 1) * (e as usize + 2) / 2));
            for (a, b, c) in &out {
                for x in 0..=e {
                    for y in 0..=(e - x) {
                        let mut a2: Vec<u32> = a.clone();
                        let mut b2: Vec<u32> = b.clone();
                        let mut c2: Vec<u32> = c.clone();
                        a2.push(x);
                        b2.push(y);
                        c2.push(e - x - y);
                        next.push((a2, b2, c2));
                    }
                }
            }
            out = next;
        }
        out.into_iter()
            .map(|(a, b, c)| (MultiIndex(a), MultiIndex(b), MultiIndex(c)))
            .collect()
    }
}

fn fill(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(MultiIndex(current.clone()));
        return;
    }
    if current.is_empty() {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    for e in (0..=remaining).rev() {
        current[pos] = e;
        fill(current, pos + 1, remaining - e, out);
    }
    current[pos] = 0;
}

/// An `M`-tuple of multiindex pairs `(mu_i^+, mu_i^-)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bundle {
    pub plus: Vec<MultiIndex>,
    pub minus: Vec<MultiIndex>,
}

impl Bundle {
    pub fn zeros(slots: usize, len: usize) -> Self {
        Bundle {
            plus: vec![MultiIndex::zeros(len); slots],
            minus: vec![MultiIndex::zeros(len); slots],
        }
    }

    pub fn slots(&self) -> usize {
        self.plus.len()
    }

    pub fn abs(&self) -> u32 {
        self.plus.iter().chain(&self.minus).map(MultiIndex::abs).sum()
    }

    pub fn abs_plus(&self) -> u32 {
        self.plus.iter().map(MultiIndex::abs).sum()
    }

    pub fn abs_minus(&self) -> u32 {
        self.minus.iter().map(MultiIndex::abs).sum()
    }

    pub fn ln_factorial(&self) -> f64 {
        self.plus.iter().chain(&self.minus).map(MultiIndex::ln_factorial).sum()
    }

    pub fn factorial(&self) -> f64 {
        self.ln_factorial().exp()
    }

    pub fn add(&self, other: &Bundle) -> Bundle {
        Bundle {
            plus: self.plus.iter().zip(&other.plus).map(|(a, b)| a.add(b)).collect(),
            minus: self.minus.iter().zip(&other.minus).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// `<e|f>^mu = prod_i <e|f_i^+>^{mu_i^+} <e|f_i^->^{mu_i^-}`.
    pub fn power(&self, coefficients: &[EBasisCoefficients]) -> f64 {
        self.plus
            .iter()
            .zip(&self.minus)
            .zip(coefficients)
            .map(|((p, m), c)| p.power(&c.plus) * m.power(&c.minus))
            .product()
    }

    /// `t^mu` with the same `t` for every slot and sign.
    pub fn t_power(&self, t: &[f64]) -> f64 {
        self.plus.iter().chain(&self.minus).map(|m| m.power(t)).product()
    }

    /// Slot `i`, sign `+` is variable `2 i len + k`, sign `-` is `(2 i + 1) len + k`.
    pub fn from_flat(slots: usize, len: usize, flat: &MultiIndex) -> Self {
        let e = flat.exponents();
        let part = |start: usize| MultiIndex(e[start..start + len].to_vec());
        Bundle {
            plus: (0..slots).map(|i| part(2 * i * len)).collect(),
            minus: (0..slots).map(|i| part((2 * i + 1) * len)).collect(),
        }
    }

    /// Every bundle with `|mu| <= degree`.
    pub fn up_to(slots: usize, len: usize, degree: u32) -> Vec<Bundle> {
        MultiIndex::up_to(2 * slots * len, degree)
            .iter()
            .map(|flat| Bundle::from_flat(slots, len, flat))
            .collect()
    }
}

/// Pairs `(i, j)` with `i < j < slots`, in the order `(0,1), (0,2), ..., (M-2, M-1)`.
pub fn pair_list(slots: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..slots {
        for j in i + 1..slots {
            out.push((i, j));
        }
    }
    out
}

/// A `(M choose 2)`-tuple of multiindex pairs `(alpha_{ij}^+, alpha_{ij}^-)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PairBundle {
    slots: usize,
    pub plus: Vec<MultiIndex>,
    pub minus: Vec<MultiIndex>,
}

impl PairBundle {
    pub fn zeros(slots: usize, len: usize) -> Self {
        let pairs = slots * slots.saturating_sub(1) / 2;
        PairBundle {
            slots,
            plus: vec![MultiIndex::zeros(len); pairs],
            minus: vec![MultiIndex::zeros(len); pairs],
        }
    }

    pub fn new(slots: usize, plus: Vec<MultiIndex>, minus: Vec<MultiIndex>) -> Result<Self> {
        let pairs = slots * slots.saturating_sub(1) / 2;
        if plus.len() != pairs || minus.len() != pairs {
            return Err(Error::Arity {
                expected: pairs,
                found: plus.len().max(minus.len()),
            });
        }
        Ok(PairBundle { slots, plus, minus })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        assert!(i < j && j < self.slots);
        i * self.slots - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn abs(&self) -> u32 {
        self.abs_plus() + self.abs_minus()
    }

    pub fn abs_plus(&self) -> u32 {
        self.plus.iter().map(MultiIndex::abs).sum()
    }

    pub fn abs_minus(&self) -> u32 {
        self.minus.iter().map(MultiIndex::abs).sum()
    }

    pub fn ln_factorial(&self) -> f64 {
        self.plus.iter().chain(&self.minus).map(MultiIndex::ln_factorial).sum()
    }

    pub fn factorial(&self) -> f64 {
        self.ln_factorial().exp()
    }

    pub fn is_zero(&self) -> bool {
        self.plus.iter().chain(&self.minus).all(MultiIndex::is_zero)
    }

    pub fn t_power(&self, t: &[f64]) -> f64 {
        self.plus.iter().chain(&self.minus).map(|m| m.power(t)).product()
    }

    /// Pair `p`, sign `+` is variable `2 p len + k`, sign `-` is `(2 p + 1) len + k`.
    pub fn from_flat(slots: usize, len: usize, flat: &MultiIndex) -> Self {
        let pairs = slots * slots.saturating_sub(1) / 2;
        let e = flat.exponents();
        let part = |start: usize| MultiIndex(e[start..start + len].to_vec());
        PairBundle {
            slots,
            plus: (0..pairs).map(|p| part(2 * p * len)).collect(),
            minus: (0..pairs).map(|p| part((2 * p + 1) * len)).collect(),
        }
    }

    /// The arrow contractions `(alpha_->, alpha_<-)`:
    /// `alpha_->_i = sum_{j > i} alpha_{ij}` and `alpha_<-_i = sum_{j < i} alpha_{ji}`.
    pub fn arrows(&self) -> (Bundle, Bundle) {
        let len = self.plus.first().map_or(0, MultiIndex::len);
        let mut right = Bundle::zeros(self.slots, len);
        let mut left = Bundle::zeros(self.slots, len);
        for (p, (i, j)) in pair_list(self.slots).into_iter().enumerate() {
            right.plus[i] = right.plus[i].add(&self.plus[p]);
            right.minus[i] = right.minus[i].add(&self.minus[p]);
            left.plus[j] = left.plus[j].add(&self.plus[p]);
            left.minus[j] = left.minus[j].add(&self.minus[p]);
        }
        (right, left)
    }
}

/// All `2^n` splittings of `{0, .., n-1}` into ordered subsets `(R_1, R_2)`,
/// each keeping ascending order. The first entry is `(all, empty)`.
pub fn ordered_partitions(n: usize) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if n > PARTITION_CAP {
        return Err(Error::TooManySlots(n));
    }
    Ok((0..1usize << n)
        .map(|mask| {
            let in_second = |i: usize| mask >> (n - 1 - i) & 1 == 1;
            let first = (0..n).filter(|&i| !in_second(i)).collect();
            let second = (0..n).filter(|&i| in_second(i)).collect();
            (first, second)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions_of_two() {
        let p = ordered_partitions(2).unwrap();
        assert_eq!(
            p,
            vec![
                (vec![0, 1], vec![]),
                (vec![0], vec![1]),
                (vec![1], vec![0]),
                (vec![], vec![0, 1]),
            ]
        );
        assert_eq!(ordered_partitions(0).unwrap(), vec![(vec![], vec![])]);
        assert_eq!(ordered_partitions(7).unwrap().len(), 128);
        assert!(matches!(ordered_partitions(13), Err(Error::TooManySlots(13))));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(MultiIndex::of_degree(3, 2).len(), 6);
        assert_eq!(MultiIndex::up_to(4, 3).len(), 35);
        assert_eq!(MultiIndex::of_degree(0, 0).len(), 1);
        assert!(MultiIndex::of_degree(0, 1).is_empty());
        assert_eq!(MultiIndex::new(vec![2, 1]).splits3().len(), 18);
    }

    #[test]
    fn factorials_and_powers() {
        let mu = MultiIndex::new(vec![3, 0, 2]);
        assert_eq!(mu.abs(), 5);
        assert!((mu.factorial() - 12.0).abs() < 1e-9);
        assert!((mu.power(&[2.0, 7.0, 0.5]) - 2.0).abs() < 1e-15);
        assert_eq!(mu.expand(), vec![0, 0, 0, 2, 2]);
    }

    #[test]
    fn arrows_of_three_slots() {
        let a = |v: u32| MultiIndex::new(vec![v]);
        let alpha = PairBundle::new(3, vec![a(1), a(2), a(4)], vec![a(0), a(0), a(0)]).unwrap();
        let (right, left) = alpha.arrows();
        assert_eq!(right.plus, vec![a(3), a(4), a(0)]);
        assert_eq!(left.plus, vec![a(0), a(1), a(6)]);
        assert_eq!(right.abs(), alpha.abs());
        assert_eq!(left.abs(), alpha.abs());
        let (r0, l0) = PairBundle::zeros(3, 1).arrows();
        assert_eq!(r0.abs() + l0.abs(), 0);
        assert_eq!(alpha.pair_index(1, 2), 2);
    }
}
