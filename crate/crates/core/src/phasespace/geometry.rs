use rand::Rng;

use crate::error::{invalid, Result};
use crate::singleparticle::ModeBasis;

/// Sites `x_1..x_N` whose double cones of base radius `r` stay mutually
/// spacelike under relative time shifts `|t| < delta`, i.e.
/// `|x_i - x_j| >= 2r + delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleConfig {
    sites: Vec<f64>,
    delta: f64,
    radius: f64,
}

const SLACK: f64 = 1e-12;

impl AdmissibleConfig {
    pub fn new(sites: Vec<f64>, delta: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !(delta >= 0.0) {
            return Err(invalid("delta", format!("need r > 0 and delta >= 0, got r = {radius}, delta = {delta}")));
        }
        if sites.is_empty() {
            return Err(invalid("sites", "need at least one site"));
        }
        let config = AdmissibleConfig { sites, delta, radius };
        let gap = config.min_separation();
        if gap < config.required() * (1.0 - SLACK) {
            return Err(invalid("sites", format!("separation {gap} below 2r + delta = {}", config.required())));
        }
        Ok(config)
    }

    /// Sites at spacing exactly `2r + delta`.
    pub fn equally_spaced(n: usize, delta: f64, radius: f64, origin: f64) -> Result<Self> {
        let step = 2.0 * radius + delta;
        Self::new((0..n).map(|i| origin + i as f64 * step).collect(), delta, radius)
    }

    /// Lattice sites starting at 0 with consecutive gaps `2r + delta + extra_i`,
    /// each rounded up to a multiple of the lattice spacing. Fails if the
    /// minimum-image separation on the periodic grid drops below `2r + delta`.
    pub fn from_gaps(basis: &ModeBasis, n: usize, delta: f64, radius: f64, extra: &[f64]) -> Result<Self> {
        if extra.len() + 1 < n {
            return Err(invalid("extra", format!("need {} gaps", n - 1)));
        }
        let h = basis.lattice_spacing();
        let mut sites = vec![0.0];
        let mut steps = 0i64;
        for e in extra.iter().take(n.saturating_sub(1)) {
            let gap = 2.0 * radius + delta + e.max(0.0);
            steps += (gap / h - 1e-9).ceil() as i64;
            sites.push(steps as f64 * h);
        }
        let config = Self::new(sites, delta, radius)?;
        config.check_period(basis.period())?;
        Ok(config)
    }

    pub fn sites(&self) -> &[f64] {
        &self.sites
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn required(&self) -> f64 {
        2.0 * self.radius + self.delta
    }

    /// Smallest pairwise distance; infinite for a single site.
    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.sites.iter().enumerate() {
            for b in &self.sites[i + 1..] {
                best = best.min((a - b).abs());
            }
        }
        best
    }

    /// Admissibility with distances measured on a circle of length `period`.
    pub fn check_period(&self, period: f64) -> Result<()> {
        for (i, a) in self.sites.iter().enumerate() {
            for b in &self.sites[i + 1..] {
                let d = (a - b).rem_euclid(period);
                let d = d.min(period - d);
                if d < self.required() * (1.0 - SLACK) {
                    return Err(invalid(
                        "sites",
                        format!("periodic separation {d} below {} (period {period})", self.required()),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Uniformly random admissible configuration in `[0, window]`.
///
/// Sorted admissible configurations correspond one-to-one to sorted points
/// in `[0, window - (N-1)(2r+delta)]` by removing the mandatory gaps, so the
/// draw is exact; the labels are then shuffled.
pub fn sample_admissible<R: Rng + ?Sized>(n: usize, delta: f64, radius: f64, window: f64, rng: &mut R) -> Result<AdmissibleConfig> {
    if n == 0 {
        return Err(invalid("n", "need at least one site"));
    }
    let step = 2.0 * radius + delta;
    let free = window - (n - 1) as f64 * step;
    if !(free >= 0.0) {
        return Err(invalid(
            "window",
            format!("{window} cannot hold {n} sites at spacing {step}"),
        ));
    }
    let mut u: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * free).collect();
    u.sort_by(f64::total_cmp);
    let mut sites: Vec<f64> = u.iter().enumerate().map(|(i, x)| x + i as f64 * step).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        sites.swap(i, j);
    }
    AdmissibleConfig::new(sites, delta, radius)
}

/// Largest pairwise distance of a finite metric space given by its matrix.
pub fn diameter(distances: &[Vec<f64>]) -> f64 {
    distances.iter().flatten().copied().fold(0.0, f64::max)
}

/// Size of an `eps`-separated subset (pairwise distances `> eps`) found by
/// greedy packing, maximized over the starting point. Starting from each
/// point guarantees the count is 1 exactly when the diameter is at most `eps`.
pub fn epsilon_content(distances: &[Vec<f64>], eps: f64) -> usize {
    let n = distances.len();
    (0..n)
        .map(|start| {
            let mut chosen = vec![start];
            for p in (0..n).map(|k| (start + k) % n) {
                if chosen.iter().all(|&q| distances[p][q] > eps) {
                    chosen.push(p);
                }
            }
            chosen.len()
        })
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_site_is_admissible() {
        assert!(AdmissibleConfig::new(vec![3.0], 100.0, 0.5).is_ok());
    }

    #[test]
    fn close_pair_is_rejected() {
        assert!(AdmissibleConfig::new(vec![0.0, 1.9], 1.0, 0.5).is_err());
        assert!(AdmissibleConfig::new(vec![0.0, 2.0], 1.0, 0.5).is_ok());
    }

    #[test]
    fn content_of_two_points() {
        let d = vec![vec![0.0, 2.0], vec![2.0, 0.0]];
        assert_eq!(epsilon_content(&d, 1.0), 2);
        assert_eq!(epsilon_content(&d, 2.0), 1);
        assert_eq!(epsilon_content(&[vec![0.0]], 0.1), 1);
    }
}
