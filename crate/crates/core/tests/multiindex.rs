use std::sync::Arc;

use coincidence_core::fock::{EnergyFunctional, FockBasis, SamplingMode};
use coincidence_core::linalg::{binomial, c, CMatrix, C64};
use coincidence_core::multiindex::{
    arrow_ratio, creation_residual, e_coefficients, expo_check, f_bound, f_correlation, mu_bound, ordered_partitions,
    prodstate_bounds, s_bound, series_bound, summunu_check, tau_formula, tau_norm_bound, tau_tensor_formula,
    tau_weyl_bruteforce, Bundle, CorrelationContext, EBasisCoefficients, MultiIndex, PairBundle, SContext,
    TauFunctional,
};
use coincidence_core::rng::seeded;
use coincidence_core::singleparticle::{measured_g, FieldVector, LocalizationFrame, ModeBasis, Sign, TSpectrum};
use proptest::prelude::*;
use rand::Rng;

const RADIUS: f64 = 0.5;

fn spectrum(energy: f64) -> Arc<TSpectrum> {
    let b = ModeBasis::shared(1.0, 160.0, 6401).unwrap();
    let frame = Arc::new(LocalizationFrame::build(&b, RADIUS, 3).unwrap());
    Arc::new(TSpectrum::build(&frame, energy, 0.5).unwrap())
}

fn random_symbol(s: &TSpectrum, rng: &mut impl Rng, scale: f64) -> FieldVector {
    let mut draw = || (0..3).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect::<Vec<_>>();
    let plus = draw();
    let minus = draw();
    s.frame().symbol(&plus, &minus).unwrap()
}

fn sites(s: &TSpectrum, count: usize, delta: f64) -> Vec<f64> {
    let b = s.basis();
    let step = b.snap(2.0 * RADIUS + delta + b.lattice_spacing());
    (0..count).map(|i| b.snap(i as f64 * step)).collect()
}

fn random_multiindex(len: usize, degree: u32, rng: &mut impl Rng) -> MultiIndex {
    let mut e = vec![0u32; len];
    for _ in 0..degree {
        e[rng.random_range(0..len)] += 1;
    }
    MultiIndex::new(e)
}

fn random_pair_bundle(slots: usize, len: usize, degree: u32, rng: &mut impl Rng) -> PairBundle {
    let pairs = slots * (slots - 1) / 2;
    let mut plus = vec![MultiIndex::zeros(len); pairs];
    let mut minus = vec![MultiIndex::zeros(len); pairs];
    for _ in 0..degree {
        let p = rng.random_range(0..pairs);
        let k = rng.random_range(0..len);
        let target = if rng.random::<bool>() { &mut plus[p] } else { &mut minus[p] };
        *target = target.add(&MultiIndex::unit(len, k));
    }
    PairBundle::new(slots, plus, minus).unwrap()
}

#[test]
fn tau_routes_agree_and_respect_the_norm_bound() {
    let mut rng = seeded(41);
    let modes = 3;
    let fb = FockBasis::abstract_modes(modes, 12).unwrap();
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let degree = (case % 4) as u32;
        let split = rng.random_range(0..=degree);
        let mu_plus = random_multiindex(modes, split, &mut rng);
        let mu_minus = random_multiindex(modes, degree - split, &mut rng);
        let raw: Vec<C64> = (0..modes)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let target = rng.random::<f64>();
        let coeffs: Vec<C64> = raw.iter().map(|z| z * (target / norm)).collect();
        let e = EBasisCoefficients::new(coeffs.iter().map(|z| z.re).collect(), coeffs.iter().map(|z| z.im).collect());

        let (brute, eta) = tau_weyl_bruteforce(&fb, &mu_plus, &mu_minus, &coeffs).unwrap();
        let formula = tau_formula(&mu_plus, &mu_minus, &e, target * target);
        let gap = (brute - c(formula)).norm();
        assert!(gap <= 1e-8 + eta, "case {case}: {gap:e} > 1e-8 + {eta:e}");
        worst = worst.max(gap);

        let tau = TauFunctional::new(&fb, &mu_plus, &mu_minus).unwrap();
        let bound = tau_norm_bound(&Bundle {
            plus: vec![mu_plus.clone()],
            minus: vec![mu_minus.clone()],
        });
        assert!(tau.norm() <= bound, "case {case}: {} > {bound}", tau.norm());
    }
    assert!(worst < 1e-8);
}

#[test]
fn tau_of_the_unit_operator() {
    let fb = FockBasis::abstract_modes(2, 6).unwrap();
    let id = CMatrix::identity(fb.dim(), fb.dim());
    let tau = TauFunctional::new(&fb, &MultiIndex::new(vec![2, 0]), &MultiIndex::zeros(2)).unwrap();
    assert!((tau.evaluate_matrix(&id) - c(0.0)).norm() < 1e-14);
    let tau = TauFunctional::new(&fb, &MultiIndex::zeros(2), &MultiIndex::zeros(2)).unwrap();
    assert!((tau.evaluate_matrix(&id) - c(1.0)).norm() < 1e-14);
}

#[test]
fn tensor_functional_is_the_slotwise_product() {
    let mut rng = seeded(7);
    let fb = FockBasis::abstract_modes(2, 12).unwrap();
    for _ in 0..5 {
        let slots: Vec<(MultiIndex, MultiIndex, Vec<C64>)> = (0..2)
            .map(|_| {
                let p = random_multiindex(2, rng.random_range(0..2), &mut rng);
                let m = random_multiindex(2, rng.random_range(0..2), &mut rng);
                let f = (0..2).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
                (p, m, f)
            })
            .collect();
        let mu = Bundle {
            plus: slots.iter().map(|s| s.0.clone()).collect(),
            minus: slots.iter().map(|s| s.1.clone()).collect(),
        };
        let coeffs: Vec<EBasisCoefficients> = slots
            .iter()
            .map(|s| EBasisCoefficients::new(s.2.iter().map(|z| z.re).collect(), s.2.iter().map(|z| z.im).collect()))
            .collect();
        let norms: Vec<f64> = slots.iter().map(|s| s.2.iter().map(|z| z.norm_sqr()).sum()).collect();
        let formula = tau_tensor_formula(&mu, &coeffs, &norms);
        let mut brute = c(1.0);
        let mut eta = 0.0;
        for s in &slots {
            let (v, e) = tau_weyl_bruteforce(&fb, &s.0, &s.1, &s.2).unwrap();
            brute *= v;
            eta += e;
        }
        assert!((brute - c(formula)).norm() <= 1e-8 + eta);
    }
    let zero = Bundle::zeros(3, 2);
    let coeffs = vec![EBasisCoefficients::new(vec![0.3, 0.1], vec![-0.2, 0.5]); 3];
    let norms = [0.1, 0.4, 0.9];
    let expected = (-0.5f64 * 1.4).exp();
    assert!((tau_tensor_formula(&zero, &coeffs, &norms) - expected).abs() < 1e-15);
}

#[test]
fn correlation_terms() {
    let s = spectrum(1.2);
    let ctx = CorrelationContext::new(Arc::clone(&s), 6, sites(&s, 3, 2.0)).unwrap();
    let zero = PairBundle::zeros(3, 6);
    assert_eq!(f_correlation(&ctx, &zero, &zero).unwrap(), c(1.0));

    let mut rng = seeded(13);
    let a = random_pair_bundle(3, 6, 2, &mut rng);
    let b = random_pair_bundle(3, 6, 3, &mut rng);
    assert_eq!(f_correlation(&ctx, &a, &b).unwrap(), c(0.0));

    let g = measured_g(&s, 2.0, 6);
    let t = s.values();
    let mut checked = 0;
    while checked < 30 {
        let degree = rng.random_range(1..=3);
        let a = random_pair_bundle(3, 6, degree, &mut rng);
        let b = random_pair_bundle(3, 6, degree, &mut rng);
        let f = f_correlation(&ctx, &a, &b).unwrap();
        if f == c(0.0) {
            continue;
        }
        checked += 1;
        assert!(f.norm() <= f_bound(t, g, &a, &b), "{} > {}", f.norm(), f_bound(t, g, &a, &b));
    }
}

#[test]
fn s_functional_cases_and_bound() {
    let energy = 1.2;
    let s = spectrum(energy);
    let ctx = CorrelationContext::new(Arc::clone(&s), 6, sites(&s, 2, 1.0)).unwrap();
    let fb = FockBasis::energy_window(s.basis(), energy).unwrap();
    let sctx = SContext::new(ctx, fb.clone(), energy).unwrap();
    let mut rng = seeded(19);
    let zero = Bundle::zeros(2, 6);
    let zero_pairs = PairBundle::zeros(2, 6);
    let g = measured_g(&s, 1.0, 6);
    for _ in 0..10 {
        let phi = EnergyFunctional::sample(&fb, energy, SamplingMode::Default, &mut rng).unwrap();
        let value = sctx.s_functional(&phi, &zero, &zero, &zero_pairs, &zero_pairs).unwrap();
        assert!((value - phi.trace()).norm() < 1e-12);

        let mut high = Bundle::zeros(2, 6);
        high.plus[0] = MultiIndex::unit(6, 0);
        high.minus[1] = MultiIndex::unit(6, 2);
        let vanishing = sctx.s_functional(&phi, &high, &zero, &zero_pairs, &zero_pairs).unwrap();
        assert_eq!(vanishing.norm(), 0.0);

        let flat = |rng: &mut rand_chacha::ChaCha8Rng| {
            let mut b = Bundle::zeros(2, 6);
            if rng.random::<bool>() {
                let k = rng.random_range(0..6);
                let slot = rng.random_range(0..2);
                if rng.random::<bool>() {
                    b.plus[slot] = MultiIndex::unit(6, k);
                } else {
                    b.minus[slot] = MultiIndex::unit(6, k);
                }
            }
            b
        };
        let mu = flat(&mut rng);
        let nu = flat(&mut rng);
        let degree = rng.random_range(0..=3);
        let alpha = random_pair_bundle(2, 6, degree, &mut rng);
        let mut beta = random_pair_bundle(2, 6, degree, &mut rng);
        beta.plus[0] = MultiIndex::new(random_multiindex(6, alpha.plus[0].abs(), &mut rng).exponents().to_vec());
        beta.minus[0] = MultiIndex::new(random_multiindex(6, alpha.minus[0].abs(), &mut rng).exponents().to_vec());
        let value = sctx.s_functional(&phi, &mu, &nu, &alpha, &beta).unwrap();
        let bound = s_bound(s.values(), sctx.energy_ratio(), g, &mu, &nu, &alpha, &beta) * phi.trace_norm();
        assert!(value.norm() <= bound, "{} > {bound}", value.norm());
    }
}

#[test]
fn summunu_is_exact_on_the_window() {
    let energy = 2.5;
    let s = spectrum(energy);
    let ctx = CorrelationContext::new(Arc::clone(&s), 6, sites(&s, 2, 1.0)).unwrap();
    let fb = FockBasis::energy_window(s.basis(), energy).unwrap();
    let sctx = SContext::new(ctx, fb.clone(), energy).unwrap();
    let mut rng = seeded(29);
    for _ in 0..3 {
        let phi = EnergyFunctional::sample(&fb, energy, SamplingMode::Default, &mut rng).unwrap();
        let symbols = [random_symbol(&s, &mut rng, 0.6), random_symbol(&s, &mut rng, 0.6)];
        let check = summunu_check(&sctx, &phi, &symbols).unwrap();
        assert!(check.reconstruction < 1e-10, "reconstruction {:e}", check.reconstruction);
        assert!(check.residual <= 1e-8, "{check:?}");
    }
}

#[test]
fn expo_expansion_within_tail() {
    let s = spectrum(1.2);
    let mut rng = seeded(31);
    for (count, delta) in [(2, 0.0), (2, 0.5), (3, 0.0)] {
        let ctx = CorrelationContext::new(Arc::clone(&s), 6, sites(&s, count, delta)).unwrap();
        let symbols: Vec<FieldVector> = (0..count).map(|_| random_symbol(&s, &mut rng, 1.0)).collect();
        let check = expo_check(&ctx, &symbols, 8).unwrap();
        assert!(check.closed.norm() > 1e-6, "trivial instance {check:?}");
        assert!(check.residual <= 1e-8 + check.tail_bound, "{check:?}");
    }
}

#[test]
fn creation_multinomial() {
    let s = spectrum(1.2);
    let ctx = CorrelationContext::new(Arc::clone(&s), 6, sites(&s, 2, 1.0)).unwrap();
    let mut rng = seeded(37);
    for m in 1..=3 {
        for sign in Sign::BOTH {
            let f = random_symbol(&s, &mut rng, 1.0);
            let r = creation_residual(&ctx, sign, 1, &f, m).unwrap();
            assert!(r <= 1e-10, "m {m} {sign:?}: {r:e}");
        }
    }
}

#[test]
fn bound_chain_on_random_instances() {
    let energy = 2.5;
    let s = spectrum(energy);
    let ctx = CorrelationContext::new(Arc::clone(&s), 6, sites(&s, 2, 1.0)).unwrap();
    let fb = FockBasis::energy_window(s.basis(), energy).unwrap();
    let sctx = SContext::new(ctx, fb.clone(), energy).unwrap();
    let mut rng = seeded(43);
    let t = s.values();
    for _ in 0..20 {
        let phi = EnergyFunctional::sample(&fb, energy, SamplingMode::Default, &mut rng).unwrap();
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
            let flat = random_multiindex(24, rng.random_range(0..=2), rng);
            Bundle::from_flat(2, 6, &flat)
        };
        let mu = pick(&mut rng);
        let nu = pick(&mut rng);
        let monomial = sctx.monomial(&phi, &mu, &nu);
        assert!(monomial.norm() <= mu_bound(t, sctx.energy_ratio(), &mu, &nu) * phi.trace_norm());

        let alpha = random_pair_bundle(2, 6, rng.random_range(0..=4), &mut rng);
        let beta = random_pair_bundle(2, 6, rng.random_range(0..=4), &mut rng);
        let p = prodstate_bounds(&mu, &nu, &alpha, &beta);
        assert!(p.direct <= p.split * (1.0 + 1e-12), "{p:?}");
    }
    for _ in 0..50 {
        let slots = rng.random_range(2..=5);
        let alpha = random_pair_bundle(slots, 3, rng.random_range(0..=8), &mut rng);
        let (ratio, cap) = arrow_ratio(&alpha);
        assert!(ratio <= cap * (1.0 + 1e-12));
    }
}

#[test]
fn series_bound_shrinks_with_separation() {
    let s = spectrum(1.2);
    let mut previous = f64::INFINITY;
    for delta in [4.0, 8.0, 16.0] {
        let g = measured_g(&s, delta, 6);
        match series_bound(&s, 2, 1.2, g) {
            Ok(b) => {
                assert!(b.value() <= previous);
                previous = b.value();
            }
            Err(e) => assert!(previous.is_infinite(), "divergent after convergence: {e}"),
        }
    }
    assert_eq!(series_bound(&s, 1, 1.2, 0.3).unwrap().value(), 0.0);
}

#[test]
fn e_coefficients_reconstruct_frame_symbols() {
    let s = spectrum(1.2);
    let mut rng = seeded(3);
    let f = random_symbol(&s, &mut rng, 1.0);
    assert!(e_coefficients(&s, 6, &f).residual < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn arrows_preserve_the_total(slots in 2usize..6, len in 1usize..4, degree in 0u32..10, seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let alpha = random_pair_bundle(slots, len, degree, &mut rng);
        let (right, left) = alpha.arrows();
        prop_assert_eq!(right.abs(), alpha.abs());
        prop_assert_eq!(left.abs(), alpha.abs());
        prop_assert_eq!(right.slots(), slots);
        prop_assert!(right.plus[slots - 1].is_zero());
        prop_assert!(left.plus[0].is_zero());
    }

    #[test]
    fn degree_enumeration_counts(len in 1usize..5, degree in 0u32..6) {
        let all = MultiIndex::of_degree(len, degree);
        prop_assert_eq!(all.len() as f64, binomial(degree as usize + len - 1, len - 1));
        prop_assert!(all.iter().all(|m| m.abs() == degree));
    }

    #[test]
    fn splits_recombine(exps in proptest::collection::vec(0u32..4, 1..4)) {
        let mu = MultiIndex::new(exps);
        for (a, b, c) in mu.splits3() {
            prop_assert_eq!(a.add(&b).add(&c), mu.clone());
        }
    }

    #[test]
    fn partitions_are_complementary(n in 0usize..10) {
        let parts = ordered_partitions(n).unwrap();
        prop_assert_eq!(parts.len(), 1 << n);
        for (r1, r2) in parts {
            prop_assert_eq!(r1.len() + r2.len(), n);
            prop_assert!(r1.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(r2.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
