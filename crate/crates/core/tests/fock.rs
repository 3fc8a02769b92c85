use coincidence_core::fock::{
    annihilator_coeffs, creator_coeffs, energy_projection, hamiltonian, low_sector, normal_ordered_weyl_coeffs,
    number, weyl_coeffs, EnergyFunctional, EnergyWindow, FockBasis, SamplingMode,
};
use coincidence_core::linalg::{binomial, c, CMatrix, CVector, C64};
use coincidence_core::rng::seeded;
use proptest::prelude::*;

fn vacuum(fb: &FockBasis) -> CVector {
    let mut v = CVector::zeros(fb.dim());
    v[fb.vacuum()] = c(1.0);
    v
}

#[test]
fn dimension_counts_occupations() {
    for (modes, n_max) in [(1, 5), (2, 4), (3, 3), (4, 2)] {
        let fb = FockBasis::abstract_modes(modes, n_max).unwrap();
        assert_eq!(fb.dim() as f64, binomial(modes + n_max, modes), "{modes} modes, n_max {n_max}");
    }
}

#[test]
fn hamiltonian_and_number_are_diagonal() {
    let fb = FockBasis::with_energies(vec![1.0, 1.25, 2.0], 3).unwrap();
    let h = hamiltonian(&fb).unwrap().into_matrix();
    let n = number(&fb).into_matrix();
    for (k, state) in fb.states().iter().enumerate() {
        let e: f64 = state.iter().map(|(m, q)| [1.0, 1.25, 2.0][m] * q as f64).sum();
        assert!((h[(k, k)] - c(e)).norm() < 1e-14);
        assert_eq!(n[(k, k)], c(state.particles() as f64));
    }
    assert!((&h - h.adjoint()).norm() == 0.0);
}

#[test]
fn window_holds_exactly_the_states_below_the_energy() {
    let fb = FockBasis::with_energies(vec![1.0, 1.5], 4).unwrap();
    let window = EnergyWindow::new(&fb, 3.0).unwrap();
    let energies = fb.state_energies().unwrap();
    let inside: Vec<usize> = (0..fb.dim()).filter(|&k| energies[k] <= 3.0 + 1e-12).collect();
    assert_eq!(window.indices(), &inside[..]);
    let p = energy_projection(&fb, 3.0).unwrap().into_matrix();
    assert_eq!(p.diagonal().iter().filter(|z| z.re == 1.0).count(), window.dim());
}

#[test]
fn single_mode_weyl_vacuum_expectation() {
    let fb = FockBasis::abstract_modes(1, 30).unwrap();
    for z in [0.1, 0.4, 0.8] {
        let w = weyl_coeffs(&fb, &[c(z)]).unwrap();
        let v = vacuum(&fb);
        let got = v.dotc(&w.apply(&v));
        assert!((got - c((-z * z / 2.0).exp())).norm() < 1e-12, "{z}: {got}");
    }
}

#[test]
fn sampled_functionals_are_normalized_states() {
    let fb = FockBasis::with_energies(vec![1.0, 1.3], 4).unwrap();
    let mut rng = seeded(3);
    for mode in [SamplingMode::Default, SamplingMode::Pure] {
        let phi = EnergyFunctional::sample(&fb, 2.7, mode, &mut rng).unwrap();
        assert!((phi.trace() - c(1.0)).norm() < 1e-12);
        let id = CMatrix::identity(fb.dim(), fb.dim());
        assert!((phi.evaluate(&id) - c(1.0)).norm() < 1e-12);
    }
}

fn coeffs(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-0.5..0.5f64, -0.5..0.5f64).prop_map(|(re, im)| C64::new(re, im)), n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn creator_is_the_adjoint_annihilator(f in coeffs(3)) {
        let fb = FockBasis::abstract_modes(3, 4).unwrap();
        let a = annihilator_coeffs(&fb, &f).unwrap().into_matrix();
        let ad = creator_coeffs(&fb, &f).unwrap().into_matrix();
        prop_assert!((a.adjoint() - ad).norm() < 1e-14);
    }

    #[test]
    fn ccr_on_the_low_sector(f in coeffs(2), g in coeffs(2)) {
        let fb = FockBasis::abstract_modes(2, 6).unwrap();
        let a = annihilator_coeffs(&fb, &f).unwrap().into_matrix();
        let ad = creator_coeffs(&fb, &g).unwrap().into_matrix();
        let comm = &a * &ad - &ad * &a;
        let fg: C64 = f.iter().zip(&g).map(|(x, y)| x.conj() * y).sum();
        let low = low_sector(&fb, 4);
        for &i in &low {
            for &j in &low {
                let want = if i == j { fg } else { c(0.0) };
                prop_assert!((comm[(i, j)] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn weyl_is_unitary_and_normal_ordering_rescales(f in coeffs(2)) {
        let fb = FockBasis::abstract_modes(2, 14).unwrap();
        let w = weyl_coeffs(&fb, &f).unwrap().into_matrix();
        let id = CMatrix::identity(fb.dim(), fb.dim());
        prop_assert!((w.adjoint() * &w - id).norm() < 1e-10);
        let norm_sqr: f64 = f.iter().map(|z| z.norm_sqr()).sum();
        let nw = normal_ordered_weyl_coeffs(&fb, &f).unwrap().into_matrix();
        let low = low_sector(&fb, 3);
        for &i in &low {
            for &j in &low {
                let lhs = w[(i, j)] * c((norm_sqr / 2.0).exp());
                prop_assert!((lhs - nw[(i, j)]).norm() < 1e-7, "{i} {j}");
            }
        }
    }
}
