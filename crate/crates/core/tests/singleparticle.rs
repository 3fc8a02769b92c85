use std::sync::Arc;

use coincidence_core::linalg::{c, C64};
use coincidence_core::singleparticle::{FieldVector, LocalizationFrame, ModeBasis, Sign};
use proptest::prelude::*;

#[test]
fn five_mode_grid() {
    let b = ModeBasis::new(1.0, 5.0, 5).unwrap();
    assert_eq!(b.momenta(), &[-5.0, -2.5, 0.0, 2.5, 5.0]);
    assert_eq!(b.dp(), 2.5);
    assert_eq!(b.energies()[2], 1.0);
    assert!((b.energies()[0] - 26f64.sqrt()).abs() < 1e-15);
    for k in 0..5 {
        assert_eq!(b.mirror(k), 4 - k);
    }
}

#[test]
fn bad_grids_are_rejected() {
    assert!(ModeBasis::new(1.0, 5.0, 4).is_err());
    assert!(ModeBasis::new(0.0, 5.0, 5).is_err());
    assert!(ModeBasis::new(1.0, -1.0, 5).is_err());
}

#[test]
fn frame_is_orthonormal_per_sign() {
    let b = ModeBasis::shared(1.0, 40.0, 801).unwrap();
    let frame = LocalizationFrame::build(&b, 0.5, 3).unwrap();
    for sign in Sign::BOTH {
        let v = frame.vectors(sign);
        assert_eq!(v.len(), 3);
        for (i, a) in v.iter().enumerate() {
            for (j, b) in v.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((a.inner(b) - c(want)).norm() < 1e-10, "{sign:?} {i} {j}");
            }
        }
    }
}

#[test]
fn coarse_lattice_cannot_host_the_frame() {
    let b = ModeBasis::shared(1.0, 6.0, 25).unwrap();
    assert!(LocalizationFrame::build(&b, 0.5, 3).is_err());
}

fn amplitudes(n: usize) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| C64::new(re, im)), n)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn configuration_round_trip(a in amplitudes(21)) {
        let b = ModeBasis::shared(1.0, 3.0, 21).unwrap();
        let f = FieldVector::new(&b, a).unwrap();
        let back = FieldVector::from_configuration(&b, &f.to_configuration()).unwrap();
        prop_assert!((&back - &f).norm() < 1e-12 * (1.0 + f.norm()));
    }

    #[test]
    fn translations_are_unitary(a in amplitudes(21), t in -5.0..5.0f64, x in -5.0..5.0f64) {
        let b = ModeBasis::shared(1.0, 3.0, 21).unwrap();
        let f = FieldVector::new(&b, a).unwrap();
        let g = f.translate(t, x);
        prop_assert!((g.norm() - f.norm()).abs() < 1e-12);
        prop_assert!((&g.translate(-t, -x) - &f).norm() < 1e-12);
    }

    #[test]
    fn j_is_an_antiunitary_involution(a in amplitudes(21), w in amplitudes(21)) {
        let b = ModeBasis::shared(1.0, 3.0, 21).unwrap();
        let f = FieldVector::new(&b, a).unwrap();
        let g = FieldVector::new(&b, w).unwrap();
        let jj = f.conjugate_j().conjugate_j();
        prop_assert_eq!(jj.amplitudes(), f.amplitudes());
        prop_assert!((f.conjugate_j().inner(&g.conjugate_j()) - f.inner(&g).conj()).norm() < 1e-12);
        let rebuilt = &f.j_real_part() + &f.j_imag_part().scale(C64::new(0.0, 1.0));
        prop_assert!((&rebuilt - &f).norm() < 1e-12);
    }
}

#[test]
fn shared_bases_compare_by_grid() {
    let a = ModeBasis::shared(1.0, 3.0, 21).unwrap();
    let b = Arc::new(ModeBasis::new(1.0, 3.0, 21).unwrap());
    assert_eq!(*a, *b);
}
