use cohframe::spin::{beta_identity, spin_coherent, spin_overlap, spin_standard_closure, spin_unlike_closure, SpinSystem};
use cohframe::C64;
use proptest::prelude::*;

fn label() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(a, b)| C64::new(a, b))
}

proptest! {
    #[test]
    fn overlaps_are_bounded(two_j in 1u32..9, w in label(), w2 in label()) {
        let sys = SpinSystem::new(two_j);
        let o = spin_overlap(sys, w, w2).norm();
        prop_assert!(o <= 1.0 + 1e-14);
        let same = spin_overlap(sys, w, w).norm();
        prop_assert!((same - 1.0).abs() < 1e-13);
        if (w - w2).norm() > 1e-3 {
            prop_assert!(o < 1.0);
        }
    }

    #[test]
    fn vectors_reproduce_overlap_formula(two_j in 1u32..9, w in label(), w2 in label()) {
        let sys = SpinSystem::new(two_j);
        let a = spin_coherent(sys, w);
        let b = spin_coherent(sys, w2);
        prop_assert!((a.inner(&b) - spin_overlap(sys, w, w2)).norm() < 1e-12);
        prop_assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn unlike_closures_are_diagonal_identities() {
    for two_j in 1..=4 {
        let sys = SpinSystem::new(two_j);
        for lambda in [0.5, 1.0, 2.0] {
            let r = spin_unlike_closure(sys, lambda).unwrap();
            let m = &r.matrix;
            for i in 0..sys.dim() {
                for k in 0..sys.dim() {
                    if i == k {
                        assert!((m[(i, i)] - 1.0).norm() <= 1e-10);
                    } else {
                        assert!(m[(i, k)].norm() <= 1e-14);
                    }
                }
            }
            assert!(r.cross_check.unwrap() <= 1e-8, "2j={two_j} lambda={lambda}: {:?}", r.cross_check);
        }
    }
}

#[test]
fn standard_closure_cross_validates() {
    let r = spin_standard_closure(SpinSystem::new(4), 48, 20).unwrap();
    assert!(r.dev_max <= 1e-10);
    assert!(r.cross_check.unwrap() <= 1e-8);
}

#[test]
fn beta_identity_holds() {
    for two_j in 0..=20 {
        let sys = SpinSystem::new(two_j);
        for n in 0..sys.dim() {
            assert!((beta_identity(sys, n) - 1.0).abs() <= 1e-12, "2j={two_j} n={n}");
        }
    }
}
