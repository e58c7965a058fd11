use cohframe::plane::{
    anisotropy_constants, frame_operator, max_deviation_from_identity, min_pairwise_overlap, reference_epsilon,
    unlike_operator, AngleConvention, PlaneFrame,
};
use cohframe::Error;
use proptest::prelude::*;
use std::f64::consts::PI;

#[test]
fn pairwise_overlaps_stay_away_from_zero() {
    let eps = reference_epsilon();
    for n in [33usize, 100, 1_000, 10_000, 100_000, 1_000_000] {
        let f = PlaneFrame::new(n, eps).unwrap();
        assert!(min_pairwise_overlap(&f) >= 1e-8, "N={n}");
    }
}

#[test]
fn corrected_unlike_sum_approaches_anisotropic_limit() {
    let eps = reference_epsilon();
    let f = PlaneFrame::new(1_000_000, eps).unwrap();
    let a = anisotropy_constants(f.delta_theta).unwrap();
    let b = unlike_operator(&f).unwrap().corrected;
    let limit = [[1.0 + a.l, a.j_plus], [a.j_minus, 1.0 - a.l]];
    for i in 0..2 {
        for k in 0..2 {
            assert!((b[i][k] - limit[i][k]).abs() <= 1e-3, "{b:?} vs {limit:?}");
        }
    }
}

#[test]
fn full_circle_frame_is_tight() {
    let f = PlaneFrame::with_delta(1_000_000, 2.0 * PI).unwrap();
    assert!(max_deviation_from_identity(&frame_operator(&f)) < 1e-5);
}

#[test]
fn anisotropy_scales_with_epsilon() {
    let eps = reference_epsilon();
    let l1 = anisotropy_constants((2.0 - eps) * PI).unwrap().l;
    let l2 = anisotropy_constants((2.0 - 0.5 * eps) * PI).unwrap().l;
    assert!((l2 / l1 - 0.5).abs() <= 0.1);
}

#[test]
fn fig_frame_runs_in_both_conventions() {
    for conv in [AngleConvention::Uniform, AngleConvention::Endpoints] {
        let f = PlaneFrame::new(33, reference_epsilon()).unwrap().with_convention(conv);
        assert_eq!(f.coordinates().len(), 33);
        let u = unlike_operator(&f).unwrap();
        assert!(u.max_weight.is_finite());
    }
}

#[test]
fn exact_pole_on_a_node_is_reported() {
    // n = N/2 sits on the pole when the two partners are orthogonal
    let f = PlaneFrame::with_delta(4, PI).unwrap();
    assert!(matches!(unlike_operator(&f), Err(Error::SingularTerm { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn frame_deviation_is_order_epsilon(eps in 0.01f64..0.2, n in 200usize..5_000) {
        let f = PlaneFrame::new(n, eps).unwrap();
        prop_assert!(max_deviation_from_identity(&frame_operator(&f)) <= 5.0 * eps);
    }

    #[test]
    fn cross_terms_are_second_order(eps in 0.01f64..0.2) {
        let a = anisotropy_constants((2.0 - eps) * PI).unwrap();
        prop_assert!(a.j_plus.abs() <= 10.0 * eps * eps);
        prop_assert!(a.j_minus.abs() <= 10.0 * eps * eps);
    }
}
