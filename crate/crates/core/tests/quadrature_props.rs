use cohframe::fock::ln_factorial;
use cohframe::quadrature::{auto_radius, build_polar_grid, pv_integrate, required_radial, PvRule};
use cohframe::C64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Radially the Gaussian is not a polynomial, so the radial count follows
    // the sizing rule rather than the bare degree.
    #[test]
    fn gaussian_moments_are_exact(m in 0u32..6, n in 0u32..6, kappa in 0.5f64..2.0) {
        let d = m + n;
        let radius = auto_radius(kappa, d, 1.0, 1e-14).unwrap();
        let nr = required_radial(d, 0.0, radius, kappa).max(d as usize);
        let grid = build_polar_grid(radius, nr, (d as usize + 1).max(4), kappa).unwrap();
        let got = grid.integrate(|z| z.powu(m) * z.conj().powu(n) * (-kappa * z.norm_sqr()).exp());
        let expected = if m == n { (ln_factorial(m as usize) - (m as f64 + 1.0) * kappa.ln()).exp() } else { 0.0 };
        prop_assert!((got - C64::new(expected, 0.0)).norm() <= grid.est_tail + 1e-13 * (1.0 + expected));
    }

    #[test]
    fn principal_value_of_shifted_pole(c in 0.2f64..0.8) {
        // PV int_0^1 dx / (x - c) = ln((1 - c) / c)
        let rule = PvRule::new(0.0, 1.0, vec![c], 48).unwrap();
        let v = pv_integrate(|x| 1.0 / (x - c), &rule).unwrap();
        prop_assert!((v.value - ((1.0 - c) / c).ln()).abs() <= 1e-10);
    }
}

#[test]
fn sums_are_bit_reproducible() {
    let grid = build_polar_grid(6.0, 40, 32, 1.0).unwrap();
    let f = |z: C64| (z * C64::new(0.3, 0.1)).exp() * (-z.norm_sqr()).exp();
    let a = grid.integrate(f);
    let b = grid.integrate(f);
    assert_eq!(a, b);
}
