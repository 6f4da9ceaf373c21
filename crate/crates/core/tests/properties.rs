//! Randomized property checks of the analytic identities.

use annulus_core::specfun::{dedekind_eta, jacobi_theta1, SeriesConfig};
use annulus_core::qseries::{z_closed, z_open, CleParams, WindingWeight};
use annulus_core::laws::{gmc_ratio_cf, LqgParams};
use annulus_core::transforms::{cf_to_density, Grid};
use proptest::prelude::*;

fn cfg() -> SeriesConfig {
    SeriesConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_modular_transform(tau in 0.1f64..10.0) {
        let lhs = dedekind_eta(1.0 / tau, &cfg()).unwrap();
        let rhs = tau.sqrt() * dedekind_eta(tau, &cfg()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn theta1_odd_antiperiodic_pentagonal(x in -3.0f64..3.0, tau in 0.2f64..5.0) {
        let v = jacobi_theta1(x, tau, &cfg()).unwrap();
        let odd = jacobi_theta1(-x, tau, &cfg()).unwrap();
        prop_assert_eq!(v, -odd);
        let shifted = jacobi_theta1(x + 1.0, tau, &cfg()).unwrap();
        prop_assert!((shifted + v).abs() <= 1e-12 * (1.0 + v.abs()));
        let pent = jacobi_theta1(1.0 / 3.0, tau, &cfg()).unwrap();
        let eta3 = 3.0f64.sqrt() * dedekind_eta(3.0 * tau, &cfg()).unwrap();
        prop_assert!((pent - eta3).abs() <= 1e-12 * eta3.abs());
    }

    #[test]
    fn open_closed_channels_agree(
        tau in 0.3f64..3.0,
        kappa in 2.7f64..4.0,
        chi in -2.0f64..2.0,
    ) {
        let p = CleParams::new(kappa).unwrap();
        let w = WindingWeight::new(chi);
        let a = z_open(tau, &p, &w, &cfg()).unwrap();
        let b = z_closed(tau, &p, &w, &cfg()).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs(), "open={} closed={}", a, b);
        prop_assert!(a > 0.0);
    }

    #[test]
    fn ratio_cf_even_positive_bounded(x in -6.0f64..6.0, gamma in 0.3f64..1.9, tau in 0.1f64..4.0) {
        let lqg = LqgParams::new(gamma).unwrap();
        let v = gmc_ratio_cf(x, &lqg, tau).unwrap();
        let m = gmc_ratio_cf(-x, &lqg, tau).unwrap();
        prop_assert_eq!(v, m);
        prop_assert!(v > 0.0 && v <= 1.0 + 1e-15);
    }

    #[test]
    fn inverse_cdf_monotone(u1 in 0.01f64..0.99, u2 in 0.01f64..0.99) {
        let grid = Grid::Uniform { min: -6.0, max: 6.0, count: 129 };
        let d = cf_to_density(|t| (-t * t / 2.0).exp(), &grid).unwrap();
        let (lo, hi) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        let a = d.inverse_cdf(lo).unwrap();
        let b = d.inverse_cdf(hi).unwrap();
        prop_assert!(a <= b);
    }
}
