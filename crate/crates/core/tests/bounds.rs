use freeflow::bounds::{
    eta_theta_point, eta_theta_poly, gamma_infinity_poly, gamma_point, gamma_poly, gamma_theta_point, gamma_theta_poly,
    poa_bound, table1, BoundQuery, Topology,
};
use freeflow::{Extended, Latency};
use proptest::prelude::*;

fn query(p: u32, q: u32, theta: f64, topology: Topology) -> f64 {
    poa_bound(&BoundQuery { p, q, theta: Extended::Finite(theta), topology }).unwrap().value
}

#[test]
fn linear_limit_is_four_thirds() {
    assert!((gamma_infinity_poly::<f64>(1).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    // homogeneous latencies of one degree never lose efficiency
    assert_eq!(gamma_poly::<f64>(3, 3).unwrap(), 1.0);
    assert!((gamma_poly::<f64>(2, 1).unwrap() - 1.0355).abs() < 5e-5);
}

#[test]
fn single_precision_table_tracks_double() {
    let (a, b) = (table1::<f64>().unwrap(), table1::<f32>().unwrap());
    for (x, y) in a.iter().zip(&b) {
        assert!((x.general - f64::from(y.general)).abs() < 1e-3, "{x:?} vs {y:?}");
        assert!((x.path_disjoint - f64::from(y.path_disjoint)).abs() < 1e-3);
    }
}

#[test]
fn invalid_queries_are_rejected() {
    assert!(poa_bound(&BoundQuery { p: 1, q: 2, theta: Extended::Finite(1.0), topology: Topology::General }).is_err());
    assert!(poa_bound(&BoundQuery { p: 2, q: 0, theta: Extended::Finite(1.0), topology: Topology::General }).is_err());
    assert!(poa_bound(&BoundQuery { p: 2, q: 1, theta: Extended::Finite(-0.1), topology: Topology::General }).is_err());
    assert!(
        poa_bound(&BoundQuery { p: 2, q: 1, theta: Extended::Finite(f64::NAN), topology: Topology::General }).is_err()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn curves_rise_with_theta(p in 1u32..=5, a in 0.0f64..4.0, b in 0.0f64..4.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let (g_lo, g_hi) = (gamma_theta_poly::<f64>(p, lo).unwrap(), gamma_theta_poly::<f64>(p, hi).unwrap());
        let (e_lo, e_hi) = (eta_theta_poly::<f64>(p, lo).unwrap(), eta_theta_poly::<f64>(p, hi).unwrap());
        prop_assert!(g_lo <= g_hi + 1e-9 && e_lo <= e_hi + 1e-9);
        prop_assert!(e_hi <= g_hi + 1e-9);
        prop_assert!(g_hi <= gamma_infinity_poly::<f64>(p).unwrap() + 1e-9);
        prop_assert!(e_lo >= 1.0 - 1e-12);
    }

    #[test]
    fn path_disjoint_never_exceeds_general(p in 1u32..=4, dq in 0u32..4, theta in 0.0f64..5.0) {
        let q = p - dq.min(p - 1);
        let g = query(p, q, theta, Topology::General);
        let d = query(p, q, theta, Topology::PathDisjoint);
        prop_assert!(d <= g + 1e-9);
        prop_assert!(g <= gamma_infinity_poly::<f64>(p).unwrap() + 1e-9);
    }

    #[test]
    fn point_values_stay_below_the_class_supremum(
        p in 1u32..=4,
        q_off in 0u32..4,
        k1 in 1.01f64..4.0,
        k2 in 0.05f64..0.99,
        theta in 0.01f64..4.0,
    ) {
        let q = p - q_off.min(p - 1);
        let (fp, fq) = (Latency::monomial(1.0, p).unwrap(), Latency::monomial(1.0, q).unwrap());
        let g = gamma_point(k1, 1.0, &fp, k2, 1.0, &fq).unwrap();
        prop_assert!(g <= gamma_poly::<f64>(p, q).unwrap() + 1e-9);
        prop_assert!(gamma_theta_point(k1, 1.0, &fp, theta).unwrap() <= gamma_theta_poly::<f64>(p, theta).unwrap() + 1e-9);
        prop_assert!(eta_theta_point(k1, 1.0, &fp, theta).unwrap() <= eta_theta_poly::<f64>(p, theta).unwrap() + 1e-9);
    }
}
