use concert_core::exact_two::{solve_two_user, two_user_diagnostics};
use proptest::prelude::*;

#[test]
fn unit_case_regression() {
    let eq = solve_two_user(1.0, 1.0, 1.0, 1.0).unwrap();
    let (d, trace) = two_user_diagnostics(&eq, 1e-4, 0.01).unwrap();
    // the printed density integrates to 2, not 1
    assert!((d.normalization_residual - 1.0).abs() < 1e-6);
    assert!((d.cost_flatness - 2.6794919226968972e-5).abs() < 1e-6);
    assert!((d.state_mismatch - 1.3397459613484486e-5).abs() < 1e-6);
    assert_eq!(d.min_density, 0.0);
    assert_eq!(d.routing_sum_residual, 0.0);
    assert_eq!(d.clamp_events, 0);
    assert!(trace.iter().any(|r| r.t == 0.0));
    assert_eq!(trace.last().unwrap().t, eq.t_last);
}

#[test]
fn weak_early_incentive_moves_first_arrival_to_opening() {
    let eq = solve_two_user(1.0, 2.0, 1.0, 1e-10).unwrap();
    assert!(eq.t_first < 0.0 && eq.t_first > -1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn algebraic_invariants(mu1 in 0.2f64..5.0, mu2 in 0.2f64..5.0, alpha in 0.1f64..5.0, beta in 0.1f64..5.0) {
        let eq = solve_two_user(mu1, mu2, alpha, beta).unwrap();
        prop_assert!(eq.t_first < 0.0 && 0.0 < eq.t_last);
        prop_assert!(eq.density(eq.t_last).abs() < 1e-9);
        let pre = eq.gamma * (mu1 + mu2);
        for i in 0..50 {
            let t = eq.t_first + (eq.t_last - eq.t_first) * i as f64 / 50.0;
            if t <= 0.0 {
                prop_assert_eq!(eq.density(t), pre);
            }
            if let Some(p) = eq.routing(t) {
                prop_assert!((p[0] + p[1] - 1.0).abs() <= 1e-12);
            }
        }
        // affine and decreasing after opening
        let (a, b, c) = (0.25 * eq.t_last, 0.5 * eq.t_last, 0.75 * eq.t_last);
        prop_assert!(eq.density(a) > eq.density(b) && eq.density(b) > eq.density(c));
        prop_assert!((eq.density(a) - 2.0 * eq.density(b) + eq.density(c)).abs() < 1e-9);
    }

    #[test]
    fn euler_error_is_first_order(mu in 0.3f64..3.0, alpha in 0.2f64..3.0, beta in 0.2f64..3.0) {
        let eq = solve_two_user(mu, mu, alpha, beta).unwrap();
        let (coarse, _) = two_user_diagnostics(&eq, 2e-4, 0.05).unwrap();
        let (fine, _) = two_user_diagnostics(&eq, 1e-4, 0.05).unwrap();
        prop_assert!(fine.state_mismatch < 0.6 * coarse.state_mismatch + 1e-12);
        prop_assert!(fine.state_mismatch > 0.4 * coarse.state_mismatch - 1e-12);
    }

    #[test]
    fn symmetric_rates_give_identical_queues(mu in 0.3f64..3.0, alpha in 0.2f64..3.0, beta in 0.2f64..3.0) {
        let eq = solve_two_user(mu, mu, alpha, beta).unwrap();
        let (_, trace) = two_user_diagnostics(&eq, 1e-3, 0.01).unwrap();
        for row in &trace {
            prop_assert_eq!(row.p11, row.p21);
            if row.t < eq.t_last {
                prop_assert_eq!(row.p1, 0.5);
            }
        }
    }
}
