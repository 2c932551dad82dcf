mod common;

use common::*;
use concert_core::poa::{
    equal_rate_scenario, optimal_profile, optimal_serve_count, poa_equal_rate_case, poa_multi, poa_single, serve_time,
    social_cost, ClosedFormKind,
};
use concert_core::{solve_multi, validate_scenario, Options, PopulationSpec, QueueSpec, Scenario};
use proptest::prelude::*;

/// Midpoint rule on a fine grid: cost curves are continuous, so this
/// converges to the exact integral.
fn grid_social_cost(s: &Scenario, profile: &concert_core::ArrivalProfile) -> f64 {
    let net = concert_core::fluid::fluid_network(s, profile);
    profile
        .segments()
        .iter()
        .map(|g| {
            let pop = &s.populations[g.population];
            let c = net[g.queue].cost(pop.alpha, pop.beta);
            let n = 20_000;
            let h = (g.end - g.start) / n as f64;
            (0..n).map(|i| c.eval(g.start + (i as f64 + 0.5) * h)).sum::<f64>() * h * g.density
        })
        .sum()
}

#[test]
fn two_population_social_cost_matches_grid_integration() {
    let s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 3.0), (1.0, 1.0)]).unwrap();
    let r = poa_multi(&s).unwrap();
    let eq = solve_multi(&s).unwrap();
    assert!((r.j_eq - r.j_eq_closed_form).abs() < 1e-9);
    assert!((grid_social_cost(&s, &eq.profile) - r.j_eq).abs() < 1e-9);
}

#[test]
fn one_population_multi_report_equals_single() {
    let s = Scenario::simple(&[(1.0, 0.0), (2.0, 0.2)], &[(1.0, 2.0)]).unwrap();
    assert_eq!(poa_multi(&s).unwrap(), poa_single(&s).unwrap());
}

#[test]
fn relaxed_equal_rate_formula_is_reported_as_approximation() {
    // equal rates mu = 1, openings tau = 0.1 apart, three populations
    let queues = (0..12).map(|i| QueueSpec { id: i + 1, mu: 1.0, t_start: 0.1 * i as f64 }).collect();
    let pops = vec![
        PopulationSpec { id: 1, alpha: 1.0, beta: 3.0, mass: 1.0 },
        PopulationSpec { id: 2, alpha: 1.0, beta: 1.0, mass: 1.0 },
        PopulationSpec { id: 3, alpha: 3.0, beta: 1.0, mass: 1.0 },
    ];
    let s = Scenario::new(queues, pops, Options::default()).unwrap();
    let r = poa_multi(&s).unwrap();
    assert_eq!(r.closed_form_kind, Some(ClosedFormKind::Approximation));
    assert!(r.bound_satisfied);
    assert!((r.j_opt - r.j_opt_closed_form.unwrap()).abs() < 1e-9);
    // Regression pin. The relaxed expression lands far from the integral
    // ratio here (about 0.088 against 1.464).
    assert!((r.closed_form_eta.unwrap() - 0.08760714272537926).abs() < 1e-9);
    assert!((r.eta - 1.4644473645787701).abs() < 1e-9);
}

#[test]
fn unequal_masses_skip_closed_form_optimum() {
    let mut s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 3.0), (1.0, 1.0)]).unwrap();
    s.populations[1].mass = 2.0;
    let r = poa_multi(&s).unwrap();
    assert!(r.j_opt_closed_form.is_none());
    assert!(r.j_opt > 0.0);
}

#[test]
fn serve_count_matches_exhaustive_search() {
    for l in 1..=50 {
        for step in 1..=90 {
            let x = step as f64 * 0.01;
            let k_max = 200;
            let r = optimal_serve_count(l, 1.0, x, k_max).unwrap();
            let best = (1..=k_max).map(|k| serve_time(l, 1.0, x, k)).fold(f64::INFINITY, f64::min);
            assert!(serve_time(l, 1.0, x, r.k_star) <= best * (1.0 + 1e-12), "l={l} x={x}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn single_population_ratio_bounds(s in single_scenario()) {
        prop_assume!(validate_scenario(&s).pruned_queues.is_empty());
        let r = poa_single(&s).unwrap();
        prop_assert!(r.eta > 1.0);
        prop_assert!(r.eta <= 2.0 + 1e-9);
        prop_assert!((r.closed_form_eta.unwrap() - r.eta).abs() < 1e-9);
        prop_assert!((r.j_eq - r.j_eq_closed_form).abs() < 1e-9 * (1.0 + r.j_eq));
        prop_assert!((r.j_opt - r.j_opt_closed_form.unwrap()).abs() < 1e-9 * (1.0 + r.j_opt));
    }

    #[test]
    fn multi_population_ratio_bounds(s in multi_scenario(5, 4)) {
        let r = poa_multi(&s).unwrap();
        prop_assert!(r.eta > 1.0);
        prop_assert!(r.j_opt > 0.0);
        prop_assert!((r.j_eq - r.j_eq_closed_form).abs() < 1e-9 * (1.0 + r.j_eq));
        let opt = optimal_profile(&s).unwrap();
        prop_assert!((social_cost(&s, &opt.profile) - r.j_opt).abs() < 1e-12 * (1.0 + r.j_opt));
    }

    #[test]
    fn equal_masses_closed_form_optimum(s in (queues(5, 3.0), populations(4, true)).prop_map(|(q, p)| scenario(&q, p))) {
        let r = poa_multi(&s).unwrap();
        if let Some(c) = r.j_opt_closed_form {
            prop_assert!((c - r.j_opt).abs() < 1e-9 * (1.0 + r.j_opt));
        }
    }

    #[test]
    fn equal_rate_case(k in 2usize..8, mu in 0.2f64..5.0, frac in 0.01f64..0.99) {
        // keep mu tau (K - 1) < 2
        let tau = frac * 2.0 / (mu * (k as f64 - 1.0));
        let special = poa_equal_rate_case(k, mu, tau).unwrap();
        let general = poa_single(&equal_rate_scenario(k, mu, tau).unwrap()).unwrap();
        prop_assert!((special - general.closed_form_eta.unwrap()).abs() < 1e-9);
        prop_assert!(special > 4.0 / 3.0 && special < 2.0);
    }
}
