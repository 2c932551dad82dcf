#![allow(dead_code)]

use concert_core::{Options, PopulationSpec, QueueSpec, Scenario};
use proptest::prelude::*;

/// Queues with rates in [0.2, 5] and starts in [0, span].
pub fn queues(max_k: usize, span: f64) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.2f64..5.0, 0.0f64..span), 1..=max_k)
}

/// Populations with strictly increasing gamma (gaps of at least 0.02),
/// weights scaled by a random factor, masses in [0.3, 2] or all 1.
pub fn populations(max_n: usize, unit_mass: bool) -> impl Strategy<Value = Vec<PopulationSpec>> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec(0.02f64..1.0, n),
                prop::collection::vec(0.2f64..4.0, n),
                prop::collection::vec(0.3f64..2.0, n),
            )
        })
        .prop_map(move |(steps, scales, masses)| {
            let total: f64 = steps.iter().sum::<f64>() + 0.05;
            let mut gamma = 0.0;
            steps
                .iter()
                .zip(&scales)
                .zip(&masses)
                .enumerate()
                .map(|(i, ((step, w), m))| {
                    gamma += step / total;
                    PopulationSpec {
                        id: i + 1,
                        alpha: gamma * w,
                        beta: (1.0 - gamma) * w,
                        mass: if unit_mass { 1.0 } else { *m },
                    }
                })
                .collect()
        })
}

pub fn scenario(queues: &[(f64, f64)], pops: Vec<PopulationSpec>) -> Scenario {
    let qs = queues.iter().enumerate().map(|(i, &(mu, t_start))| QueueSpec { id: i + 1, mu, t_start }).collect();
    Scenario::new(qs, pops, Options::default()).unwrap()
}

pub fn single_scenario() -> impl Strategy<Value = Scenario> {
    (queues(6, 3.0), 0.05f64..5.0, 0.05f64..5.0, 0.3f64..3.0)
        .prop_map(|(q, a, b, m)| scenario(&q, vec![PopulationSpec { id: 1, alpha: a, beta: b, mass: m }]))
}

pub fn multi_scenario(max_k: usize, max_n: usize) -> impl Strategy<Value = Scenario> {
    (queues(max_k, 3.0), populations(max_n, false)).prop_map(|(q, p)| scenario(&q, p))
}

/// Smallest `tau` with `sum mu_k (tau - T_k)_+ = mass`, by bisection.
pub fn fill_time(mu: &[f64], ts: &[f64], mass: f64) -> f64 {
    let served = |tau: f64| mu.iter().zip(ts).map(|(m, t)| m * (tau - t).max(0.0)).sum::<f64>();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while served(hi) < mass {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if served(mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Equilibrium derived from the completion frontier: on open queues
/// `F_k / mu_k + T_k` is common, rises at rate `gamma_i` during population
/// `i`'s window and reaches the service epoch `tau_i` at its end.
pub struct Frontier {
    pub tau: Vec<f64>,
    pub epochs: Vec<f64>,
    /// `routing[i][k]`
    pub routing: Vec<Vec<f64>>,
    pub activation: Vec<Option<f64>>,
}

pub fn frontier(s: &Scenario) -> Frontier {
    let mu = s.rates();
    let ts = s.starts();
    let n = s.populations.len();
    let mut tau = vec![0.0];
    let mut cum = 0.0;
    for p in &s.populations {
        cum += p.mass;
        tau.push(fill_time(&mu, &ts, cum));
    }
    let gammas = s.gammas();
    let mut epochs = vec![0.0; n + 1];
    epochs[n] = tau[n];
    for i in (0..n).rev() {
        epochs[i] = epochs[i + 1] - (tau[i + 1] - tau[i]) / gammas[i];
    }
    let mut routing = vec![vec![0.0; mu.len()]; n];
    let mut activation = vec![None; mu.len()];
    for i in 0..n {
        for k in 0..mu.len() {
            routing[i][k] = mu[k] * (tau[i + 1] - tau[i].max(ts[k])).max(0.0);
            if ts[k] >= tau[i] && ts[k] < tau[i + 1] {
                activation[k] = Some(epochs[i] + (ts[k] - tau[i]) / gammas[i]);
            }
        }
    }
    Frontier { tau, epochs, routing, activation }
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
