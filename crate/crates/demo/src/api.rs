//! Plain functions behind the wasm exports; each returns JSON.

use serde_json::{json, Value};

use concert_core::exact_two::{solve_two_user, two_user_diagnostics};
use concert_core::fluid::fluid_network;
use concert_core::poa::{equal_rate_scenario, poa_equal_rate_case, poa_single};
use concert_core::{parse_scenario, solve_multi};

fn grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    let points = points.clamp(2, 4096);
    (0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64).collect()
}

/// Equilibrium of a scenario document, with per-queue cumulative arrivals,
/// fluid queue length and waiting time, and each population's best cost
/// over queues, all sampled on `points` times (original frame).
pub fn equilibrium_curves(scenario: &str, points: usize) -> Result<Value, String> {
    let s = parse_scenario(scenario).map_err(|e| e.to_string())?;
    let eq = solve_multi(&s).map_err(|e| e.to_string())?;
    let net = fluid_network(&s, &eq.profile);
    let (a, b) = (eq.first_arrival(), eq.terminal_time());
    let pad = 0.15 * (b - a).max(1e-3);
    let ts = grid(a - pad, b + pad, points);
    let o = s.origin();

    let queues: Vec<Value> = net
        .iter()
        .enumerate()
        .map(|(k, q)| {
            json!({
                "id": s.queues[k].id,
                "mu": s.queues[k].mu,
                "start": s.queues[k].t_start,
                "arrivals": ts.iter().map(|&t| q.arrivals.eval(t)).collect::<Vec<_>>(),
                "queue": ts.iter().map(|&t| q.queue.eval(t)).collect::<Vec<_>>(),
                "wait": ts.iter().map(|&t| q.wait.eval(t)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let populations: Vec<Value> = s
        .populations
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let curves: Vec<_> = net.iter().map(|q| q.cost(p.alpha, p.beta)).collect();
            let best: Vec<f64> =
                ts.iter().map(|&t| curves.iter().map(|c| c.eval(t)).fold(f64::INFINITY, f64::min)).collect();
            json!({
                "id": p.id,
                "gamma": p.gamma(),
                "cost": eq.costs[j],
                "window": [eq.epochs[j] + o, eq.epochs[j + 1] + o],
                "best_cost": best,
            })
        })
        .collect();
    Ok(json!({
        "t": ts.iter().map(|t| t + o).collect::<Vec<_>>(),
        "terminal_time": b + o,
        "first_arrival": a + o,
        "queues": queues,
        "populations": populations,
    }))
}

/// Price of anarchy for `k` equal-rate queues (total rate `mu`) opening
/// `tau` apart, for `steps` values of `tau` in `(0, tau_max]`. Points
/// outside the feasible range of the closed form carry `null`.
pub fn poa_sweep(k: usize, mu: f64, tau_max: f64, steps: usize) -> Result<Value, String> {
    if !(tau_max.is_finite() && tau_max > 0.0) {
        return Err(format!("tau_max must be finite and > 0, got {tau_max}"));
    }
    let steps = steps.clamp(1, 1000);
    let mut tau = Vec::with_capacity(steps);
    let mut eta = Vec::with_capacity(steps);
    let mut closed = Vec::with_capacity(steps);
    for i in 1..=steps {
        let x = tau_max * i as f64 / steps as f64;
        let s = equal_rate_scenario(k, mu, x).map_err(|e| e.to_string())?;
        let general = s.pruned().and_then(|p| poa_single(&p)).map_err(|e| e.to_string())?;
        tau.push(x);
        eta.push(general.eta);
        closed.push(poa_equal_rate_case(k, mu, x).ok());
    }
    Ok(json!({ "k": k, "mu": mu, "tau": tau, "eta": eta, "closed_form": closed }))
}

/// Density, routing and expected cost of the two-user game on its support.
pub fn two_user_curves(mu1: f64, mu2: f64, alpha: f64, beta: f64, points: usize) -> Result<Value, String> {
    let eq = solve_two_user(mu1, mu2, alpha, beta).map_err(|e| e.to_string())?;
    let step = (eq.t_last - eq.t_first) / points.clamp(2, 4096) as f64;
    let (diag, rows) = two_user_diagnostics(&eq, 1e-3 * step.min(1.0), step).map_err(|e| e.to_string())?;
    // NaN routing (undefined points) becomes null
    let p1: Vec<Option<f64>> = rows.iter().map(|r| r.p1.is_finite().then_some(r.p1)).collect();
    Ok(json!({
        "t_first": eq.t_first,
        "t_last": eq.t_last,
        "cost": eq.cost,
        "t": rows.iter().map(|r| r.t).collect::<Vec<_>>(),
        "density": rows.iter().map(|r| r.f).collect::<Vec<_>>(),
        "p1": p1,
        "expected_cost": rows.iter().map(|r| r.cost).collect::<Vec<_>>(),
        "normalization_residual": diag.normalization_residual,
    }))
}
