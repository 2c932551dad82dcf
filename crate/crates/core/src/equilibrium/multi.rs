use crate::error::{Error, Result};
use crate::model::{validate_scenario, Scenario};
use crate::profile::{ArrivalProfile, Segment};

use super::EquilibriumProfile;

/// Relative tolerance for internal consistency checks of the closed form.
const CONSISTENCY_TOL: f64 = 1e-9;

/// Equilibrium for several populations with strictly increasing `gamma`.
///
/// Serve sets are found by fixed-point iteration: start with every queue
/// serving the first population, compute the service epochs the sets imply
/// and reassign each queue to the window its start time falls in, until
/// nothing moves. Routing masses then follow in closed form, and the arrival
/// epochs are recovered backwards from the terminal time.
pub fn solve_multi(s: &Scenario) -> Result<EquilibriumProfile> {
    let n = s.populations.len();
    let gammas = s.gammas();
    if gammas.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::hypothesis(
            "strict gamma ordering",
            format!("populations need strictly increasing gamma, got {gammas:?}"),
        ));
    }
    if let Some(p) = s.populations.iter().find(|p| p.alpha == 0.0) {
        return Err(Error::Infeasible(format!("population {} has alpha = 0, so no bounded support exists", p.id)));
    }
    let report = validate_scenario(s);
    let count = report.surviving_queues.len();
    let mu: Vec<f64> = s.rates()[..count].to_vec();
    let ts: Vec<f64> = s.starts()[..count].to_vec();
    let masses: Vec<f64> = s.populations.iter().map(|p| p.mass).collect();
    let cum: Vec<f64> = masses
        .iter()
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect();

    // assign[k] = population whose window queue k opens in
    let mut assign = vec![0usize; count];
    let max_sweeps = count * (n + 1) + 2;
    let mut sweeps = 0;
    let tau = loop {
        sweeps += 1;
        let tau = service_epochs(&mu, &ts, &assign, &cum);
        let next: Vec<usize> = ts.iter().map(|&t| window_of(t, &tau)).collect();
        if next == assign {
            break tau;
        }
        if sweeps >= max_sweeps {
            return Err(Error::NonConvergence { sweeps, last: next });
        }
        assign = next;
    };

    let serve_sets: Vec<Vec<usize>> = (0..n).map(|i| (0..count).filter(|&k| assign[k] == i).collect()).collect();
    let routing = routing_masses(&mu, &ts, &serve_sets, &assign, &masses, &cum);

    // arrival epochs, backwards from T_N = tau_N through queue 0
    let mut epochs = vec![0.0; n + 1];
    epochs[n] = tau[n];
    for i in (0..n).rev() {
        epochs[i] = epochs[i + 1] - routing[i][0] / (gammas[i] * mu[0]);
        let scale = 1.0 + epochs[i + 1].abs();
        for k in (0..count).filter(|&k| assign[k] < i) {
            let alt = epochs[i + 1] - routing[i][k] / (gammas[i] * mu[k]);
            if (alt - epochs[i]).abs() > CONSISTENCY_TOL * scale {
                return Err(Error::Infeasible(format!(
                    "arrival epoch {i} disagrees between queues 0 and {k}: {} vs {alt}",
                    epochs[i]
                )));
            }
        }
    }

    let mut first_arrivals = vec![None; s.queues.len()];
    let mut segments = Vec::new();
    for i in 0..n {
        for k in 0..count {
            let p = routing[i][k];
            let scale = 1.0 + masses[i];
            if p < -CONSISTENCY_TOL * scale {
                return Err(Error::Infeasible(format!("negative routing mass {p} for population {i} at queue {k}")));
            }
            if assign[k] > i || p <= 0.0 {
                continue;
            }
            let density = gammas[i] * mu[k];
            let start = if assign[k] == i { epochs[i + 1] - p / density } else { epochs[i] };
            if start < epochs[i] - CONSISTENCY_TOL * (1.0 + epochs[i].abs()) {
                return Err(Error::Infeasible(format!(
                    "queue {k} would be joined at {start}, before population {i} starts at {}",
                    epochs[i]
                )));
            }
            let start = start.max(epochs[i]);
            if assign[k] == i {
                first_arrivals[k] = Some(start);
            }
            if start < epochs[i + 1] {
                segments.push(Segment { population: i, queue: k, start, end: epochs[i + 1], density });
            }
        }
    }
    if epochs.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Infeasible(format!("arrival epochs are not ordered: {epochs:?}")));
    }

    // cost of population i: join queue 0 at T_i, finish at tau_i
    let costs = (0..n)
        .map(|i| {
            let p = &s.populations[i];
            (p.alpha + p.beta) * tau[i + 1] - p.alpha * epochs[i + 1]
        })
        .collect();

    let mut routing_full = routing;
    for row in &mut routing_full {
        row.resize(s.queues.len(), 0.0);
    }
    let profile = ArrivalProfile::new(s.queues.len(), n, segments)?;
    let eq = EquilibriumProfile {
        profile,
        epochs,
        service_epochs: tau,
        first_arrivals,
        serve_sets,
        routing: routing_full,
        costs,
        pruned_queues: report.pruned_queues,
        sweeps,
    };
    check_self_organization(&eq)?;
    Ok(eq)
}

/// `tau_i = (M_i + sum mu_k T_k) / sum mu_k` over queues opening in the first
/// `i` windows, `M_i` the cumulative mass. `tau_0 = 0`.
fn service_epochs(mu: &[f64], ts: &[f64], assign: &[usize], cum: &[f64]) -> Vec<f64> {
    let mut tau = vec![0.0];
    for (i, m) in cum.iter().enumerate() {
        let (rate, weighted) =
            (0..mu.len()).filter(|&k| assign[k] <= i).fold((0.0, 0.0), |(r, w), k| (r + mu[k], w + mu[k] * ts[k]));
        tau.push(if rate > 0.0 { (m + weighted) / rate } else { f64::INFINITY });
    }
    tau
}

/// Window `i` with `tau_i <= t < tau_{i+1}`; ties go to the later window.
/// Starts at or beyond the last epoch stay in the last window.
fn window_of(t: f64, tau: &[f64]) -> usize {
    let n = tau.len() - 1;
    (0..n).rev().find(|&i| t >= tau[i]).unwrap_or(0)
}

/// Routing masses in closed form. Queues opening in window `i` split the
/// cumulative mass `M_i` in proportion to their rates, corrected for their
/// later openings; queues already open split `m_i` after discounting the mass
/// the new queues absorb.
fn routing_masses(
    mu: &[f64],
    ts: &[f64],
    sets: &[Vec<usize>],
    assign: &[usize],
    masses: &[f64],
    cum: &[f64],
) -> Vec<Vec<f64>> {
    let count = mu.len();
    let n = sets.len();
    let mut p = vec![vec![0.0; count]; n];
    for i in 0..n {
        let open: Vec<usize> = (0..count).filter(|&k| assign[k] <= i).collect();
        let rate: f64 = open.iter().map(|&k| mu[k]).sum();
        for &l in &sets[i] {
            let shift: f64 = open.iter().map(|&k| mu[k] * (ts[l] - ts[k])).sum();
            p[i][l] = mu[l] / rate * (cum[i] - shift);
        }
        for &k in open.iter().filter(|&&k| assign[k] < i) {
            let j = assign[k];
            let served: f64 = (j..i).map(|q| p[q][k]).sum();
            let absorbed: f64 = sets[i].iter().map(|&l| mu[l] / mu[k] * served + mu[l] * (ts[k] - ts[l])).sum();
            p[i][k] = mu[k] / rate * (masses[i] - absorbed);
        }
    }
    p
}

/// Checks that population supports are contiguous in time, ordered by
/// `gamma`, meet end to start, and that each population's segments end
/// together.
pub fn check_self_organization(eq: &EquilibriumProfile) -> Result<()> {
    let n = eq.epochs.len() - 1;
    for i in 0..n {
        let segs: Vec<&Segment> = eq.profile.segments().iter().filter(|g| g.population == i).collect();
        if segs.is_empty() {
            continue;
        }
        let lo = segs.iter().map(|g| g.start).fold(f64::INFINITY, f64::min);
        let hi = segs.iter().map(|g| g.end).fold(f64::NEG_INFINITY, f64::max);
        let scale = 1.0 + eq.epochs[i].abs().max(eq.epochs[i + 1].abs());
        let tol = CONSISTENCY_TOL * scale;
        if (lo - eq.epochs[i]).abs() > tol || (hi - eq.epochs[i + 1]).abs() > tol {
            return Err(Error::Infeasible(format!(
                "population {i} support [{lo}, {hi}] does not match its epochs [{}, {}]",
                eq.epochs[i],
                eq.epochs[i + 1]
            )));
        }
        if segs.iter().any(|g| (g.end - hi).abs() > tol) {
            return Err(Error::Infeasible(format!("population {i} segments end at different times")));
        }
    }
    Ok(())
}
