//! Social cost, socially optimal profiles and the price of anarchy.

use serde::Serialize;

use crate::equilibrium::{solve_multi, solve_single};
use crate::error::{Error, Result};
use crate::fluid::fluid_network;
use crate::model::{validate_scenario, Options, PopulationSpec, QueueSpec, Scenario};
use crate::profile::{ArrivalProfile, Segment};

/// Total cost `sum_j sum_k int C_jk(t) dF_jk(t)`, exact per segment.
pub fn social_cost(s: &Scenario, profile: &ArrivalProfile) -> f64 {
    let network = fluid_network(s, profile);
    profile
        .segments()
        .iter()
        .map(|g| {
            let pop = &s.populations[g.population];
            g.density * network[g.queue].cost(pop.alpha, pop.beta).integrate(g.start, g.end)
        })
        .sum()
}

/// Coordinated schedule where every user arrives exactly when served.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimalProfile {
    pub profile: ArrivalProfile,
    /// Social cost by exact integration.
    pub cost: f64,
    /// Population indices in service order (descending `beta`).
    pub order: Vec<usize>,
    /// Service epochs of the order: `epochs[i + 1]` is when the `i`-th
    /// population in `order` is served out; `epochs[0] = 0`.
    pub epochs: Vec<f64>,
}

/// Time at which queues serving at full rate from their openings have
/// served `mass` in total.
fn fill_time(mu: &[f64], ts: &[f64], mass: f64) -> f64 {
    let (mut rate, mut weighted) = (0.0, 0.0);
    for k in 0..mu.len() {
        rate += mu[k];
        weighted += mu[k] * ts[k];
        let t = (mass + weighted) / rate;
        if k + 1 == mu.len() || t <= ts[k + 1] {
            return t;
        }
    }
    unreachable!("scenario has at least one queue")
}

/// Serves populations in descending `beta` (ties by ascending `gamma`),
/// each at full capacity of every open queue.
pub fn optimal_profile(s: &Scenario) -> Result<OptimalProfile> {
    let mu = s.rates();
    let ts = s.starts();
    let mut order: Vec<usize> = (0..s.populations.len()).collect();
    order.sort_by(|&a, &b| s.populations[b].beta.total_cmp(&s.populations[a].beta));
    let mut epochs = vec![0.0];
    let mut cum = 0.0;
    let mut segments = Vec::new();
    for &j in &order {
        cum += s.populations[j].mass;
        let lo = epochs[epochs.len() - 1];
        let hi = fill_time(&mu, &ts, cum);
        for k in 0..mu.len() {
            let start = ts[k].max(lo);
            if start < hi {
                segments.push(Segment { population: j, queue: k, start, end: hi, density: mu[k] });
            }
        }
        epochs.push(hi);
    }
    let profile = ArrivalProfile::new(s.queues.len(), s.populations.len(), segments)?;
    let cost = social_cost(s, &profile);
    Ok(OptimalProfile { profile, cost, order, epochs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ClosedFormKind {
    /// Holds exactly under its hypotheses.
    Exact,
    /// Relies on a continuous relaxation of the serve counts.
    Approximation,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopulationPoa {
    pub id: usize,
    pub mass: f64,
    /// Equilibrium cost per unit mass.
    pub eq_cost: f64,
    /// Integral of the population's cost under the equilibrium profile.
    pub j_eq: f64,
    /// Same under the optimal profile.
    pub j_opt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoaReport {
    pub j_eq: f64,
    pub j_opt: f64,
    pub eta: f64,
    /// `sum_i c_i m_i` from the equilibrium costs.
    pub j_eq_closed_form: f64,
    pub j_opt_closed_form: Option<f64>,
    pub closed_form_eta: Option<f64>,
    pub closed_form_kind: Option<ClosedFormKind>,
    pub bound_satisfied: bool,
    /// Population ids in optimal service order.
    pub order: Vec<usize>,
    pub populations: Vec<PopulationPoa>,
    pub notes: Vec<String>,
}

const BOUND_TOL: f64 = 1e-9;

fn population_breakdown(
    s: &Scenario,
    eq_profile: &ArrivalProfile,
    opt_profile: &ArrivalProfile,
    costs: &[f64],
) -> Vec<PopulationPoa> {
    let part = |profile: &ArrivalProfile, j: usize| {
        let segs = profile.segments().iter().filter(|g| g.population == j).copied().collect();
        social_cost(s, &profile.with_segments(segs).expect("subset of a valid profile"))
    };
    s.populations
        .iter()
        .enumerate()
        .map(|(j, p)| PopulationPoa {
            id: p.id,
            mass: p.mass,
            eq_cost: costs[j],
            j_eq: part(eq_profile, j),
            j_opt: part(opt_profile, j),
        })
        .collect()
}

/// `2 M (M + S) / (M^2 + D + 2 M S)` with `S = sum mu_k T_k` and
/// `D = sum_k sum_l mu_k mu_l T_l (T_k - T_l)`; for unit mass this is the
/// familiar single-population ratio.
pub fn single_eta_closed_form(mu: &[f64], ts: &[f64], mass: f64) -> f64 {
    let s: f64 = mu.iter().zip(ts).map(|(m, t)| m * t).sum();
    let mut d = 0.0;
    for k in 0..mu.len() {
        for l in 0..mu.len() {
            d += mu[k] * mu[l] * ts[l] * (ts[k] - ts[l]);
        }
    }
    2.0 * mass * (mass + s) / (mass * mass + d + 2.0 * mass * s)
}

/// Price of anarchy for one population over queues that all receive users.
pub fn poa_single(s: &Scenario) -> Result<PoaReport> {
    let report = validate_scenario(s);
    if !report.pruned_queues.is_empty() {
        return Err(Error::hypothesis(
            "all queues active",
            format!(
                "queues {:?} open at or after the terminal time T, so the closed form does not apply",
                report.pruned_queues
            ),
        ));
    }
    let eq = solve_single(s)?;
    let opt = optimal_profile(s)?;
    let pop = &s.populations[0];
    let j_eq = social_cost(s, &eq.profile);
    let j_opt = opt.cost;
    let eta = j_eq / j_opt;
    let closed = single_eta_closed_form(&s.rates(), &s.starts(), pop.mass);
    let t = eq.terminal_time();
    let j_opt_closed =
        0.5 * pop.beta * s.rates().iter().zip(s.starts()).map(|(m, ts)| m * (t * t - ts * ts)).sum::<f64>();
    Ok(PoaReport {
        j_eq,
        j_opt,
        eta,
        j_eq_closed_form: eq.costs[0] * pop.mass,
        j_opt_closed_form: Some(j_opt_closed),
        closed_form_eta: Some(closed),
        closed_form_kind: Some(ClosedFormKind::Exact),
        bound_satisfied: eta <= 2.0 + BOUND_TOL,
        order: vec![pop.id],
        populations: population_breakdown(s, &eq.profile, &opt.profile, &eq.costs),
        notes: Vec::new(),
    })
}

/// Ratio for `k` queues of rate `mu / k` opening `tau` apart.
pub fn poa_equal_rate_case(k: usize, mu: f64, tau: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("K", "need at least one queue"));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain("mu", "must be finite and > 0"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain("tau", "must be finite and >= 0"));
    }
    let x = mu * tau;
    let kf = k as f64;
    // the last queue must open before the others finish: mu tau (K - 1) < 2
    if k > 1 && x * (kf - 1.0) >= 2.0 {
        return Err(Error::domain(
            "tau",
            format!("mu tau (K - 1) = {} >= 2: the last queue opens after service ends", x * (kf - 1.0)),
        ));
    }
    let den = 1.0 + x * (kf - 1.0) - x * x * (kf * kf - 1.0) / 12.0;
    if den <= 0.0 {
        return Err(Error::domain("tau", format!("denominator {den} <= 0")));
    }
    Ok((2.0 + x * (kf - 1.0)) / den)
}

/// Scenario matching [`poa_equal_rate_case`]: one unit population with
/// `alpha = beta = 1`.
pub fn equal_rate_scenario(k: usize, mu: f64, tau: f64) -> Result<Scenario> {
    let queues = (0..k).map(|i| QueueSpec { id: i + 1, mu: mu / k as f64, t_start: tau * i as f64 }).collect();
    Scenario::new(queues, vec![PopulationSpec { id: 1, alpha: 1.0, beta: 1.0, mass: 1.0 }], Options::default())
}

/// Price of anarchy for several populations.
///
/// For one population without pruning this is [`poa_single`]. Otherwise the
/// closed-form optimal cost is reported only for equal masses, and with
/// equal rates and evenly spaced openings the relaxed serve-count formula is
/// attached as an approximation.
pub fn poa_multi(s: &Scenario) -> Result<PoaReport> {
    if s.populations.len() == 1 && validate_scenario(s).pruned_queues.is_empty() {
        return poa_single(s);
    }
    let eq = solve_multi(s)?;
    let opt = optimal_profile(s)?;
    let j_eq = social_cost(s, &eq.profile);
    let j_opt = opt.cost;
    let eta = j_eq / j_opt;
    let mut notes = Vec::new();

    let j_eq_closed: f64 = s.populations.iter().zip(&eq.costs).map(|(p, c)| c * p.mass).sum();
    let equal_masses = s.populations.windows(2).all(|w| w[0].mass == w[1].mass);
    let j_opt_closed = if equal_masses {
        Some(optimal_cost_closed_form(s, &eq.serve_sets, &eq.service_epochs, &opt.order))
    } else {
        notes.push("equal masses hypothesis violated: closed-form optimal cost skipped".to_string());
        None
    };

    let mut closed_form_eta = None;
    let mut kind = None;
    if let Some((mu, tau)) = equal_rate_spacing(s) {
        if tau > 0.0 {
            closed_form_eta = Some(relaxed_eta(s, mu, tau));
            kind = Some(ClosedFormKind::Approximation);
            if mu * tau >= 1.0 {
                notes.push(format!("mu tau = {} >= 1: relaxed serve counts are outside their hypothesis", mu * tau));
            }
        }
    }
    Ok(PoaReport {
        j_eq,
        j_opt,
        eta,
        j_eq_closed_form: j_eq_closed,
        j_opt_closed_form: j_opt_closed,
        closed_form_eta,
        closed_form_kind: kind,
        bound_satisfied: eta <= 2.0 + BOUND_TOL,
        order: opt.order.iter().map(|&j| s.populations[j].id).collect(),
        populations: population_breakdown(s, &eq.profile, &opt.profile, &eq.costs),
        notes,
    })
}

/// `1/2 sum_i beta_pi(i) (sum over earlier serve sets of mu_k (tau_i^2 -
/// tau_{i-1}^2) + sum over J_i of mu_l (tau_i^2 - T_l^2))`.
pub fn optimal_cost_closed_form(s: &Scenario, serve_sets: &[Vec<usize>], tau: &[f64], order: &[usize]) -> f64 {
    let ts = s.starts();
    let mut total = 0.0;
    let mut open_rate = 0.0;
    for i in 0..serve_sets.len() {
        let (lo, hi) = (tau[i], tau[i + 1]);
        let mut part = open_rate * (hi * hi - lo * lo);
        for &l in &serve_sets[i] {
            part += s.queues[l].mu * (hi * hi - ts[l] * ts[l]);
        }
        total += 0.5 * s.populations[order[i]].beta * part;
        open_rate += serve_sets[i].iter().map(|&l| s.queues[l].mu).sum::<f64>();
    }
    total
}

/// `(mu, tau)` when every queue has rate `mu` and queue `k` opens at
/// `tau (k - 1)`.
fn equal_rate_spacing(s: &Scenario) -> Option<(f64, f64)> {
    let mu = s.queues[0].mu;
    let ts = s.starts();
    let tau = if ts.len() > 1 { ts[1] } else { return None };
    let tol = 1e-12 * (1.0 + tau);
    let even = ts.iter().enumerate().all(|(k, t)| (t - tau * k as f64).abs() <= tol);
    let same = s.queues.iter().all(|q| q.mu == mu);
    (even && same).then_some((mu, tau))
}

/// Price of anarchy with serve counts relaxed to `sqrt(2 l / mu tau)`.
fn relaxed_eta(s: &Scenario, mu: f64, tau: f64) -> f64 {
    let n = s.populations.len();
    let gamma_n = s.populations[n - 1].gamma();
    let sum_a: f64 = s.populations.iter().map(|p| p.alpha).sum();
    let sum_b: f64 = s.populations.iter().map(|p| p.beta).sum();
    let num = 0.5 * tau * ((1.0 - 1.0 / gamma_n) * sum_a + sum_b);
    let x = 2.0 / (mu * tau);
    let den: f64 = s
        .populations
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let l = (i + 1) as f64;
            let r = l.sqrt() - (l - 1.0).sqrt();
            let c = l * l.sqrt() - (l - 1.0) * (l - 1.0).sqrt();
            p.beta * (tau * tau / 12.0 * x.sqrt() * r + 2.0 * tau * tau / 3.0 * x.powf(1.5) * c - tau / mu)
        })
        .sum::<f64>()
        * 0.5
        * mu;
    num / den
}

/// Candidate serve counts for population `l` with `k` queues of rate `mu`
/// opening `tau` apart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ServeSetResult {
    pub l: usize,
    /// Integer minimizer of `T_l(k)`; the rounded real minimizer when it is
    /// among the minimizers, the smallest minimizer otherwise.
    pub k_star: usize,
    /// `sqrt(2 l / mu tau)` rounded half away from zero, clamped to `[1, K]`.
    pub k_rounded: usize,
    pub rounding_agrees: bool,
    /// `(k, T_l(k))` for every `k` in `[1, K]`.
    pub t_l_at_k: Vec<(usize, f64)>,
    /// Every minimizer, when more than one.
    pub ties: Vec<usize>,
    pub tie: bool,
    /// `mu tau < 1`.
    pub hypothesis_ok: bool,
    pub warning: Option<String>,
}

/// `T_l(k) = l / (mu k) + tau (k - 1) / 2`.
pub fn serve_time(l: usize, mu: f64, tau: f64, k: usize) -> f64 {
    l as f64 / (mu * k as f64) + tau * (k as f64 - 1.0) / 2.0
}

pub fn optimal_serve_count(l: usize, mu: f64, tau: f64, k: usize) -> Result<ServeSetResult> {
    if l == 0 {
        return Err(Error::domain("l", "populations are numbered from 1"));
    }
    if k == 0 {
        return Err(Error::domain("K", "need at least one queue"));
    }
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::domain("mu", "must be finite and > 0"));
    }
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain("tau", "must be finite and >= 0"));
    }
    let t_l_at_k: Vec<(usize, f64)> = (1..=k).map(|c| (c, serve_time(l, mu, tau, c))).collect();
    let best = t_l_at_k.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ties: Vec<usize> = t_l_at_k.iter().filter(|p| p.1 - best <= 1e-12 * best.abs().max(1.0)).map(|p| p.0).collect();
    let real = (2.0 * l as f64 / (mu * tau)).sqrt();
    let k_rounded = if real.is_finite() { (real.round() as usize).clamp(1, k) } else { k };
    let k_star = if ties.contains(&k_rounded) { k_rounded } else { ties[0] };
    let hypothesis_ok = mu * tau < 1.0;
    let warning = (!hypothesis_ok).then(|| {
        format!("mu tau = {} >= 1: several queues may serve population {l}; exhaustive search used", mu * tau)
    });
    Ok(ServeSetResult {
        l,
        k_star,
        k_rounded,
        rounding_agrees: k_star == k_rounded,
        tie: ties.len() > 1,
        ties: if ties.len() > 1 { ties } else { Vec::new() },
        t_l_at_k,
        hypothesis_ok,
        warning,
    })
}
