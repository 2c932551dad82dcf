use serde::Serialize;

use crate::error::{Error, Result};
use crate::fluid::fluid_network;
use crate::model::Scenario;
use crate::par::map_range;
use crate::profile::ArrivalProfile;

/// Best-response check of one population.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PopulationCheck {
    pub population: usize,
    /// Mean cost over the population's support points.
    pub cost: f64,
    /// `sup |C - cost|` over the support.
    pub max_support_cost_deviation: f64,
    /// `min (C - cost)` over every off-support point of every queue;
    /// `+inf` when there is none.
    pub min_off_support_cost_gap: f64,
    pub support_points: usize,
    pub off_support_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub populations: Vec<PopulationCheck>,
    pub is_equilibrium: bool,
    pub tol: f64,
    pub grid_step: f64,
    /// Interval covered by the uniform grid.
    pub span: (f64, f64),
    pub grid_points: usize,
}

impl VerificationReport {
    pub fn max_support_cost_deviation(&self) -> f64 {
        self.populations.iter().map(|p| p.max_support_cost_deviation).fold(0.0, f64::max)
    }

    pub fn min_off_support_cost_gap(&self) -> f64 {
        self.populations.iter().map(|p| p.min_off_support_cost_gap).fold(f64::INFINITY, f64::min)
    }
}

/// Evaluates every population's arrival cost at every queue and checks that
/// it is constant on the population's support and no lower anywhere else.
///
/// Costs are exact piecewise-linear paths, sampled on a uniform grid over
/// `[first arrival - 1, last arrival + 1]` together with every segment
/// endpoint and every cost breakpoint inside that span.
pub fn verify_equilibrium(
    s: &Scenario,
    profile: &ArrivalProfile,
    grid_step: f64,
    tol: f64,
) -> Result<VerificationReport> {
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::domain("grid_step", "must be finite and > 0"));
    }
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(Error::domain("tol", "must be finite and >= 0"));
    }
    if profile.queue_count() != s.queues.len() || profile.population_count() != s.populations.len() {
        return Err(Error::domain(
            "profile",
            format!(
                "profile has {} queues and {} populations, scenario has {} and {}",
                profile.queue_count(),
                profile.population_count(),
                s.queues.len(),
                s.populations.len()
            ),
        ));
    }
    let first = profile.first_arrival().unwrap_or(0.0);
    let last = profile.last_arrival().unwrap_or(0.0);
    let span = (first - 1.0, last + 1.0);
    let steps = ((span.1 - span.0) / grid_step).ceil() as usize;
    let mut grid: Vec<f64> = (0..=steps).map(|i| (span.0 + i as f64 * grid_step).min(span.1)).collect();
    grid.extend(profile.segments().iter().flat_map(|g| [g.start, g.end]));

    let network = fluid_network(s, profile);
    // candidate points per queue: shared grid plus that queue's breakpoints
    let points: Vec<Vec<f64>> = network
        .iter()
        .map(|fq| {
            let mut pts = grid.clone();
            pts.extend(fq.wait.breakpoints().iter().copied().filter(|t| *t >= span.0 && *t <= span.1));
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts
        })
        .collect();

    let populations = map_range(s.populations.len(), |j| {
        let pop = &s.populations[j];
        let mut on = Vec::new();
        let mut off = Vec::new();
        for (k, fq) in network.iter().enumerate() {
            let cost = fq.cost(pop.alpha, pop.beta);
            let support: Vec<(f64, f64)> = profile
                .segments()
                .iter()
                .filter(|g| g.population == j && g.queue == k && g.density > 0.0)
                .map(|g| (g.start, g.end))
                .collect();
            for &t in &points[k] {
                let c = cost.eval(t);
                if support.iter().any(|&(a, b)| a <= t && t <= b) {
                    on.push(c);
                } else {
                    off.push(c);
                }
            }
        }
        let mean = if on.is_empty() { f64::NAN } else { on.iter().sum::<f64>() / on.len() as f64 };
        let deviation = on.iter().map(|c| (c - mean).abs()).fold(0.0, f64::max);
        let gap =
            if on.is_empty() { f64::INFINITY } else { off.iter().map(|c| c - mean).fold(f64::INFINITY, f64::min) };
        PopulationCheck {
            population: j,
            cost: mean,
            max_support_cost_deviation: deviation,
            min_off_support_cost_gap: gap,
            support_points: on.len(),
            off_support_points: off.len(),
        }
    });
    let is_equilibrium =
        populations.iter().all(|p| p.max_support_cost_deviation <= tol && p.min_off_support_cost_gap >= -tol);
    Ok(VerificationReport { populations, is_equilibrium, tol, grid_step, span, grid_points: steps + 1 })
}
