use serde::Serialize;

use crate::error::Result;
use crate::fluid::fluid_network;
use crate::model::Scenario;
use crate::par::map_range;
use crate::profile::ArrivalProfile;

use super::des::{run_des_replication, scaled_paths, ScaledQueue, SimPaths};
use super::sample::sample_stream;
use super::{uniform_grid, SimConfig, DEFAULT_GRID_POINTS};

/// Sup-norm grid distances between scaled simulated and fluid paths, maxed
/// over queues.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ProcessErrors {
    pub queue_length: f64,
    pub arrivals: f64,
    pub busy: f64,
    pub wait: f64,
}

impl ProcessErrors {
    fn zip(self, o: ProcessErrors, f: impl Fn(f64, f64) -> f64) -> ProcessErrors {
        ProcessErrors {
            queue_length: f(self.queue_length, o.queue_length),
            arrivals: f(self.arrivals, o.arrivals),
            busy: f(self.busy, o.busy),
            wait: f(self.wait, o.wait),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationErrors {
    pub replication: usize,
    pub errors: ProcessErrors,
    /// Earliest sampled arrival; `None` without users.
    pub first_arrival: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub n: usize,
    pub replications: Vec<ReplicationErrors>,
    pub mean: ProcessErrors,
    pub max: ProcessErrors,
    /// Infimum of the profile's support.
    pub fluid_first_arrival: Option<f64>,
    pub grid: Vec<f64>,
}

/// One simulated replication with its scaled paths on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Replication {
    pub replication: usize,
    pub paths: SimPaths,
    pub scaled: Vec<ScaledQueue>,
}

/// Grid from the config, or the default span around the profile.
pub(crate) fn grid_for(s: &Scenario, profile: &ArrivalProfile, cfg: &SimConfig) -> Vec<f64> {
    if let Some(grid) = &cfg.grid {
        return grid.clone();
    }
    let (lo, hi) = match (profile.first_arrival(), profile.last_arrival()) {
        (Some(a), Some(b)) => (a, b),
        _ => (0.0, s.starts().into_iter().fold(0.0, f64::max)),
    };
    uniform_grid(lo - 0.1, hi + 0.5, DEFAULT_GRID_POINTS)
}

/// Runs every replication of `cfg` (in parallel with the `parallel` feature).
pub fn run_replications(s: &Scenario, profile: &ArrivalProfile, cfg: &SimConfig) -> Result<Vec<Replication>> {
    cfg.validate()?;
    let grid = grid_for(s, profile, cfg);
    let origin = profile.first_arrival().unwrap_or(grid[0]);
    let runs = map_range(cfg.replications, |r| -> Result<Replication> {
        let events =
            if profile.total_mass() > 0.0 { sample_stream(profile, cfg.n, cfg.seed, r as u64)? } else { Vec::new() };
        let paths = run_des_replication(s, &events, cfg, origin, r as u64)?;
        let scaled = scaled_paths(&paths, &grid);
        Ok(Replication { replication: r, paths, scaled })
    });
    runs.into_iter().collect()
}

fn sup_diff(sim: &[f64], fluid: impl Fn(usize) -> f64) -> f64 {
    sim.iter().enumerate().map(|(i, v)| (v - fluid(i)).abs()).fold(0.0, f64::max)
}

/// Compares each replication's scaled queue length, arrivals, busy time and
/// virtual wait with the fluid processes of the profile.
pub fn convergence_report(s: &Scenario, profile: &ArrivalProfile, cfg: &SimConfig) -> Result<ConvergenceReport> {
    let grid = grid_for(s, profile, cfg);
    let network = fluid_network(s, profile);
    let reps = run_replications(s, profile, cfg)?;
    let replications: Vec<ReplicationErrors> = reps
        .iter()
        .map(|rep| {
            let mut e = ProcessErrors::default();
            for (k, fq) in network.iter().enumerate() {
                let sq = &rep.scaled[k];
                let q = ProcessErrors {
                    queue_length: sup_diff(&sq.queue, |i| fq.queue.eval(grid[i])),
                    arrivals: sup_diff(&sq.arrivals, |i| fq.arrivals.eval(grid[i])),
                    busy: sup_diff(&sq.busy, |i| fq.busy.eval(grid[i])),
                    wait: sup_diff(&sq.wait, |i| fq.wait.eval(grid[i])),
                };
                e = e.zip(q, f64::max);
            }
            let first_arrival =
                rep.paths.queues.iter().filter_map(|q| q.arrivals.first().copied()).min_by(f64::total_cmp);
            ReplicationErrors { replication: rep.replication, errors: e, first_arrival }
        })
        .collect();
    let count = replications.len() as f64;
    let sum = replications.iter().fold(ProcessErrors::default(), |acc, r| acc.zip(r.errors, |a, b| a + b));
    let mean = sum.zip(ProcessErrors::default(), |a, _| a / count);
    let max = replications.iter().fold(ProcessErrors::default(), |acc, r| acc.zip(r.errors, f64::max));
    Ok(ConvergenceReport { n: cfg.n, replications, mean, max, fluid_first_arrival: profile.first_arrival(), grid })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRatio {
    pub small: ConvergenceReport,
    pub large: ConvergenceReport,
    /// Mean error at the larger `n` over mean error at the smaller one.
    pub ratio: ProcessErrors,
}

/// Same seeds and grid at `n` and `factor * n`.
pub fn convergence_ratio(
    s: &Scenario,
    profile: &ArrivalProfile,
    cfg: &SimConfig,
    factor: usize,
) -> Result<ConvergenceRatio> {
    let mut cfg = cfg.clone();
    cfg.grid = Some(grid_for(s, profile, &cfg));
    let small = convergence_report(s, profile, &cfg)?;
    cfg.n *= factor.max(1);
    let large = convergence_report(s, profile, &cfg)?;
    let ratio = large.mean.zip(small.mean, |l, sm| if sm > 0.0 { l / sm } else { 0.0 });
    Ok(ConvergenceRatio { small, large, ratio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::solve_single;

    #[test]
    fn empty_profile_has_zero_errors() {
        let s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 1.0)]).unwrap();
        let r = convergence_report(&s, &ArrivalProfile::empty(1, 1), &SimConfig::new(10, 3)).unwrap();
        assert_eq!(r.max, ProcessErrors::default());
    }

    #[test]
    fn deterministic_across_runs() {
        let s = Scenario::simple(&[(1.0, 0.0), (2.0, 0.3)], &[(1.0, 1.0)]).unwrap();
        let eq = solve_single(&s).unwrap();
        let mut cfg = SimConfig::new(200, 11);
        cfg.replications = 3;
        let a = convergence_report(&s, &eq.profile, &cfg).unwrap();
        let b = convergence_report(&s, &eq.profile, &cfg).unwrap();
        assert_eq!(a, b);
    }
}
