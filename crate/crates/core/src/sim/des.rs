use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Scenario;

use super::sample::Arrival;
use super::{stream_rng, ServiceDist, SimConfig};

/// Event record of one FIFO queue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QueuePath {
    pub mu: f64,
    /// Opening time (normalized frame).
    pub start: f64,
    pub arrivals: Vec<f64>,
    pub service_starts: Vec<f64>,
    pub departures: Vec<f64>,
    pub service_times: Vec<f64>,
    /// Maximal intervals during which the server works.
    pub busy: Vec<(f64, f64)>,
    /// Maximal intervals during which someone is in the system.
    pub occupied: Vec<(f64, f64)>,
    busy_cum: Vec<f64>,
    occupied_cum: Vec<f64>,
    work_cum: Vec<f64>,
}

fn merge(intervals: impl Iterator<Item = (f64, f64)>) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (a, b) in intervals {
        if b <= a {
            continue;
        }
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

fn prefix_lengths(intervals: &[(f64, f64)]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = vec![0.0];
    for (a, b) in intervals {
        acc += b - a;
        out.push(acc);
    }
    out
}

/// Total length of `intervals` inside `(-inf, t]`.
fn covered(intervals: &[(f64, f64)], cum: &[f64], t: f64) -> f64 {
    let i = intervals.partition_point(|iv| iv.1 <= t);
    let mut total = cum[i];
    if let Some(&(a, _)) = intervals.get(i) {
        if a < t {
            total += t - a;
        }
    }
    total
}

impl QueuePath {
    fn build(mu: f64, start: f64, arrivals: Vec<f64>, service_times: Vec<f64>) -> Self {
        let mut service_starts = Vec::with_capacity(arrivals.len());
        let mut departures = Vec::with_capacity(arrivals.len());
        let mut last = f64::NEG_INFINITY;
        for (a, s) in arrivals.iter().zip(&service_times) {
            let b = a.max(last).max(start);
            last = b + s;
            service_starts.push(b);
            departures.push(last);
        }
        let busy = merge(service_starts.iter().copied().zip(departures.iter().copied()));
        let occupied = merge(arrivals.iter().copied().zip(departures.iter().copied()));
        let mut work_cum = vec![0.0];
        for s in &service_times {
            work_cum.push(work_cum[work_cum.len() - 1] + s);
        }
        QueuePath {
            mu,
            start,
            busy_cum: prefix_lengths(&busy),
            occupied_cum: prefix_lengths(&occupied),
            arrivals,
            service_starts,
            departures,
            service_times,
            busy,
            occupied,
            work_cum,
        }
    }

    /// `A(t)`: arrivals by `t`.
    pub fn arrivals_at(&self, t: f64) -> usize {
        self.arrivals.partition_point(|&a| a <= t)
    }

    pub fn departures_at(&self, t: f64) -> usize {
        // FIFO keeps departures sorted
        self.departures.partition_point(|&d| d <= t)
    }

    /// `Q(t)`: users in the system, including the one in service.
    pub fn queue_len_at(&self, t: f64) -> usize {
        self.arrivals_at(t) - self.departures_at(t)
    }

    /// `B(t)`: time spent serving by `t`.
    pub fn busy_at(&self, t: f64) -> f64 {
        covered(&self.busy, &self.busy_cum, t)
    }

    /// `I(t) = (t - start)_+ - B(t)`: idleness since opening.
    pub fn idle_at(&self, t: f64) -> f64 {
        (t - self.start).max(0.0) - self.busy_at(t)
    }

    /// Time since `origin` during which the system was empty.
    pub fn empty_time_at(&self, t: f64, origin: f64) -> f64 {
        if t <= origin {
            return 0.0;
        }
        (t - origin)
            - (covered(&self.occupied, &self.occupied_cum, t) - covered(&self.occupied, &self.occupied_cum, origin))
    }

    /// Virtual waiting time: work arrived by `t` not yet done, plus the
    /// wait for the opening.
    pub fn wait_at(&self, t: f64) -> f64 {
        (self.work_cum[self.arrivals_at(t)] - self.busy_at(t)).max(0.0) + (self.start - t).max(0.0)
    }

    /// `V(m)`: total service requirement of the first `m` users.
    pub fn service_work(&self, m: usize) -> f64 {
        self.work_cum[m.min(self.service_times.len())]
    }

    /// `S(x)`: completions possible within `x` units of busy time.
    pub fn potential_service(&self, x: f64) -> usize {
        self.work_cum.partition_point(|&w| w <= x).saturating_sub(1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimPaths {
    pub n: usize,
    /// Mass each user carries.
    pub unit: f64,
    /// Start of the empty-time clock.
    pub origin: f64,
    pub queues: Vec<QueuePath>,
}

/// Simulates replication 0 of `cfg`.
pub fn run_des(s: &Scenario, events: &[Arrival], cfg: &SimConfig, origin: f64) -> Result<SimPaths> {
    run_des_replication(s, events, cfg, origin, 0)
}

/// Exact event-driven FIFO simulation: `d_j = max(a_j, d_{j-1}, start) + s_j`.
/// `events` must be sorted by time; `origin` starts the empty-time clock.
pub fn run_des_replication(
    s: &Scenario,
    events: &[Arrival],
    cfg: &SimConfig,
    origin: f64,
    replication: u64,
) -> Result<SimPaths> {
    cfg.validate()?;
    if events.windows(2).any(|w| w[0].t > w[1].t) {
        return Err(Error::domain("events", "must be sorted by time"));
    }
    if let Some(e) = events.iter().find(|e| e.queue >= s.queues.len()) {
        return Err(Error::domain("events", format!("queue index {} out of range", e.queue)));
    }
    let unit = s.total_mass() / cfg.n as f64;
    let queues = (0..s.queues.len())
        .map(|k| {
            let mu = s.queues[k].mu;
            let arrivals: Vec<f64> = events.iter().filter(|e| e.queue == k).map(|e| e.t).collect();
            let mean = unit / mu;
            let mut rng = stream_rng(cfg.seed, replication, 1 + k as u64);
            let service_times = match cfg.service_dist {
                ServiceDist::Deterministic => vec![mean; arrivals.len()],
                ServiceDist::Exponential => {
                    let exp = Exp::new(1.0 / mean).expect("positive rate");
                    (0..arrivals.len()).map(|_| exp.sample(&mut rng)).collect()
                }
            };
            QueuePath::build(mu, s.start(k), arrivals, service_times)
        })
        .collect();
    Ok(SimPaths { n: cfg.n, unit, origin, queues })
}

/// Scaled trajectories of one queue on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaledQueue {
    /// `A / n` (in mass units).
    pub arrivals: Vec<f64>,
    /// `Q / n`.
    pub queue: Vec<f64>,
    pub busy: Vec<f64>,
    pub wait: Vec<f64>,
    pub idle: Vec<f64>,
    pub empty: Vec<f64>,
}

pub fn scaled_paths(paths: &SimPaths, grid: &[f64]) -> Vec<ScaledQueue> {
    paths
        .queues
        .iter()
        .map(|q| ScaledQueue {
            arrivals: grid.iter().map(|&t| q.arrivals_at(t) as f64 * paths.unit).collect(),
            queue: grid.iter().map(|&t| q.queue_len_at(t) as f64 * paths.unit).collect(),
            busy: grid.iter().map(|&t| q.busy_at(t)).collect(),
            wait: grid.iter().map(|&t| q.wait_at(t)).collect(),
            idle: grid.iter().map(|&t| q.idle_at(t)).collect(),
            empty: grid.iter().map(|&t| q.empty_time_at(t, paths.origin)).collect(),
        })
        .collect()
}
