//! Fluid processes of one queue driven by an arrival profile.
//!
//! With `F_k` the cumulative arrivals routed to queue `k`, rate `mu` and
//! opening time `s`:
//!
//! ```text
//! X(t) = F_k(t) - mu (t - s)_+              netflow
//! Psi(t) = sup_{u <= t} (-X(u))_+           regulator (cumulative idleness, in mass)
//! Q(t) = X(t) + Psi(t)                      queue length
//! B(t) = (t - s)_+ - Psi(t) / mu            busy time
//! W(t) = Q(t) / mu + (s - t)_+              virtual waiting time
//! C(t) = (alpha + beta) W(t) + beta t       cost of arriving at t
//! ```
//!
//! Every object is an exact [`PiecewisePath`].

use serde::Serialize;

use crate::model::{PopulationSpec, Scenario};
use crate::path::{Extension, PiecewisePath};
use crate::profile::ArrivalProfile;

/// Service parameters of a queue in the normalized time frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Server {
    pub mu: f64,
    pub start: f64,
}

impl Scenario {
    pub fn server(&self, k: usize) -> Server {
        Server { mu: self.queues[k].mu, start: self.start(k) }
    }
}

pub fn netflow(arrivals: &PiecewisePath, server: Server) -> PiecewisePath {
    arrivals.sub(&PiecewisePath::ramp(server.start, server.mu))
}

/// One-sided reflection of `x` at zero, started at its first breakpoint.
/// Returns `(phi, psi)` with `phi = x + psi >= 0` and `psi` the smallest
/// nondecreasing path making that hold.
pub fn reflect(x: &PiecewisePath) -> (PiecewisePath, PiecewisePath) {
    let ts = x.breakpoints();
    let vs = x.values();
    let mut level = (-vs[0]).max(0.0);
    let mut psi_t = vec![ts[0]];
    let mut psi_v = vec![level];
    for i in 1..ts.len() {
        let (a, b) = (-vs[i - 1], -vs[i]);
        if b > level {
            if a < level {
                let tc = ts[i - 1] + (level - a) / (b - a) * (ts[i] - ts[i - 1]);
                if tc > psi_t[psi_t.len() - 1] && tc < ts[i] {
                    psi_t.push(tc);
                    psi_v.push(level);
                }
            }
            level = b;
        }
        psi_t.push(ts[i]);
        psi_v.push(level);
    }
    let mut right = 0.0;
    let slope = x.right_slope();
    if slope < 0.0 {
        let b = -vs[vs.len() - 1];
        if b < level {
            let tc = ts[ts.len() - 1] + (level - b) / -slope;
            // a gap below rounding puts the crossing on the last breakpoint
            if tc > psi_t[psi_t.len() - 1] {
                psi_t.push(tc);
                psi_v.push(level);
            }
        }
        right = -slope;
    }
    let psi_ext = if right == 0.0 { Extension::Constant } else { Extension::Linear { left: 0.0, right } };
    let psi = PiecewisePath::from_parts(psi_t, psi_v, psi_ext);

    let phi_v = psi.breakpoints().iter().zip(psi.values()).map(|(&t, &p)| (x.eval(t) + p).max(0.0)).collect();
    let (left, right) = (x.left_slope(), x.right_slope() + right);
    let phi_ext = if left == 0.0 && right == 0.0 { Extension::Constant } else { Extension::Linear { left, right } };
    let phi = PiecewisePath::from_parts(psi.breakpoints().to_vec(), phi_v, phi_ext);
    (phi, psi)
}

/// All fluid processes of one queue.
#[derive(Clone, Debug, Serialize)]
pub struct FluidQueue {
    pub server: Server,
    pub arrivals: PiecewisePath,
    pub netflow: PiecewisePath,
    pub queue: PiecewisePath,
    pub regulator: PiecewisePath,
    pub busy: PiecewisePath,
    pub wait: PiecewisePath,
}

impl FluidQueue {
    pub fn new(profile: &ArrivalProfile, queue: usize, server: Server) -> Self {
        Self::from_arrivals(profile.cumulative(queue), server)
    }

    pub fn from_arrivals(arrivals: PiecewisePath, server: Server) -> Self {
        let x = netflow(&arrivals, server);
        let (q, psi) = reflect(&x);
        let busy = PiecewisePath::ramp(server.start, 1.0).combine(1.0, &psi, -1.0 / server.mu);
        let wait = q.combine(1.0 / server.mu, &PiecewisePath::countdown(server.start), 1.0);
        FluidQueue { server, arrivals, netflow: x, queue: q, regulator: psi, busy, wait }
    }

    /// Cost of arriving at this queue for a user with weights `(alpha, beta)`.
    pub fn cost(&self, alpha: f64, beta: f64) -> PiecewisePath {
        self.wait.combine(alpha + beta, &PiecewisePath::identity(), beta)
    }
}

pub fn fluid_queue(profile: &ArrivalProfile, queue: usize, server: Server) -> PiecewisePath {
    FluidQueue::new(profile, queue, server).queue
}

pub fn fluid_busy(profile: &ArrivalProfile, queue: usize, server: Server) -> PiecewisePath {
    FluidQueue::new(profile, queue, server).busy
}

pub fn fluid_wait(profile: &ArrivalProfile, queue: usize, server: Server) -> PiecewisePath {
    FluidQueue::new(profile, queue, server).wait
}

pub fn cost_curve(pop: &PopulationSpec, profile: &ArrivalProfile, queue: usize, server: Server) -> PiecewisePath {
    FluidQueue::new(profile, queue, server).cost(pop.alpha, pop.beta)
}

/// Fluid processes for every queue of the scenario.
pub fn fluid_network(s: &Scenario, profile: &ArrivalProfile) -> Vec<FluidQueue> {
    (0..s.queues.len()).map(|k| FluidQueue::new(profile, k, s.server(k))).collect()
}
