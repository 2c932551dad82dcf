//! Two users, two queues opening together at `t = 0`: closed-form symmetric
//! mixed equilibrium, the expected-queue dynamics, and a numerical harness
//! that reports how well the closed form holds up.
//!
//! Sign convention: the first-arrival epoch `t_first` is negative. Wherever
//! the closed form needs the length of the pre-opening window it uses
//! `|t_first|`; that is the only reading under which the expected cost is
//! continuous at the opening instant (see [`TwoUserEquilibrium::busy_prob`]).

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TwoUserEquilibrium {
    pub mu1: f64,
    pub mu2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// First arrival, `-r sqrt((2 + beta/alpha) beta/alpha)` with
    /// `r = (mu1 + mu2) / (mu1^2 + mu2^2)`.
    pub t_first: f64,
    /// Last arrival, `r (sqrt(2 alpha / beta + 1) - 1)`.
    pub t_last: f64,
    /// Equilibrium expected cost `alpha |t_first|`.
    pub cost: f64,
}

pub fn solve_two_user(mu1: f64, mu2: f64, alpha: f64, beta: f64) -> Result<TwoUserEquilibrium> {
    for (name, v) in [("mu1", mu1), ("mu2", mu2), ("alpha", alpha), ("beta", beta)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(name, format!("must be finite and > 0, got {v}")));
        }
    }
    let r = (mu1 + mu2) / (mu1 * mu1 + mu2 * mu2);
    let ba = beta / alpha;
    let t_first = -r * ((2.0 + ba) * ba).sqrt();
    let t_last = r * ((2.0 * alpha / beta + 1.0).sqrt() - 1.0);
    Ok(TwoUserEquilibrium {
        mu1,
        mu2,
        alpha,
        beta,
        gamma: alpha / (alpha + beta),
        t_first,
        t_last,
        cost: alpha * t_first.abs(),
    })
}

/// `[1 - q, q]` with `q = 1 - p`: both subtractions are exact, so the pair
/// sums to one in floating point (`p` itself may fall outside `[0, 1]`).
fn complementary(p: f64) -> [f64; 2] {
    let q = 1.0 - p;
    [1.0 - q, q]
}

impl TwoUserEquilibrium {
    pub fn rates(&self) -> [f64; 2] {
        [self.mu1, self.mu2]
    }

    pub fn contains(&self, t: f64) -> bool {
        self.t_first <= t && t <= self.t_last
    }

    /// Probability that queue `i` (0 or 1) holds the other user at `t`.
    ///
    /// Before opening it is the routed mass arrived so far,
    /// `mu_i gamma (t + |t_first|)`; after opening it is
    /// `mu_i (alpha |t_first| - beta t) / (alpha + beta)`, which keeps the
    /// cost flat at `alpha |t_first|` and agrees with the pre-opening value
    /// at `t = 0`.
    pub fn busy_prob(&self, i: usize, t: f64) -> f64 {
        let mu = self.rates()[i];
        if t <= 0.0 {
            mu * self.gamma * (t + self.t_first.abs())
        } else {
            mu * (self.alpha * self.t_first.abs() - self.beta * t) / (self.alpha + self.beta)
        }
    }

    pub fn idle_prob(&self, i: usize, t: f64) -> f64 {
        1.0 - self.busy_prob(i, t)
    }

    /// Arrival density; zero outside `[t_first, t_last]`.
    pub fn density(&self, t: f64) -> f64 {
        if !self.contains(t) {
            return 0.0;
        }
        let total = self.mu1 + self.mu2;
        if t <= 0.0 {
            self.gamma * total
        } else {
            self.post_opening_density(t)
        }
    }

    fn post_opening_density(&self, t: f64) -> f64 {
        self.gamma * (self.mu1 + self.mu2) - self.mu1 * self.idle_prob(0, t) - self.mu2 * self.idle_prob(1, t)
    }

    fn correction_numerator(&self, t: f64) -> f64 {
        let (m1, m2) = (self.mu1, self.mu2);
        m1 * m2 * (m2 - m1) * self.beta * t / ((m1 + m2) * (self.alpha + self.beta))
    }

    /// Routing probabilities `(p_1, p_2)`; `None` where the post-opening
    /// correction divides by a zero density.
    pub fn routing(&self, t: f64) -> Option<[f64; 2]> {
        let base = self.mu1 / (self.mu1 + self.mu2);
        if t <= 0.0 {
            return Some(complementary(base));
        }
        let num = self.correction_numerator(t);
        if num == 0.0 {
            return Some(complementary(base));
        }
        let f = self.density(t);
        if f == 0.0 {
            return None;
        }
        Some(complementary(base + num / f))
    }

    /// `p_i(t) f(t)`, the density of the other user joining queue `i`;
    /// formed directly so it stays finite where `f` vanishes.
    pub fn routed_density(&self, t: f64) -> [f64; 2] {
        if !self.contains(t) {
            return [0.0, 0.0];
        }
        let f = self.density(t);
        let total = self.mu1 + self.mu2;
        let num = if t > 0.0 { self.correction_numerator(t) } else { 0.0 };
        [self.mu1 / total * f + num, self.mu2 / total * f - num]
    }

    /// Expected cost of joining queue `i` at `t` when the other queue state
    /// is `busy`: `(alpha + beta)(busy / mu_i - t [t <= 0]) + beta t`.
    pub fn expected_cost(&self, i: usize, t: f64, busy: f64) -> f64 {
        let pre = if t <= 0.0 { t } else { 0.0 };
        (self.alpha + self.beta) * (busy / self.rates()[i] - pre) + self.beta * t
    }

    /// `int f` over the support; exact since `f` is piecewise linear.
    pub fn total_mass(&self) -> f64 {
        let pre = self.gamma * (self.mu1 + self.mu2) * self.t_first.abs();
        let post = 0.5 * self.t_last * (self.post_opening_density(0.0) + self.post_opening_density(self.t_last));
        pre + post
    }
}

/// State of the expected-queue dynamics: `q[k] = P(queue k holds the other
/// user)`, plus how often a step had to be clamped into `[0, 1]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct OdeState {
    pub q: [f64; 2],
    pub clamps: usize,
}

/// One forward-Euler step: `q_k += inflow_k dt - mu_k q_k dt [service_active]`,
/// with `inflow_k = p_k f` the rate at which the other user joins queue `k`.
pub fn expected_queue_ode_step(
    state: OdeState,
    dt: f64,
    inflow: [f64; 2],
    mu: [f64; 2],
    service_active: bool,
) -> OdeState {
    let mut next = state;
    for k in 0..2 {
        let served = if service_active { mu[k] * state.q[k] } else { 0.0 };
        let q = state.q[k] + (inflow[k] - served) * dt;
        if !(0.0..=1.0).contains(&q) {
            next.clamps += 1;
        }
        next.q[k] = q.clamp(0.0, 1.0);
    }
    next
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoUserDiagnostics {
    /// `|int f - 1|`.
    pub normalization_residual: f64,
    /// Infimum of `f` over the support.
    pub min_density: f64,
    /// `|f(t_last)|`.
    pub terminal_density: f64,
    /// Sup over the support of `|C_k(t) - C(t_first)|` with the expected
    /// queue taken from the integrated dynamics.
    pub cost_flatness: f64,
    /// Sup of `|p_1 + p_2 - 1|` where the routing is defined.
    pub routing_sum_residual: f64,
    /// Sup of `|q_k(t) - busy_prob(k, t)|` between dynamics and closed form.
    pub state_mismatch: f64,
    pub ode_dt: f64,
    pub ode_steps: usize,
    pub clamp_events: usize,
}

/// One row of a sampled trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub f: f64,
    /// `NaN` where the routing is undefined.
    pub p1: f64,
    pub p11: f64,
    pub p21: f64,
    pub cost: f64,
}

/// Integrates the expected-queue dynamics driven by the closed form over
/// `[t_first, t_last]` and reports residuals; `trace` samples the closed
/// form every `grid_step`.
pub fn two_user_diagnostics(
    eq: &TwoUserEquilibrium,
    ode_dt: f64,
    grid_step: f64,
) -> Result<(TwoUserDiagnostics, Vec<TraceRow>)> {
    if !(ode_dt.is_finite() && ode_dt > 0.0) {
        return Err(Error::domain("ode_dt", "must be finite and > 0"));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::domain("grid_step", "must be finite and > 0"));
    }
    let mu = eq.rates();
    let c0 = eq.expected_cost(0, eq.t_first, 0.0);
    let span = eq.t_last - eq.t_first;
    let mut state = OdeState::default();
    let mut flatness: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut steps = 0;
    let mut t = eq.t_first;
    while t < eq.t_last {
        for k in 0..2 {
            flatness = flatness.max((eq.expected_cost(k, t, state.q[k]) - c0).abs());
            mismatch = mismatch.max((state.q[k] - eq.busy_prob(k, t)).abs());
        }
        // land exactly on the opening instant so service never starts mid-step
        let mut next = (t + ode_dt).min(eq.t_last);
        if t < 0.0 && next > 0.0 {
            next = 0.0;
        }
        state = expected_queue_ode_step(state, next - t, eq.routed_density(t), mu, t >= 0.0);
        t = next;
        steps += 1;
    }
    for k in 0..2 {
        flatness = flatness.max((eq.expected_cost(k, eq.t_last, state.q[k]) - c0).abs());
        mismatch = mismatch.max((state.q[k] - eq.busy_prob(k, eq.t_last)).abs());
    }

    let rows = ((span / grid_step).ceil() as usize).max(1);
    let mut times: Vec<f64> = (0..rows).map(|i| eq.t_first + i as f64 * grid_step).collect();
    times.push(0.0);
    times.push(eq.t_last);
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut routing_sum: f64 = 0.0;
    let trace: Vec<TraceRow> = times
        .into_iter()
        .filter(|&t| t <= eq.t_last)
        .map(|t| {
            let p = eq.routing(t);
            if let Some(p) = p {
                routing_sum = routing_sum.max((p[0] + p[1] - 1.0).abs());
            }
            let (p11, p21) = (eq.busy_prob(0, t), eq.busy_prob(1, t));
            TraceRow {
                t,
                f: eq.density(t),
                p1: p.map_or(f64::NAN, |p| p[0]),
                p11,
                p21,
                cost: eq.expected_cost(0, t, p11),
            }
        })
        .collect();

    let pre = eq.density(eq.t_first);
    let post = eq.density(eq.t_last);
    let just_after = eq.post_opening_density(0.0);
    let mass = eq.total_mass();
    let diagnostics = TwoUserDiagnostics {
        normalization_residual: (mass - 1.0).abs(),
        min_density: pre.min(just_after).min(post),
        terminal_density: post.abs(),
        cost_flatness: flatness,
        routing_sum_residual: routing_sum,
        state_mismatch: mismatch,
        ode_dt,
        ode_steps: steps,
        clamp_events: state.clamps,
    };
    Ok((diagnostics, trace))
}
