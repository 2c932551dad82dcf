use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::ArrivalProfile;

use super::{stream_rng, ARRIVAL_PURPOSE};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Arrival {
    pub t: f64,
    pub queue: usize,
    /// Draw order, used to break ties in time.
    pub index: usize,
}

/// `n` i.i.d. arrivals from the profile normalized to a probability
/// distribution, sorted by time (then draw index). Times come from the
/// inverse of the aggregate cumulative profile; the queue is chosen in
/// proportion to the queue densities at that time.
pub fn sample_arrivals(profile: &ArrivalProfile, n: usize, seed: u64) -> Result<Vec<Arrival>> {
    sample_stream(profile, n, seed, 0)
}

pub(crate) fn sample_stream(profile: &ArrivalProfile, n: usize, seed: u64, replication: u64) -> Result<Vec<Arrival>> {
    let total = profile.total_mass();
    if total <= 0.0 {
        return Err(Error::domain("profile", "zero total mass, nothing to sample"));
    }
    let cdf = profile.cumulative_total();
    let (ts, vs) = (cdf.breakpoints(), cdf.values());
    let mut rng = stream_rng(seed, replication, ARRIVAL_PURPOSE);
    let mut out: Vec<Arrival> = (0..n)
        .map(|index| {
            let u = rng.random::<f64>() * total;
            let t = invert(ts, vs, u);
            let v = rng.random::<f64>();
            Arrival { t, queue: pick_queue(profile, t, v), index }
        })
        .collect();
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.index.cmp(&b.index)));
    Ok(out)
}

/// Smallest `t` with `F(t) = u` on a nondecreasing piecewise-linear `F`.
fn invert(ts: &[f64], vs: &[f64], u: f64) -> f64 {
    // first breakpoint whose value exceeds u; flat pieces are skipped
    let i = vs.partition_point(|&v| v <= u).clamp(1, ts.len() - 1);
    let (v0, v1) = (vs[i - 1], vs[i]);
    if v1 <= v0 {
        return ts[i];
    }
    ts[i - 1] + (u - v0) / (v1 - v0) * (ts[i] - ts[i - 1])
}

fn pick_queue(profile: &ArrivalProfile, t: f64, v: f64) -> usize {
    let mut weights = vec![0.0; profile.queue_count()];
    for g in profile.segments() {
        if g.start < t && t <= g.end {
            weights[g.queue] += g.density;
        }
    }
    if weights.iter().all(|&w| w == 0.0) {
        for g in profile.segments() {
            if g.start <= t && t < g.end {
                weights[g.queue] += g.density;
            }
        }
    }
    let total: f64 = weights.iter().sum();
    let mut target = v * total;
    for (k, w) in weights.iter().enumerate() {
        if target < *w {
            return k;
        }
        target -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
