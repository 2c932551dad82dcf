//! Seeded Monte Carlo simulation of `n` strategic users drawn from an
//! arrival profile, with service accelerated by `n`.
//!
//! Each user carries mass `M / n` (`M` the scenario's total mass) and needs
//! service with mean `(M / n) / mu_k`, so scaled paths are directly
//! comparable with the fluid processes.
//!
//! Randomness comes from ChaCha8 seeded with `seed`, one stream per
//! (replication, purpose): stream `rep << 32` draws arrivals and stream
//! `(rep << 32) + 1 + k` draws service times at queue `k`.

mod convergence;
mod des;
mod sample;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use convergence::{
    convergence_ratio, convergence_report, run_replications, ConvergenceRatio, ConvergenceReport, ProcessErrors,
    Replication, ReplicationErrors,
};
pub use des::{run_des, run_des_replication, scaled_paths, QueuePath, ScaledQueue, SimPaths};
pub use sample::{sample_arrivals, Arrival};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ServiceDist {
    Exponential,
    Deterministic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub seed: u64,
    pub service_dist: ServiceDist,
    /// Evaluation times; `None` picks 512 points over
    /// `[first arrival - 0.1, last arrival + 0.5]`.
    pub grid: Option<Vec<f64>>,
    pub replications: usize,
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SimConfig { n, seed, service_dist: ServiceDist::Exponential, grid: None, replications: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n", "need at least one user"));
        }
        if self.replications == 0 {
            return Err(Error::domain("replications", "need at least one replication"));
        }
        if let Some(grid) = &self.grid {
            if grid.is_empty() || grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::domain("grid", "must be non-empty, finite and strictly increasing"));
            }
        }
        Ok(())
    }
}

pub const DEFAULT_GRID_POINTS: usize = 512;

/// Equispaced grid of `points` over `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![a];
    }
    let h = (b - a) / (points - 1) as f64;
    (0..points).map(|i| if i + 1 == points { b } else { a + i as f64 * h }).collect()
}

pub(crate) const ARRIVAL_PURPOSE: u64 = 0;

pub(crate) fn stream_rng(seed: u64, replication: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((replication << 32) + purpose);
    rng
}
