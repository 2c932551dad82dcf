//! Closed-form equilibrium arrival profiles and a grid-based best-response
//! verifier that checks them independently.

mod multi;
mod single;
mod verify;

use serde::Serialize;

pub use multi::{check_self_organization, solve_multi};
pub use single::solve_single;
pub use verify::{verify_equilibrium, PopulationCheck, VerificationReport};

use crate::profile::ArrivalProfile;

/// Equilibrium of the fluid arrival game, in the normalized time frame.
///
/// Populations are indexed in ascending `gamma` order and queues in opening
/// order, matching the scenario they were solved from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumProfile {
    pub profile: ArrivalProfile,
    /// Arrival epochs: `epochs[0]` is the first arrival to the network,
    /// population `i` (0-based) arrives on `[epochs[i], epochs[i + 1]]`.
    pub epochs: Vec<f64>,
    /// `service_epochs[i + 1]` is the time the last user of population `i`
    /// completes service; `service_epochs[0] = 0`.
    pub service_epochs: Vec<f64>,
    /// First arrival time at each queue; `None` for queues nobody joins.
    pub first_arrivals: Vec<Option<f64>>,
    /// Queues (sorted indices) that open during each population's service
    /// window and serve it first.
    pub serve_sets: Vec<Vec<usize>>,
    /// `routing[i][k]`: mass of population `i` sent to queue `k`.
    pub routing: Vec<Vec<f64>>,
    /// Constant cost each population pays on its support.
    pub costs: Vec<f64>,
    /// Ids of queues excluded because they open after everyone is served.
    pub pruned_queues: Vec<usize>,
    /// Sweeps the serve-set fixed point needed (1 for a single population).
    pub sweeps: usize,
}

impl EquilibriumProfile {
    /// Last arrival, which coincides with the end of service.
    pub fn terminal_time(&self) -> f64 {
        self.epochs[self.epochs.len() - 1]
    }

    pub fn first_arrival(&self) -> f64 {
        self.epochs[0]
    }
}
