//! Strategic arrivals into parallel FIFO queues with staggered opening times.
//!
//! The crate computes equilibrium arrival profiles of the fluid arrival game
//! (one or several populations), the exact fluid processes they induce
//! (netflow, reflection, queue length, busy time, virtual waiting time, cost),
//! social costs and price of anarchy, the closed-form two-user finite game,
//! and a seeded discrete-event simulator that checks the fluid limits
//! empirically.
//!
//! All solvers work in a normalized time frame where the earliest queue opens
//! at `t = 0`. [`Scenario::origin`] records the shift so that callers can
//! translate reported times back.

pub mod equilibrium;
mod error;
pub mod exact_two;
pub mod fluid;
pub mod io;
pub mod model;
mod par;
pub mod path;
pub mod poa;
pub mod profile;
pub mod sim;

pub use equilibrium::{solve_multi, solve_single, verify_equilibrium, EquilibriumProfile, VerificationReport};
pub use error::{Error, Result};
pub use model::{
    gamma_of, parse_scenario, validate_scenario, Options, PopulationSpec, QueueSpec, Scenario, ValidationReport,
};
pub use path::{Extension, PiecewisePath};
pub use profile::{ArrivalProfile, Segment};
