use crate::error::{Error, Result};
use crate::model::{terminal_time, validate_scenario, Scenario};
use crate::profile::{ArrivalProfile, Segment};

use super::EquilibriumProfile;

/// Unique equilibrium for one population spread over several queues.
///
/// Queues that would open after service ends are pruned first; every
/// surviving queue `l` receives a uniform density `gamma * mu_l` from its
/// first arrival until the common terminal time `T`.
pub fn solve_single(s: &Scenario) -> Result<EquilibriumProfile> {
    if s.populations.len() != 1 {
        return Err(Error::hypothesis(
            "single population",
            format!("expected exactly one population, got {}", s.populations.len()),
        ));
    }
    let pop = &s.populations[0];
    if pop.alpha == 0.0 {
        return Err(Error::Infeasible(format!("population {} has alpha = 0, so no bounded support exists", pop.id)));
    }
    let report = validate_scenario(s);
    let count = report.surviving_queues.len();
    let gamma = pop.gamma();
    let t_end = terminal_time(s, count, pop.mass);

    let mut segments = Vec::with_capacity(count);
    let mut routing = vec![0.0; s.queues.len()];
    let mut first_arrivals = vec![None; s.queues.len()];
    for k in 0..count {
        let (mu, ts) = (s.queues[k].mu, s.start(k));
        if ts >= t_end {
            return Err(Error::Infeasible(format!(
                "queue {} opens at {} after service ends at {}",
                s.queues[k].id, ts, t_end
            )));
        }
        routing[k] = mu * (t_end - ts);
        let first = (1.0 - 1.0 / gamma) * t_end + ts / gamma;
        first_arrivals[k] = Some(first);
        segments.push(Segment { population: 0, queue: k, start: first, end: t_end, density: gamma * mu });
    }
    let t0 = first_arrivals[0].unwrap_or(t_end);
    let profile = ArrivalProfile::new(s.queues.len(), 1, segments)?;
    Ok(EquilibriumProfile {
        profile,
        epochs: vec![t0, t_end],
        service_epochs: vec![0.0, t_end],
        first_arrivals,
        serve_sets: vec![(0..count).collect()],
        routing: vec![routing],
        costs: vec![-pop.alpha * t0],
        pruned_queues: report.pruned_queues,
        sweeps: 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_queue_example() {
        let s = Scenario::simple(&[(1.0, 0.0), (1.0, 0.5)], &[(1.0, 1.0)]).unwrap();
        let eq = solve_single(&s).unwrap();
        assert!((eq.terminal_time() - 0.75).abs() < 1e-12);
        assert!((eq.routing[0][0] - 0.75).abs() < 1e-12);
        assert!((eq.routing[0][1] - 0.25).abs() < 1e-12);
        assert!((eq.first_arrivals[0].unwrap() + 0.75).abs() < 1e-12);
        assert!((eq.first_arrivals[1].unwrap() - 0.25).abs() < 1e-12);
        assert!((eq.costs[0] - 0.75).abs() < 1e-12);
        for seg in eq.profile.segments() {
            assert!((seg.density - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn single_queue_is_uniform() {
        // gamma = 0.25: arrivals at rate 0.25 on [-3, 1]
        let s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 3.0)]).unwrap();
        let eq = solve_single(&s).unwrap();
        assert!((eq.first_arrival() + 3.0).abs() < 1e-12);
        assert!((eq.terminal_time() - 1.0).abs() < 1e-12);
        assert!((eq.costs[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn prunes_late_queue() {
        let s = Scenario::simple(&[(1.0, 0.0), (1.0, 5.0)], &[(1.0, 1.0)]).unwrap();
        let eq = solve_single(&s).unwrap();
        assert_eq!(eq.pruned_queues, vec![2]);
        assert_eq!(eq.routing[0][1], 0.0);
        assert_eq!(eq.first_arrivals[1], None);
        assert!((eq.terminal_time() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_zero_alpha_and_many_populations() {
        let s = Scenario::simple(&[(1.0, 0.0)], &[(0.0, 1.0)]).unwrap();
        assert!(matches!(solve_single(&s), Err(Error::Infeasible(_))));
        let s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 1.0), (1.0, 2.0)]).unwrap();
        assert!(matches!(solve_single(&s), Err(Error::Hypothesis { .. })));
    }
}
