//! Arrival profiles with piecewise-constant densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{Extension, PiecewisePath};

/// Population `population` arrives at queue `queue` with constant `density`
/// on `[start, end]`. Indices refer to the sorted order of the scenario.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub population: usize,
    pub queue: usize,
    pub start: f64,
    pub end: f64,
    pub density: f64,
}

impl Segment {
    pub fn mass(&self) -> f64 {
        self.density * (self.end - self.start)
    }

    /// Mass of this segment arrived by time `t`.
    pub fn cumulative(&self, t: f64) -> f64 {
        if t <= self.start {
            0.0
        } else if t >= self.end {
            self.mass()
        } else {
            self.density * (t - self.start)
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalProfile {
    queue_count: usize,
    population_count: usize,
    segments: Vec<Segment>,
}

impl ArrivalProfile {
    pub fn new(queue_count: usize, population_count: usize, segments: Vec<Segment>) -> Result<Self> {
        for (i, s) in segments.iter().enumerate() {
            if s.queue >= queue_count {
                return Err(Error::domain(format!("segments[{i}].queue"), format!("index {} out of range", s.queue)));
            }
            if s.population >= population_count {
                return Err(Error::domain(
                    format!("segments[{i}].population"),
                    format!("index {} out of range", s.population),
                ));
            }
            if !(s.start.is_finite() && s.end.is_finite() && s.start < s.end) {
                return Err(Error::domain(
                    format!("segments[{i}]"),
                    format!("need finite start < end, got [{}, {}]", s.start, s.end),
                ));
            }
            if !(s.density.is_finite() && s.density >= 0.0) {
                return Err(Error::domain(format!("segments[{i}].density"), "must be finite and >= 0"));
            }
        }
        Ok(ArrivalProfile { queue_count, population_count, segments })
    }

    pub fn empty(queue_count: usize, population_count: usize) -> Self {
        ArrivalProfile { queue_count, population_count, segments: Vec::new() }
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn queue_count(&self) -> usize {
        self.queue_count
    }

    pub fn population_count(&self) -> usize {
        self.population_count
    }

    /// `p_{jk}`: mass population `j` sends to queue `k`.
    pub fn routing_mass(&self, population: usize, queue: usize) -> f64 {
        self.segments.iter().filter(|s| s.population == population && s.queue == queue).map(Segment::mass).sum()
    }

    pub fn population_mass(&self, population: usize) -> f64 {
        self.segments.iter().filter(|s| s.population == population).map(Segment::mass).sum()
    }

    pub fn queue_mass(&self, queue: usize) -> f64 {
        self.segments.iter().filter(|s| s.queue == queue).map(Segment::mass).sum()
    }

    pub fn total_mass(&self) -> f64 {
        self.segments.iter().map(Segment::mass).sum()
    }

    /// Aggregate cumulative arrivals `F_k` at queue `k` over all populations.
    pub fn cumulative(&self, queue: usize) -> PiecewisePath {
        self.cumulative_where(|s| s.queue == queue)
    }

    /// Cumulative arrivals over every queue and population.
    pub fn cumulative_total(&self) -> PiecewisePath {
        self.cumulative_where(|_| true)
    }

    /// Arrivals of population `j` at queue `k`.
    pub fn cumulative_of(&self, population: usize, queue: usize) -> PiecewisePath {
        self.cumulative_where(|s| s.population == population && s.queue == queue)
    }

    fn cumulative_where(&self, keep: impl Fn(&Segment) -> bool) -> PiecewisePath {
        let segs: Vec<&Segment> = self.segments.iter().filter(|s| keep(s)).collect();
        if segs.is_empty() {
            return PiecewisePath::zero();
        }
        let mut ts: Vec<f64> = segs.iter().flat_map(|s| [s.start, s.end]).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let vs = ts.iter().map(|&t| segs.iter().map(|s| s.cumulative(t)).sum()).collect();
        PiecewisePath::from_parts(ts, vs, Extension::Constant)
    }

    /// Right-continuous density at queue `k`, summed over populations.
    pub fn density_at(&self, queue: usize, t: f64) -> f64 {
        self.segments.iter().filter(|s| s.queue == queue && s.start <= t && t < s.end).map(|s| s.density).sum()
    }

    /// Earliest segment start, if any.
    pub fn first_arrival(&self) -> Option<f64> {
        self.segments.iter().map(|s| s.start).min_by(f64::total_cmp)
    }

    pub fn last_arrival(&self) -> Option<f64> {
        self.segments.iter().map(|s| s.end).max_by(f64::total_cmp)
    }

    /// Every segment moved by `dt` in time.
    pub fn shifted(&self, dt: f64) -> ArrivalProfile {
        let segments = self.segments.iter().map(|s| Segment { start: s.start + dt, end: s.end + dt, ..*s }).collect();
        ArrivalProfile { segments, ..self.clone() }
    }

    pub fn with_segments(&self, segments: Vec<Segment>) -> Result<ArrivalProfile> {
        ArrivalProfile::new(self.queue_count, self.population_count, segments)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform() -> ArrivalProfile {
        ArrivalProfile::new(
            2,
            1,
            vec![
                Segment { population: 0, queue: 0, start: -0.75, end: 0.75, density: 0.5 },
                Segment { population: 0, queue: 1, start: 0.25, end: 0.75, density: 0.5 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn masses() {
        let p = uniform();
        assert_eq!(p.routing_mass(0, 0), 0.75);
        assert_eq!(p.routing_mass(0, 1), 0.25);
        assert_eq!(p.population_mass(0), 1.0);
        assert_eq!(p.total_mass(), 1.0);
    }

    #[test]
    fn cumulative_paths() {
        let p = uniform();
        let f0 = p.cumulative(0);
        assert_eq!(f0.eval(-2.0), 0.0);
        assert_eq!(f0.eval(0.0), 0.375);
        assert_eq!(f0.eval(5.0), 0.75);
        let total = p.cumulative_total();
        assert_eq!(total.eval(0.5), 0.625 + 0.125);
        assert_eq!(p.density_at(0, 0.0), 0.5);
        assert_eq!(p.density_at(1, 0.0), 0.0);
        assert_eq!(p.density_at(1, 0.75), 0.0);
    }

    #[test]
    fn rejects_invalid_segments() {
        let bad = Segment { population: 0, queue: 0, start: 1.0, end: 1.0, density: 1.0 };
        assert!(ArrivalProfile::new(1, 1, vec![bad]).is_err());
        let bad = Segment { population: 0, queue: 3, start: 0.0, end: 1.0, density: 1.0 };
        assert!(ArrivalProfile::new(1, 1, vec![bad]).is_err());
        let bad = Segment { population: 0, queue: 0, start: 0.0, end: 1.0, density: -1.0 };
        assert!(ArrivalProfile::new(1, 1, vec![bad]).is_err());
    }

    #[test]
    fn empty_profile_has_zero_cumulative() {
        let p = ArrivalProfile::empty(2, 1);
        assert_eq!(p.cumulative(1).eval(3.0), 0.0);
        assert_eq!(p.first_arrival(), None);
    }
}
