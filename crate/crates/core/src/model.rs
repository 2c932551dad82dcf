//! Scenario definition, ingestion and feasibility checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_TOL: f64 = 1e-6;
pub const DEFAULT_GRID_STEP: f64 = 1e-2;

/// A single FIFO server: service rate and the (raw, document-frame) time it
/// opens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueueSpec {
    pub id: usize,
    pub mu: f64,
    pub t_start: f64,
}

impl QueueSpec {
    pub fn mean_service_time(&self) -> f64 {
        1.0 / self.mu
    }
}

/// A population of users sharing the linear cost `alpha * wait + beta * completion`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PopulationSpec {
    pub id: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mass: f64,
}

impl PopulationSpec {
    pub fn gamma(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Options {
    pub tol: f64,
    pub grid_step: f64,
    pub seed: u64,
}

impl Default for Options {
    fn default() -> Self {
        Options { tol: DEFAULT_TOL, grid_step: DEFAULT_GRID_STEP, seed: 0 }
    }
}

/// Queues sorted by opening time (ties by id) and populations sorted by
/// `gamma` (ties by id). Queue start times are kept as given; `origin` is the
/// earliest of them and [`Scenario::start`] returns normalized times.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub queues: Vec<QueueSpec>,
    pub populations: Vec<PopulationSpec>,
    pub options: Options,
    origin: f64,
}

/// Ratio of waiting-cost weight to total weight.
pub fn gamma_of(alpha: f64, beta: f64) -> Result<f64> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(Error::domain("alpha/beta", "weights must be finite"));
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(Error::domain("alpha/beta", "weights must be non-negative"));
    }
    if alpha + beta == 0.0 {
        return Err(Error::domain("alpha/beta", "alpha + beta must be positive"));
    }
    Ok(alpha / (alpha + beta))
}

impl Scenario {
    pub fn new(mut queues: Vec<QueueSpec>, mut populations: Vec<PopulationSpec>, options: Options) -> Result<Self> {
        if queues.is_empty() {
            return Err(Error::domain("queues", "at least one queue is required"));
        }
        if populations.is_empty() {
            return Err(Error::domain("populations", "at least one population is required"));
        }
        for (i, q) in queues.iter().enumerate() {
            if !(q.mu.is_finite() && q.mu > 0.0) {
                return Err(Error::domain(format!("queues[{i}].mu"), format!("must be > 0, got {}", q.mu)));
            }
            if !(q.t_start.is_finite() && q.t_start >= 0.0) {
                return Err(Error::domain(
                    format!("queues[{i}].t_start"),
                    format!("must be finite and >= 0, got {}", q.t_start),
                ));
            }
        }
        for (i, p) in populations.iter().enumerate() {
            if !(p.alpha.is_finite() && p.alpha >= 0.0) {
                return Err(Error::domain(format!("populations[{i}].alpha"), format!("must be >= 0, got {}", p.alpha)));
            }
            if !(p.beta.is_finite() && p.beta > 0.0) {
                return Err(Error::domain(format!("populations[{i}].beta"), format!("must be > 0, got {}", p.beta)));
            }
            if !(p.mass.is_finite() && p.mass > 0.0) {
                return Err(Error::domain(format!("populations[{i}].mass"), format!("must be > 0, got {}", p.mass)));
            }
        }
        check_unique_ids(queues.iter().map(|q| q.id), "queues")?;
        check_unique_ids(populations.iter().map(|p| p.id), "populations")?;
        if !(options.tol.is_finite() && options.tol > 0.0) {
            return Err(Error::domain("options.tol", "must be > 0"));
        }
        if !(options.grid_step.is_finite() && options.grid_step > 0.0) {
            return Err(Error::domain("options.grid_step", "must be > 0"));
        }

        queues.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then(a.id.cmp(&b.id)));
        populations.sort_by(|a, b| a.gamma().total_cmp(&b.gamma()).then(a.id.cmp(&b.id)));
        let origin = queues[0].t_start;
        Ok(Scenario { queues, populations, options, origin })
    }

    /// Convenience constructor: queues from `(mu, t_start)` pairs and
    /// populations from `(alpha, beta)` pairs with unit mass.
    pub fn simple(queues: &[(f64, f64)], populations: &[(f64, f64)]) -> Result<Self> {
        Scenario::new(
            queues.iter().enumerate().map(|(i, &(mu, t_start))| QueueSpec { id: i + 1, mu, t_start }).collect(),
            populations
                .iter()
                .enumerate()
                .map(|(i, &(alpha, beta))| PopulationSpec { id: i + 1, alpha, beta, mass: 1.0 })
                .collect(),
            Options::default(),
        )
    }

    /// Earliest raw start time; subtracted from every start by [`Scenario::start`].
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Normalized start time of the queue at sorted position `k`.
    pub fn start(&self, k: usize) -> f64 {
        self.queues[k].t_start - self.origin
    }

    pub fn starts(&self) -> Vec<f64> {
        (0..self.queues.len()).map(|k| self.start(k)).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.queues.iter().map(|q| q.mu).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.populations.iter().map(PopulationSpec::gamma).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.populations.iter().map(|p| p.mass).sum()
    }

    pub fn queue_index(&self, id: usize) -> Option<usize> {
        self.queues.iter().position(|q| q.id == id)
    }

    pub fn population_index(&self, id: usize) -> Option<usize> {
        self.populations.iter().position(|p| p.id == id)
    }

    /// Same scenario restricted to the queues whose ids are listed.
    pub fn with_queues(&self, ids: &[usize]) -> Result<Scenario> {
        let queues = self.queues.iter().filter(|q| ids.contains(&q.id)).cloned().collect();
        Scenario::new(queues, self.populations.clone(), self.options.clone())
    }

    /// Scenario with every queue the feasibility check prunes removed.
    pub fn pruned(&self) -> Result<Scenario> {
        let report = validate_scenario(self);
        if report.pruned_queues.is_empty() {
            return Ok(self.clone());
        }
        self.with_queues(&report.surviving_queues)
    }

    pub fn to_document(&self) -> String {
        let doc = Document {
            queues: self.queues.iter().map(|q| QueueDoc { id: Some(q.id), mu: q.mu, t_start: q.t_start }).collect(),
            populations: self
                .populations
                .iter()
                .map(|p| PopulationDoc { id: Some(p.id), alpha: p.alpha, beta: p.beta, mass: Some(p.mass) })
                .collect(),
            options: Some(OptionsDoc {
                tol: Some(self.options.tol),
                grid_step: Some(self.options.grid_step),
                seed: Some(self.options.seed),
            }),
        };
        serde_json::to_string_pretty(&doc).expect("scenario document serializes")
    }
}

fn check_unique_ids(ids: impl Iterator<Item = usize>, what: &str) -> Result<()> {
    let mut seen: Vec<usize> = ids.collect();
    seen.sort_unstable();
    if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::domain(format!("{what}.id"), format!("duplicate id {}", w[0])));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QueueDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<usize>,
    mu: f64,
    t_start: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PopulationDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<usize>,
    alpha: f64,
    beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mass: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grid_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    queues: Vec<QueueDoc>,
    populations: Vec<PopulationDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<OptionsDoc>,
}

/// Parses a JSON scenario document. Queue and population ids default to
/// their 1-based position in the document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: Document = serde_json::from_str(text)
        .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))?;
    let defaults = Options::default();
    let options = match doc.options {
        Some(o) => Options {
            tol: o.tol.unwrap_or(defaults.tol),
            grid_step: o.grid_step.unwrap_or(defaults.grid_step),
            seed: o.seed.unwrap_or(defaults.seed),
        },
        None => defaults,
    };
    let queues = doc
        .queues
        .into_iter()
        .enumerate()
        .map(|(i, q)| QueueSpec { id: q.id.unwrap_or(i + 1), mu: q.mu, t_start: q.t_start })
        .collect();
    let populations = doc
        .populations
        .into_iter()
        .enumerate()
        .map(|(i, p)| PopulationSpec {
            id: p.id.unwrap_or(i + 1),
            alpha: p.alpha,
            beta: p.beta,
            mass: p.mass.unwrap_or(1.0),
        })
        .collect();
    Scenario::new(queues, populations, options)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub feasible: bool,
    /// Ids of queues that receive no users at equilibrium.
    pub pruned_queues: Vec<usize>,
    pub surviving_queues: Vec<usize>,
    pub messages: Vec<String>,
}

/// Terminal service time when `mass` is served at full capacity by the first
/// `count` queues (normalized frame).
pub(crate) fn terminal_time(s: &Scenario, count: usize, mass: f64) -> f64 {
    let (rate, weighted) =
        (0..count).fold((0.0, 0.0), |(r, w), k| (r + s.queues[k].mu, w + s.queues[k].mu * s.start(k)));
    (mass + weighted) / rate
}

/// Prunes the latest-opening queue while it opens no earlier than the time
/// the remaining queues would finish serving everyone, then checks the
/// population ordering hypotheses.
pub fn validate_scenario(s: &Scenario) -> ValidationReport {
    let mass = s.total_mass();
    let mut count = s.queues.len();
    let mut messages = Vec::new();
    while count > 1 {
        let without_last = terminal_time(s, count - 1, mass);
        let last = s.start(count - 1);
        if last >= without_last {
            messages.push(format!(
                "queue {} pruned: opens at {} but the earlier queues finish at {}",
                s.queues[count - 1].id,
                last + s.origin(),
                without_last + s.origin()
            ));
            count -= 1;
        } else {
            break;
        }
    }
    let mut feasible = true;
    let gammas = s.gammas();
    for (w, pair) in gammas.windows(2).enumerate() {
        if pair[0] == pair[1] {
            feasible = false;
            messages.push(format!(
                "populations {} and {} share gamma = {}; the multi-population solver needs strictly ordered gammas",
                s.populations[w].id,
                s.populations[w + 1].id,
                pair[0]
            ));
        }
    }
    for p in &s.populations {
        if p.alpha == 0.0 {
            feasible = false;
            messages.push(format!(
                "population {} has alpha = 0: zero waiting cost admits no bounded equilibrium support",
                p.id
            ));
        }
    }
    ValidationReport {
        feasible,
        pruned_queues: s.queues[count..].iter().map(|q| q.id).collect(),
        surviving_queues: s.queues[..count].iter().map(|q| q.id).collect(),
        messages,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_document() {
        let s = parse_scenario(r#"{"queues":[{"mu":1,"t_start":0}],"populations":[{"alpha":1,"beta":1}]}"#).unwrap();
        assert_eq!(s.queues.len(), 1);
        assert_eq!(s.populations.len(), 1);
        assert_eq!(s.populations[0].gamma(), 0.5);
        assert_eq!(s.populations[0].mass, 1.0);
        assert_eq!(s.options, Options::default());
    }

    #[test]
    fn sorts_queues_by_start() {
        let s = parse_scenario(
            r#"{"queues":[{"mu":2,"t_start":3},{"mu":1,"t_start":1},{"mu":1,"t_start":2}],
                "populations":[{"alpha":1,"beta":1}]}"#,
        )
        .unwrap();
        let ids: Vec<_> = s.queues.iter().map(|q| q.id).collect();
        assert_eq!(ids, vec![2, 3, 1]);
        assert_eq!(s.origin(), 1.0);
        assert_eq!(s.starts(), vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn negative_rate_names_field() {
        let err =
            parse_scenario(r#"{"queues":[{"mu":-1,"t_start":0}],"populations":[{"alpha":1,"beta":1}]}"#).unwrap_err();
        match err {
            Error::Domain { field, .. } => assert!(field.contains("mu"), "{field}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_weights_and_starts() {
        for doc in [
            r#"{"queues":[{"mu":1,"t_start":-1}],"populations":[{"alpha":1,"beta":1}]}"#,
            r#"{"queues":[{"mu":1,"t_start":0}],"populations":[{"alpha":-1,"beta":1}]}"#,
            r#"{"queues":[{"mu":1,"t_start":0}],"populations":[{"alpha":1,"beta":0}]}"#,
            r#"{"queues":[{"mu":1,"t_start":0}],"populations":[{"alpha":1,"beta":1,"mass":0}]}"#,
        ] {
            assert!(matches!(parse_scenario(doc), Err(Error::Domain { .. })), "{doc}");
        }
    }

    #[test]
    fn unknown_keys_and_bad_json_are_parse_errors() {
        let err = parse_scenario(r#"{"queues":[{"mu":1,"t_start":0,"rate":2}],"populations":[{"alpha":1,"beta":1}]}"#)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
        let err = parse_scenario("{\n  \"queues\": [\n  oops").unwrap_err();
        match err {
            Error::Parse { locus, .. } => assert!(locus.starts_with("line 3"), "{locus}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma_of(1.0, 1.0).unwrap(), 0.5);
        assert_eq!(gamma_of(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(gamma_of(3.0, 1.0).unwrap(), 0.75);
        assert!(gamma_of(0.0, 0.0).is_err());
    }

    #[test]
    fn round_trip_document() {
        let s = parse_scenario(
            r#"{"queues":[{"mu":0.3,"t_start":1.7},{"mu":1.1,"t_start":0.1}],
                "populations":[{"alpha":3,"beta":1,"mass":2.5},{"alpha":1,"beta":2}],
                "options":{"seed":7}}"#,
        )
        .unwrap();
        let again = parse_scenario(&s.to_document()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn pruning_examples() {
        let s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 1.0)]).unwrap();
        let r = validate_scenario(&s);
        assert!(r.feasible && r.pruned_queues.is_empty());

        let s = Scenario::simple(&[(1.0, 0.0), (1.0, 2.0)], &[(1.0, 1.0)]).unwrap();
        let r = validate_scenario(&s);
        assert_eq!(r.pruned_queues, vec![2]);
        assert_eq!(r.surviving_queues, vec![1]);

        let s = Scenario::simple(&[(1.0, 0.0), (1.0, 0.5)], &[(1.0, 1.0)]).unwrap();
        let r = validate_scenario(&s);
        assert!(r.pruned_queues.is_empty());
        assert_eq!(terminal_time(&s, 2, 1.0), 0.75);
    }

    #[test]
    fn pruning_is_idempotent() {
        let s = Scenario::simple(&[(1.0, 0.0), (0.5, 0.9), (1.0, 1.2), (2.0, 5.0)], &[(1.0, 1.0)]).unwrap();
        let pruned = s.pruned().unwrap();
        assert!(pruned.queues.len() < s.queues.len());
        assert!(validate_scenario(&pruned).pruned_queues.is_empty());
    }

    #[test]
    fn equal_gammas_are_reported() {
        let s = Scenario::simple(&[(1.0, 0.0)], &[(1.0, 1.0), (2.0, 2.0)]).unwrap();
        let r = validate_scenario(&s);
        assert!(!r.feasible);
        assert_eq!(r.messages.len(), 1);
    }
}
