//! Text formats: profile CSV, path CSV and equilibrium JSON.
//!
//! External files use scenario ids and the scenario's original time frame;
//! the normalized frame stays internal.

use serde_json::{json, Value};

use crate::equilibrium::EquilibriumProfile;
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::path::{Extension, PiecewisePath};
use crate::profile::{ArrivalProfile, Segment};

pub const PROFILE_HEADER: &str = "pop,queue,a,b,density";

/// Shortest decimal that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x}")
}

/// One row per segment: population id, queue id, start, end, density.
pub fn write_profile_csv(s: &Scenario, profile: &ArrivalProfile) -> String {
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for g in profile.segments() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.populations[g.population].id,
            s.queues[g.queue].id,
            fmt_num(g.start + s.origin()),
            fmt_num(g.end + s.origin()),
            fmt_num(g.density)
        ));
    }
    out
}

pub fn read_profile_csv(s: &Scenario, text: &str) -> Result<ArrivalProfile> {
    let mut segments = Vec::new();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let locus = format!("line {}", i + 1);
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !header_seen {
            if line.replace(' ', "") != PROFILE_HEADER {
                return Err(Error::parse(locus, format!("expected header `{PROFILE_HEADER}`")));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::parse(locus, format!("expected 5 fields, got {}", fields.len())));
        }
        let id =
            |f: &str, what: &str| f.parse::<usize>().map_err(|e| Error::parse(locus.clone(), format!("{what}: {e}")));
        let num =
            |f: &str, what: &str| f.parse::<f64>().map_err(|e| Error::parse(locus.clone(), format!("{what}: {e}")));
        let pop_id = id(fields[0], "pop")?;
        let queue_id = id(fields[1], "queue")?;
        let population = s
            .population_index(pop_id)
            .ok_or_else(|| Error::parse(locus.clone(), format!("unknown population id {pop_id}")))?;
        let queue = s
            .queue_index(queue_id)
            .ok_or_else(|| Error::parse(locus.clone(), format!("unknown queue id {queue_id}")))?;
        segments.push(Segment {
            population,
            queue,
            start: num(fields[2], "a")? - s.origin(),
            end: num(fields[3], "b")? - s.origin(),
            density: num(fields[4], "density")?,
        });
    }
    if !header_seen {
        return Err(Error::parse("line 1", format!("missing header `{PROFILE_HEADER}`")));
    }
    ArrivalProfile::new(s.queues.len(), s.populations.len(), segments)
}

/// Breakpoints as `t,value` rows, shifted by `origin`, preceded by a comment
/// describing the extension outside them.
pub fn write_path_csv(path: &PiecewisePath, origin: f64) -> String {
    let ext = match path.extension() {
        Extension::Constant => "# extension: constant".to_string(),
        Extension::Linear { left, right } => {
            format!("# extension: linear left_slope={} right_slope={}", fmt_num(left), fmt_num(right))
        }
    };
    let mut out = format!("{ext}\nt,value\n");
    for (t, v) in path.breakpoints().iter().zip(path.values()) {
        out.push_str(&format!("{},{}\n", fmt_num(t + origin), fmt_num(*v)));
    }
    out
}

/// Path as JSON with breakpoints in the original frame.
pub fn path_json(path: &PiecewisePath, origin: f64) -> Value {
    let ts: Vec<f64> = path.breakpoints().iter().map(|t| t + origin).collect();
    json!({
        "breakpoints": ts,
        "values": path.values(),
        "extension": path.extension(),
    })
}

/// Equilibrium summary keyed by scenario ids, times in the original frame.
pub fn equilibrium_json(s: &Scenario, eq: &EquilibriumProfile) -> Value {
    let o = s.origin();
    let shift = |v: &[f64]| v.iter().map(|t| t + o).collect::<Vec<f64>>();
    let qid = |k: usize| s.queues[k].id;
    let populations: Vec<Value> = s
        .populations
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let routing: Vec<Value> =
                eq.routing[i].iter().enumerate().map(|(k, m)| json!({"queue": qid(k), "mass": m})).collect();
            json!({
                "id": p.id,
                "gamma": p.gamma(),
                "cost": eq.costs[i],
                "arrival_window": [eq.epochs[i] + o, eq.epochs[i + 1] + o],
                "service_end": eq.service_epochs[i + 1] + o,
                "serve_set": eq.serve_sets[i].iter().map(|&k| qid(k)).collect::<Vec<_>>(),
                "routing": routing,
            })
        })
        .collect();
    let queues: Vec<Value> = s
        .queues
        .iter()
        .enumerate()
        .map(|(k, q)| {
            json!({
                "id": q.id,
                "mu": q.mu,
                "t_start": q.t_start,
                "first_arrival": eq.first_arrivals[k].map(|t| t + o),
                "mass": eq.profile.queue_mass(k),
            })
        })
        .collect();
    let segments: Vec<Value> = eq
        .profile
        .segments()
        .iter()
        .map(|g| {
            json!({
                "pop": s.populations[g.population].id,
                "queue": qid(g.queue),
                "a": g.start + o,
                "b": g.end + o,
                "density": g.density,
            })
        })
        .collect();
    json!({
        "origin": o,
        "first_arrival": eq.first_arrival() + o,
        "T": eq.terminal_time() + o,
        "epochs": shift(&eq.epochs),
        "service_epochs": shift(&eq.service_epochs),
        "populations": populations,
        "queues": queues,
        "pruned_queues": eq.pruned_queues,
        "sweeps": eq.sweeps,
        "segments": segments,
    })
}
