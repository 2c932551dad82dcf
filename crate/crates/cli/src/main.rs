//! `concert`: command-line access to equilibrium solvers, the verifier,
//! price-of-anarchy reports, the two-user game, fluid paths and the
//! simulator.
//!
//! Exit codes: 0 on success, 1 when the model rejects the inputs (domain,
//! hypothesis, infeasibility), 2 on I/O, parse or usage errors.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use concert_core::exact_two::{solve_two_user, two_user_diagnostics};
use concert_core::fluid::FluidQueue;
use concert_core::io::{equilibrium_json, fmt_num, path_json, read_profile_csv, write_path_csv, write_profile_csv};
use concert_core::poa::{optimal_serve_count, poa_multi};
use concert_core::sim::{convergence_report, run_replications, ServiceDist, SimConfig};
use concert_core::{
    parse_scenario, solve_multi, solve_single, verify_equilibrium, ArrivalProfile, Error, PiecewisePath, Scenario,
};

#[derive(Parser)]
#[command(name = "concert", version, about = "Strategic arrivals into parallel FIFO queues")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Artifact destination; without it the artifact goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance (defaults to the scenario's `options.tol`).
    #[arg(long)]
    tol: Option<f64>,
    /// RNG seed (defaults to the scenario's `options.seed`).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Equilibrium of a single population.
    EqSingle {
        #[arg(long)]
        scenario: PathBuf,
        /// Also write the profile as `pop,queue,a,b,density` CSV.
        #[arg(long)]
        profile_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Equilibrium of several populations.
    EqMulti {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        profile_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Two users, two queues opening at 0.
    EqTwo {
        #[arg(long)]
        mu1: f64,
        #[arg(long)]
        mu2: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        #[arg(long, default_value_t = 1e-4)]
        ode_dt: f64,
        #[arg(long, default_value_t = 1e-2)]
        grid_step: f64,
        /// Write `t,f,p1,P11,P21,cost` rows here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Best-response check of a profile.
    Verify {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long)]
        grid_step: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Price of anarchy.
    Poa {
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Number of equal-rate queues that minimizes a population's service end.
    ServeCount {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        mu: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long = "k")]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// One fluid process of one queue as an exact piecewise-linear path.
    Fluid {
        #[arg(long)]
        scenario: PathBuf,
        /// Profile CSV; defaults to the scenario's equilibrium.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Queue id.
        #[arg(long)]
        queue: usize,
        #[arg(long, value_enum, default_value = "queue")]
        process: Process,
        /// Population id, for `--process cost`.
        #[arg(long)]
        pop: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo runs compared against the fluid limit.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, value_enum, default_value = "exponential")]
        service: Service,
        /// Convergence summary JSON; defaults to `<out>.summary.json`.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Process {
    Arrivals,
    Netflow,
    Regulator,
    Queue,
    Busy,
    Wait,
    Cost,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Service {
    Exponential,
    Deterministic,
}

enum Failure {
    Model(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Model(e)
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    Ok(parse_scenario(&read(path)?)?)
}

fn load_profile(s: &Scenario, path: &Path) -> Result<ArrivalProfile, Failure> {
    Ok(read_profile_csv(s, &read(path)?)?)
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    output::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn render(v: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(v).expect("serializable");
            s.push('\n');
            s
        }
        Format::Csv => output::flatten_csv(v),
    }
}

/// Artifact to `--out` with the summary on stdout, or artifact to stdout
/// and summary on stderr.
fn emit(common: &Common, artifact: &str, summary: &str) -> Outcome {
    match &common.out {
        Some(path) => {
            write_file(path, artifact)?;
            println!("{summary}");
        }
        None => {
            print!("{artifact}");
            eprintln!("{summary}");
        }
    }
    Ok(())
}

/// Summary always on stdout; artifact only when `--out` is given.
fn report(common: &Common, artifact: &str, summary: &str) -> Outcome {
    if let Some(path) = &common.out {
        write_file(path, artifact)?;
    }
    println!("{summary}");
    Ok(())
}

fn list(xs: &[f64]) -> String {
    format!("[{}]", xs.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(","))
}

fn run(command: Command) -> Outcome {
    match command {
        Command::EqSingle { scenario, profile_out, common } => equilibrium(&scenario, profile_out, &common, false),
        Command::EqMulti { scenario, profile_out, common } => equilibrium(&scenario, profile_out, &common, true),
        Command::EqTwo { mu1, mu2, alpha, beta, ode_dt, grid_step, trace, common } => {
            let eq = solve_two_user(mu1, mu2, alpha, beta)?;
            let (diag, rows) = two_user_diagnostics(&eq, ode_dt, grid_step)?;
            if let Some(path) = trace {
                let mut csv = String::from("t,f,p1,P11,P21,cost\n");
                for r in &rows {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        fmt_num(r.t),
                        fmt_num(r.f),
                        fmt_num(r.p1),
                        fmt_num(r.p11),
                        fmt_num(r.p21),
                        fmt_num(r.cost)
                    ));
                }
                write_file(&path, &csv)?;
            }
            let v = json!({ "equilibrium": eq, "diagnostics": diag });
            let summary = format!(
                "t_first={} t_last={} cost={} normalization_residual={}",
                fmt_num(eq.t_first),
                fmt_num(eq.t_last),
                fmt_num(eq.cost),
                fmt_num(diag.normalization_residual)
            );
            emit(&common, &render(&v, common.format), &summary)
        }
        Command::Verify { scenario, profile, grid_step, common } => {
            let s = load_scenario(&scenario)?;
            let p = load_profile(&s, &profile)?;
            let tol = common.tol.unwrap_or(s.options.tol);
            let step = grid_step.unwrap_or(s.options.grid_step);
            let r = verify_equilibrium(&s, &p, step, tol)?;
            let v = serde_json::to_value(&r).expect("serializable");
            let summary = format!(
                "is_equilibrium={} max_support_cost_deviation={} min_off_support_cost_gap={}",
                r.is_equilibrium,
                fmt_num(r.max_support_cost_deviation()),
                fmt_num(r.min_off_support_cost_gap())
            );
            report(&common, &render(&v, common.format), &summary)
        }
        Command::Poa { scenario, common } => {
            let s = load_scenario(&scenario)?;
            let r = poa_multi(&s)?;
            let v = serde_json::to_value(&r).expect("serializable");
            let summary = format!(
                "eta={}, j_eq={}, j_opt={}, bound_ok={}",
                fmt_num(r.eta),
                fmt_num(r.j_eq),
                fmt_num(r.j_opt),
                r.bound_satisfied
            );
            report(&common, &render(&v, common.format), &summary)
        }
        Command::ServeCount { l, mu, tau, k, common } => {
            let r = optimal_serve_count(l, mu, tau, k)?;
            if let Some(w) = &r.warning {
                eprintln!("warning: {w}");
            }
            let v = serde_json::to_value(&r).expect("serializable");
            let summary = format!("k_star={} k_rounded={} tie={}", r.k_star, r.k_rounded, r.tie);
            emit(&common, &render(&v, common.format), &summary)
        }
        Command::Fluid { scenario, profile, queue, process, pop, common } => {
            let s = load_scenario(&scenario)?;
            let p = match profile {
                Some(path) => load_profile(&s, &path)?,
                None => solve_multi(&s)?.profile,
            };
            let k = s
                .queue_index(queue)
                .ok_or_else(|| Failure::Model(domain_error("queue", format!("unknown queue id {queue}"))))?;
            let fq = FluidQueue::new(&p, k, s.server(k));
            let path: PiecewisePath = match process {
                Process::Arrivals => fq.arrivals.clone(),
                Process::Netflow => fq.netflow.clone(),
                Process::Regulator => fq.regulator.clone(),
                Process::Queue => fq.queue.clone(),
                Process::Busy => fq.busy.clone(),
                Process::Wait => fq.wait.clone(),
                Process::Cost => {
                    let id = pop.ok_or_else(|| Failure::Input("--process cost needs --pop".into()))?;
                    let j = s
                        .population_index(id)
                        .ok_or_else(|| Failure::Model(domain_error("pop", format!("unknown population id {id}"))))?;
                    let pspec = &s.populations[j];
                    // values stay in the normalized frame, like the equilibrium costs
                    fq.cost(pspec.alpha, pspec.beta)
                }
            };
            let artifact = match common.format {
                Format::Csv => write_path_csv(&path, s.origin()),
                Format::Json => render(&path_json(&path, s.origin()), Format::Json),
            };
            let summary = format!("queue={queue} breakpoints={}", path.len());
            emit(&common, &artifact, &summary)
        }
        Command::Simulate { scenario, profile, n, reps, service, summary, common } => {
            let s = load_scenario(&scenario)?;
            let p = match profile {
                Some(path) => load_profile(&s, &path)?,
                None => solve_multi(&s)?.profile,
            };
            let out = common.out.clone().ok_or_else(|| Failure::Input("simulate needs --out".into()))?;
            let mut cfg = SimConfig::new(n, common.seed.unwrap_or(s.options.seed));
            cfg.replications = reps;
            cfg.service_dist = match service {
                Service::Exponential => ServiceDist::Exponential,
                Service::Deterministic => ServiceDist::Deterministic,
            };
            let runs = run_replications(&s, &p, &cfg)?;
            let mut conv = convergence_report(&s, &p, &cfg)?;
            let o = s.origin();
            let mut csv = String::from("rep,t,queue,A_scaled,Q_scaled,B,W\n");
            for run in &runs {
                for (k, q) in run.scaled.iter().enumerate() {
                    for (i, t) in conv.grid.iter().enumerate() {
                        csv.push_str(&format!(
                            "{},{},{},{},{},{},{}\n",
                            run.replication,
                            fmt_num(t + o),
                            s.queues[k].id,
                            fmt_num(q.arrivals[i]),
                            fmt_num(q.queue[i]),
                            fmt_num(q.busy[i]),
                            fmt_num(q.wait[i])
                        ));
                    }
                }
            }
            write_file(&out, &csv)?;
            let summary_path = summary.unwrap_or_else(|| {
                let mut name = out.as_os_str().to_owned();
                name.push(".summary.json");
                PathBuf::from(name)
            });
            // report times in the scenario's own frame, like the CSV
            conv.grid.iter_mut().for_each(|t| *t += o);
            conv.fluid_first_arrival = conv.fluid_first_arrival.map(|t| t + o);
            for r in &mut conv.replications {
                r.first_arrival = r.first_arrival.map(|t| t + o);
            }
            let mut v = serde_json::to_value(&conv).expect("serializable");
            v["origin"] = json!(o);
            v["seed"] = json!(cfg.seed);
            write_file(&summary_path, &render(&v, Format::Json))?;
            println!(
                "n={} reps={} mean_queue_error={} mean_arrival_error={} mean_busy_error={} mean_wait_error={}",
                n,
                reps,
                fmt_num(conv.mean.queue_length),
                fmt_num(conv.mean.arrivals),
                fmt_num(conv.mean.busy),
                fmt_num(conv.mean.wait)
            );
            Ok(())
        }
    }
}

fn domain_error(field: &str, message: String) -> Error {
    Error::Domain { field: field.to_string(), message }
}

fn equilibrium(scenario: &Path, profile_out: Option<PathBuf>, common: &Common, multi: bool) -> Outcome {
    let s = load_scenario(scenario)?;
    let eq = if multi { solve_multi(&s)? } else { solve_single(&s)? };
    if let Some(path) = profile_out {
        write_file(&path, &write_profile_csv(&s, &eq.profile))?;
    }
    let v = equilibrium_json(&s, &eq);
    let routing: Vec<f64> = eq.routing.iter().map(|row| row.iter().sum()).collect();
    let summary = format!(
        "T={} first_arrival={} costs={} population_masses={}",
        fmt_num(eq.terminal_time() + s.origin()),
        fmt_num(eq.first_arrival() + s.origin()),
        list(&eq.costs),
        list(&routing)
    );
    emit(common, &render(&v, common.format), &summary)
}
