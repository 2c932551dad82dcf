use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(dir: &PathBuf, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_concert")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const WORKED: &str = r#"{"queues":[{"mu":1,"t_start":0},{"mu":1,"t_start":0.5}],"populations":[{"alpha":1,"beta":1}]}"#;

#[test]
fn equilibrium_artifact_goes_to_stdout_without_out() {
    let dir = workdir("eq_stdout");
    fs::write(dir.join("s.json"), WORKED).unwrap();
    let o = run(&dir, &["eq-single", "--scenario", "s.json", "--profile-out", "p.csv"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["T"], 0.75);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("T=0.75 "));
    let csv = fs::read_to_string(dir.join("p.csv")).unwrap();
    assert_eq!(csv, "pop,queue,a,b,density\n1,1,-0.75,0.75,0.5\n1,2,0.25,0.75,0.5\n");
}

#[test]
fn summary_goes_to_stdout_with_out() {
    let dir = workdir("eq_out");
    fs::write(dir.join("s.json"), WORKED).unwrap();
    let o = run(&dir, &["eq-multi", "--scenario", "s.json", "--out", "eq.csv", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("T=0.75 "));
    let csv = fs::read_to_string(dir.join("eq.csv")).unwrap();
    assert!(csv.starts_with("key,value\n"));
    assert!(csv.lines().any(|l| l == "T,0.75"));
}

#[test]
fn verify_and_poa_print_summaries() {
    let dir = workdir("verify_poa");
    fs::write(dir.join("s.json"), WORKED).unwrap();
    assert!(run(&dir, &["eq-single", "--scenario", "s.json", "--profile-out", "p.csv"]).status.success());
    let o = run(&dir, &["verify", "--scenario", "s.json", "--profile", "p.csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("is_equilibrium=true "));

    // a profile that is not an equilibrium still exits 0
    fs::write(dir.join("bad.csv"), "pop,queue,a,b,density\n1,1,-1,0,1\n").unwrap();
    let o = run(&dir, &["verify", "--scenario", "s.json", "--profile", "bad.csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("is_equilibrium=false "));

    let o = run(&dir, &["poa", "--scenario", "s.json", "--out", "poa.json"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "eta=1.7142857142857142, j_eq=0.75, j_opt=0.4375, bound_ok=true\n");
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("poa.json")).unwrap()).unwrap();
    assert_eq!(v["j_opt"], 0.4375);
}

#[test]
fn fluid_path_csv() {
    let dir = workdir("fluid");
    fs::write(dir.join("s.json"), WORKED).unwrap();
    let o = run(&dir, &["fluid", "--scenario", "s.json", "--queue", "1", "--process", "queue", "--format", "csv"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "# extension: constant\nt,value\n-0.75,0\n0,0.375\n0.75,0\n");
    let o = run(&dir, &["fluid", "--scenario", "s.json", "--queue", "1", "--process", "cost"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn serve_count_reports_ties() {
    let dir = workdir("serve");
    let o = run(&dir, &["serve-count", "--l", "1", "--mu", "1", "--tau", "0.1", "--k", "10"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["ties"], serde_json::json!([4, 5]));
}

#[test]
fn two_user_trace() {
    let dir = workdir("two");
    let args = ["eq-two", "--mu1", "1", "--mu2", "1", "--alpha", "1", "--beta", "1", "--trace", "t.csv"];
    let o = run(&dir, &args);
    assert!(o.status.success());
    let trace = fs::read_to_string(dir.join("t.csv")).unwrap();
    assert!(trace.starts_with("t,f,p1,P11,P21,cost\n"));
    assert!(trace.lines().count() > 10);
}

#[test]
fn simulate_writes_paths_and_summary() {
    let dir = workdir("sim");
    // shifted openings exercise the frame conversion
    fs::write(dir.join("s.json"), r#"{"queues":[{"mu":1,"t_start":5}],"populations":[{"alpha":1,"beta":1}]}"#).unwrap();
    let o =
        run(&dir, &["simulate", "--scenario", "s.json", "--n", "50", "--reps", "2", "--seed", "3", "--out", "sim.csv"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.join("sim.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("rep,t,queue,A_scaled,Q_scaled,B,W"));
    assert_eq!(lines.count(), 2 * 512);
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("sim.csv.summary.json")).unwrap()).unwrap();
    assert_eq!(v["fluid_first_arrival"], 4.0);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["replications"].as_array().unwrap().len(), 2);
}

#[test]
fn exit_codes() {
    let dir = workdir("exit");
    let o = run(&dir, &["eq-single", "--scenario", "missing.json"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(dir.join("bad.json"), "{not json").unwrap();
    let o = run(&dir, &["eq-single", "--scenario", "bad.json"]);
    assert_eq!(o.status.code(), Some(2));
    fs::write(
        dir.join("two.json"),
        r#"{"queues":[{"mu":1,"t_start":0}],"populations":[{"alpha":1,"beta":3},{"alpha":1,"beta":1}]}"#,
    )
    .unwrap();
    let o = run(&dir, &["eq-single", "--scenario", "two.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("hypothesis"));
    let o = run(&dir, &["serve-count", "--l", "0", "--mu", "1", "--tau", "0.1", "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&dir, &["poa"]);
    assert_eq!(o.status.code(), Some(2));
}
