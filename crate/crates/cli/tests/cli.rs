use std::process::{Command, Output};

fn qcons(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcons"))
        .args(args)
        .output()
        .expect("spawn qcons")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn graph_report() {
    let o = qcons(&["graph", "--graph", "cycle:5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["m"], 5);
    assert_eq!(v["diameter"], 2);
    assert_eq!(v["assumption_holds"], true);
}

#[test]
fn malformed_spec_is_usage_error() {
    let o = qcons(&["exact", "--graph", "cyc:5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("cyc"), "{}", stderr(&o));

    let o = qcons(&["exact", "--graph", "cycle:4", "--what", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn virtual_process_on_star_is_usage_error() {
    let o = qcons(&["exact", "--graph", "star:5", "--process", "virtual"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exact_meeting_csv() {
    let o = qcons(&["exact", "--graph", "cycle:4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("# schema=1"));
    assert_eq!(lines.next(), Some("x,y,value"));
    assert!(out.contains("\n0,2,7\n"));
}

#[test]
fn simulate_is_deterministic_per_seed() {
    let args = ["simulate", "--graph", "lollipop:12", "--x-set", "0,11", "--runs", "20", "--seed", "5"];
    let a = qcons(&args);
    let b = qcons(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    let c = qcons(&["simulate", "--graph", "lollipop:12", "--x-set", "0,11", "--runs", "20", "--seed", "6"]);
    assert_ne!(stdout(&a), stdout(&c));
}

#[test]
fn walkers_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let o = qcons(&[
        "walkers",
        "--graph",
        "cycle:4",
        "--trials",
        "500",
        "--start",
        "0,2",
        "--start",
        "0,1",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    let body = std::fs::read_to_string(&path).unwrap();
    assert_eq!(body.lines().count(), 4);
}

#[test]
fn refined_eigen_bound_flag_does_not_fail() {
    let o = qcons(&["spectral", "--graph", "cycle:4", "--what", "lemma7"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("flag"));
    let o = qcons(&["spectral", "--graph", "cycle:6", "--what", "lemma7"]);
    assert!(stderr(&o).is_empty());
}

#[test]
fn cycle_formula_flags_exit_zero() {
    let o = qcons(&["bounds", "--family", "cycle", "--n-range", "4..6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4,7,cycle_formula,5.25,true"));
    assert!(stderr(&o).contains("n=4"));
}

#[test]
fn bounds_graph_json() {
    let o = qcons(&["bounds", "--graph", "cycle:5"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let checks = v["sandwich"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|c| c["violated"] == false));
}

#[test]
fn bounds_needs_graph_or_family() {
    assert_eq!(qcons(&["bounds"]).status.code(), Some(2));
    assert_eq!(qcons(&["bounds", "--family", "line"]).status.code(), Some(2));
}

#[test]
fn sweep_small_exact() {
    let o = qcons(&["sweep", "--families", "line,star", "--n-range", "3..6", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2 + 8);
}

#[test]
fn suite_on_named_graphs() {
    let o = qcons(&["suite", "--graph", "cycle:5", "--graph", "petersen"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# schema=1\n"));
}

#[test]
fn suite_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.toml");
    std::fs::write(
        &cfg,
        "[experiment]\nkind = \"sweep\"\nseed = 3\nout_dir = \"results\"\nformat = \"csv\"\n\n[sweep]\nfamilies = [\"line\"]\nn_min = 3\nn_max = 5\nmode = \"exact\"\n",
    )
    .unwrap();
    let o = qcons(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let written = std::fs::read_to_string(dir.path().join("results/sweep.csv")).unwrap();
    assert_eq!(written, stdout(&o));

    std::fs::write(&cfg, "[experiment]\nkind = \"sweep\"\n").unwrap();
    let o = qcons(&["suite", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tv_schedule_file() {
    let dir = tempfile::tempdir().unwrap();
    let sched = dir.path().join("s.txt");
    std::fs::write(&sched, "# alternating\ncycle:6\nsemi_regular:n=6,k=2\n").unwrap();
    let s = sched.to_str().unwrap();
    let o = qcons(&["tv", "--schedule", s, "meet", "--trials", "200", "--start", "0,3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["within_bound"], true);

    let o = qcons(&["tv", "--schedule", s, "mix", "--horizon", "20", "--start", "0,0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 2 + 20);

    let o = qcons(&["tv", "--schedule", s, "mix", "--start", "0,9"]);
    assert_eq!(o.status.code(), Some(2));
}
