use std::fs;
use std::process::{Command, Output};

fn hetnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetnet"))
        .args(args)
        .env("HETNET_WORKERS", "2")
        .output()
        .expect("spawn hetnet")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sweep_writes_csv_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = hetnet(&[
        "sweep",
        "--sweep-values",
        "10,20",
        "--trials",
        "3",
        "--output-path",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(data[0].starts_with("strategy,trial_seed,sweep_variable,sweep_value,trial,"));
    assert_eq!(data.len(), 1 + 2 * 3 * 5);
    assert!(dir.path().join("run_summary.csv").exists());
    assert!(dir.path().join("run_trace_amwee.csv").exists());
    assert!(dir.path().join("run_trace_eeauf.csv").exists());

    let v = hetnet(&["validate", "--csv", out.to_str().unwrap()]);
    assert!(v.status.success());
    assert!(stdout(&v).contains("30 rows checked, 0 invalid"));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    fs::write(&cfg, "# small run\ntrials = 1\nsweep_values = 5\nstrategies = MARA, AMWEE\n").unwrap();
    let o = hetnet(&["trial", "--config", cfg.to_str().unwrap(), "--strategies", "EEAUF"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("EEAUF,"));
    assert!(rows[0].contains(",users_per_macrocell,5,0,"));
}

#[test]
fn trial_replays_from_saved_topology() {
    let dir = tempfile::tempdir().unwrap();
    let topo = dir.path().join("t.tsv");
    let links = dir.path().join("l.txt");
    let first = hetnet(&[
        "trial",
        "--trial",
        "4",
        "--topology-out",
        topo.to_str().unwrap(),
        "--links-out",
        links.to_str().unwrap(),
    ]);
    assert!(first.status.success());
    assert!(fs::read_to_string(&links).unwrap().starts_with("# linktable N=5 K=10 params="));
    let replay = hetnet(&["trial", "--trial", "4", "--topology-in", topo.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&replay));
}

#[test]
fn trace_prints_columns() {
    let o = hetnet(&["trace", "--strategy", "AMWEE"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("iteration,gamma,f_value"));
    let gammas: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(gammas.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn validate_suite_passes() {
    let o = hetnet(&["validate", "--instances", "40", "--seed", "3"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("40 instances"));
}

#[test]
fn errors_exit_nonzero() {
    let bad_key = hetnet(&["trial", "--trials", "0"]);
    assert!(!bad_key.status.success());
    assert!(String::from_utf8_lossy(&bad_key.stderr).contains("trials"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "trials = 2\nno_such_key = 1\n").unwrap();
    let o = hetnet(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = hetnet(&["trial", "--topology-in", "/nonexistent/t.tsv"]);
    assert!(!missing.status.success());
    assert!(!hetnet(&["trace", "--strategy", "MARA"]).status.success());
    assert!(!hetnet(&["bogus"]).status.success());
}
