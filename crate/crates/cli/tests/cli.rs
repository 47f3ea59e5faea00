use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const CONFIG: &str = "\
[grid]
N = 2
L = 4
n_x = 8
v_max = 4
n_v = 8
[kernel]
gamma = -1/2
angular_nodes = 8
[solver]
T = 1/2
dt = 1/8
picard_tol = 1e-10
[experiment]
data = gaussian:amp=0.1,sx=0.8,sv=1
max_horizon = 1
";

fn kinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinlab"))
        .args(["--threads", "1"])
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.ini");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn admissible_reports_json() {
    let out = kinlab(&["admissible", "--N", "2", "--q", "5", "--r", "5/2", "--p", "5/3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["admissible"], true);
    assert_eq!(v["a"], "2");
}

#[test]
fn infeasible_region_is_header_only() {
    let out = kinlab(&["region", "--N", "3", "--gamma", "0", "--mode", "equality"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(stdout(&out), "inv_p,inv_r,inv_q,a\n");
    let out = kinlab(&["region", "--N", "2", "--gamma", "-1/2", "--mode", "strict", "--denominator", "40"]);
    let body = stdout(&out);
    assert!(body.lines().count() > 1);
    for line in body.lines().skip(1) {
        assert_eq!(line.split(',').count(), 4);
    }
}

#[test]
fn validation_errors_exit_one() {
    let out = kinlab(&["simulate", "--config", "no/such/run.ini", "--out", "unused"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("no/such/run.ini"));
    assert_eq!(code(&kinlab(&["simulate", "--bogus"])), 1);
    assert_eq!(code(&kinlab(&["admissible", "--N", "2", "--q", "1/2", "--r", "2", "--p", "2"])), 1);

    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "[grid]\nnx = 8\n");
    let out = kinlab(&["simulate", "--config", &bad, "--data", "gaussian", "--out", "unused"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("nx"));
}

#[test]
fn simulate_writes_documented_outputs_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let runs: Vec<_> = ["a", "b"].iter().map(|n| dir.path().join(n)).collect();
    for run in &runs {
        let out = kinlab(&["simulate", "--config", &cfg, "--out", run.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let a = &runs[0];
    assert_eq!(header(&a.join("traces.csv")), "t,norm_a,norm_rp");
    assert_eq!(header(&a.join("picard.csv")), "iter,delta,ratio");
    let traces = fs::read_to_string(a.join("traces.csv")).unwrap();
    assert_eq!(traces.lines().count(), 1 + 5);
    let summary = json(&a.join("summary.json"));
    assert_eq!(summary["config"]["kernel"]["gamma"], "-1/2");
    assert_eq!(summary["config"]["kernel"]["epsilon"], 0.5);
    assert_eq!(summary["config"]["solver"]["a"], "2");
    assert_eq!(summary["results"]["converged"], true);
    for name in ["traces.csv", "picard.csv", "snapshots/f_00000.csv", "snapshots/f_00004.csv"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(runs[1].join(name)).unwrap(),
            "{name} differs between identical runs"
        );
    }
}

#[test]
fn non_convergence_exits_two_with_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("picard_tol = 1e-10", "picard_tol = 1e-10\nmax_iters = 2"));
    let run = dir.path().join("run");
    let out = kinlab(&["simulate", "--config", &cfg, "--out", run.to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert_eq!(json(&run.join("summary.json"))["results"]["converged"], false);
    assert_eq!(fs::read_to_string(run.join("picard.csv")).unwrap().lines().count(), 3);
}

#[test]
fn scatter_then_wave_recovers_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let sc = dir.path().join("sc");
    let out = kinlab(&["scatter", "--config", &cfg, "--out", sc.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(header(&sc.join("defect.csv")), "t,defect");
    let summary = json(&sc.join("summary.json"));
    assert!(summary["results"]["relative_final_defect"].as_f64().unwrap() < 0.05);

    let wv = dir.path().join("wv");
    let fplus = sc.join("f_plus.csv");
    let out = kinlab(&["wave", "--config", &cfg, "--fplus", fplus.to_str().unwrap(), "--out", wv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let w = json(&wv.join("summary.json"));
    assert_eq!(w["config"]["solver"]["T"], summary["results"]["scattering"]["horizon"]);

    let recovered = wv.join("f0.csv");
    let original = sc.join("snapshots/f_00000.csv");
    let norm = |p: &Path| {
        let out = kinlab(&["norm", "--snapshot", p.to_str().unwrap(), "--q", "5", "--r", "5/2", "--p", "5/3"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        v["snapshots"][0]["norm_a"].as_f64().unwrap()
    };
    let (a, b) = (norm(&recovered), norm(&original));
    assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
}

#[test]
fn wave_rejects_mismatched_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let sim = dir.path().join("sim");
    assert_eq!(code(&kinlab(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()])), 0);
    let other = write_config(dir.path(), &CONFIG.replace("n_v = 8", "n_v = 12"));
    let snap = sim.join("snapshots/f_00000.csv");
    let out = kinlab(&["wave", "--config", &other, "--fplus", snap.to_str().unwrap(), "--out", "unused"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("inconsistent grid metadata"));
}

#[test]
fn stream_and_norm_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let sim = dir.path().join("sim");
    assert_eq!(code(&kinlab(&["simulate", "--config", &cfg, "--out", sim.to_str().unwrap()])), 0);
    let snap = sim.join("snapshots/f_00000.csv");
    let moved = dir.path().join("moved.csv");
    // Δx = 1/2 and Δv = 1, so t = 1 is an exact whole-cell shift.
    let out = kinlab(&["stream", "--snapshot", snap.to_str().unwrap(), "--t", "1", "--out", moved.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(header(&moved).contains("\"t\":1.0"));
    let out = kinlab(&[
        "norm", "--snapshot", snap.to_str().unwrap(), "--snapshot", moved.to_str().unwrap(),
        "--q", "5", "--r", "5/2", "--p", "5/3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let a0 = v["snapshots"][0]["norm_a"].as_f64().unwrap();
    let a1 = v["snapshots"][1]["norm_a"].as_f64().unwrap();
    assert!((a0 - a1).abs() <= 1e-12 * a0);
    assert!(v["time_norm"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_bounds_reports_levels() {
    let out = kinlab(&[
        "verify-bounds", "--which", "loss", "--N", "2", "--gamma", "-1/2", "--pv", "2", "--qv", "2", "--rv", "4",
        "--samples", "4", "--resolutions", "8,12", "--seed", "3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["levels"].as_array().unwrap().len(), 2);
    assert_eq!(v["seed"], 3);
    let out = kinlab(&[
        "verify-bounds", "--which", "gain", "--N", "2", "--gamma", "-1/2", "--pv", "2", "--qv", "2", "--rv", "2",
    ]);
    assert_eq!(code(&out), 1, "exponent relation violated must be rejected");
}

#[test]
fn random_data_depends_on_seed_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CONFIG.replace("T = 1/2", "T = 1/8"));
    let run = |name: &str, seed: &str| {
        let out_dir = dir.path().join(name);
        let out = kinlab(&[
            "simulate", "--config", &cfg, "--data", "random:amp=0.01", "--seed", seed, "--out", out_dir.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        fs::read(out_dir.join("snapshots/f_00000.csv")).unwrap()
    };
    let (a, b, c) = (run("a", "1"), run("b", "1"), run("c", "2"));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(json(&dir.path().join("a/summary.json"))["config"]["experiment"]["seed"], 1);
}
