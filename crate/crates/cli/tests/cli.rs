use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chaoslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chaoslab"))
        .args(args)
        .env("CHAOSLAB_JOBS", "2")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = chaoslab(args);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn spectrum_writes_histogram_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let stdout = ok(&[
        "spectrum", "--model", "ising", "--L", "10", "--hx", "1", "--hz", "0.48", "--J", "0.8", "--sector", "even",
        "--trim", "0.05", "--out", p(&out),
    ]);
    assert!(stdout.contains("mean_r"));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "bin_center,empirical,poisson,goe");
    assert_eq!(csv.lines().count(), 21);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.meta.json")).unwrap()).unwrap();
    let r = meta["mean_r"].as_f64().unwrap();
    assert!((0.3..0.6).contains(&r));
    assert_eq!(meta["sector"], "even");
    assert_eq!(meta["dim"], 528);
}

#[test]
fn echo_csv_is_deterministic_in_the_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&[
            "echo", "--model", "xxz", "--L", "5", "--Jxy", "1", "--Jz", "1", "--eps", "0.5", "--defect", "2", "--T", "4",
            "--dt", "0.5", "--estimator", "mc", "--samples", "40", "--seed", "11", "--jobs", jobs, "--out", p(&out),
        ]);
        fs::read(out).unwrap()
    };
    let a = run("1", "a.csv");
    assert_eq!(a, run("3", "b.csv"));
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,value,estimator,std_error,seed");
    assert_eq!(text.lines().count(), 1 + 9);
}

#[test]
fn exact_echo_starts_at_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e.csv");
    ok(&[
        "echo", "--model", "ising", "--L", "4", "--hz", "0.5", "--J", "1", "--T", "2", "--dt", "1", "--out", p(&out),
    ]);
    let text = fs::read_to_string(out).unwrap();
    let first: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert!((first[1].parse::<f64>().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(first[2], "exact_pauli");
}

#[test]
fn purity_and_ptm_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let purity = dir.path().join("p.csv");
    ok(&[
        "purity", "--model", "heisenberg", "--L", "5", "--h", "2", "--T", "3", "--dt", "0.5", "--N", "3", "--seed", "4",
        "--out", p(&purity),
    ]);
    assert_eq!(fs::read_to_string(&purity).unwrap().lines().count(), 1 + 7);

    let ptm = dir.path().join("m.csv");
    ok(&["ptm", "--model", "ising", "--L", "4", "--hz", "0.5", "--J", "1", "--T", "1", "--dt", "0.5", "--out", p(&ptm)]);
    let text = fs::read_to_string(&ptm).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 18);
    assert_eq!(header[17], "bloch_volume");
    for line in text.lines().skip(1) {
        let r00: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((r00 - 1.0).abs() < 1e-12);
    }
}

#[test]
fn validation_failures_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let missing = chaoslab(&["echo", "--model", "ising", "--L", "4", "--hz", "1", "--out", p(&out)]);
    assert!(!missing.status.success());
    assert!(String::from_utf8_lossy(&missing.stderr).contains("--J"));

    let wrong_sector = chaoslab(&[
        "spectrum", "--model", "ising", "--L", "8", "--hz", "1", "--J", "1", "--sector", "nup=2", "--out", p(&out),
    ]);
    assert!(!wrong_sector.status.success());

    let too_big = chaoslab(&[
        "echo", "--model", "ising", "--L", "5", "--hz", "1", "--J", "1", "--estimator", "design", "--T", "1", "--out", p(&out),
    ]);
    assert!(too_big.status.success());
    let design_limit = chaoslab(&[
        "echo", "--model", "ising", "--L", "7", "--hz", "1", "--J", "1", "--estimator", "design", "--T", "1", "--out", p(&out),
    ]);
    assert!(!design_limit.status.success());

    let bad_jobs = chaoslab(&[
        "echo", "--model", "ising", "--L", "4", "--hz", "1", "--J", "1", "--jobs", "0", "--out", p(&out),
    ]);
    assert!(!bad_jobs.status.success());
}

#[test]
fn sweep_resumes_and_scan_writes_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"model": "ising", "axes": [{"name": "hz", "values": [0.5, 1.0]}], "fixed": {"j": 1},
            "l_dynamics": 4, "l_spectrum": 8, "n_states": 3, "t_max": 4, "dt": 0.5}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    ok(&["sweep", "--config", p(&cfg), "--jobs", "2", "--out", p(&out)]);
    let first = fs::read(out.join("records.csv")).unwrap();
    assert!(out.join("metadata.json").exists() && out.join("manifest.jsonl").exists());
    ok(&["sweep", "--config", p(&cfg), "--jobs", "1", "--out", p(&out)]);
    assert_eq!(first, fs::read(out.join("records.csv")).unwrap());

    let scan_cfg = dir.path().join("scan.json");
    fs::write(
        &scan_cfg,
        r#"{"model": "heisenberg", "axes": [{"name": "h", "values": [0.5, 6]}], "n_realizations": 2,
            "l_dynamics": 4, "l_spectrum": 8, "n_states": 2, "t_max": 3, "dt": 0.5}"#,
    )
    .unwrap();
    let scan_out = dir.path().join("scan");
    ok(&["scan-disorder", "--config", p(&scan_cfg), "--out", p(&scan_out)]);
    let agg = fs::read_to_string(scan_out.join("aggregates.csv")).unwrap();
    assert_eq!(agg.lines().count(), 3);
    assert!(agg.starts_with("grid_index,h,n_ok,"));

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"model": "ising", "axes": [], "bogus": 1}"#).unwrap();
    assert!(!chaoslab(&["sweep", "--config", p(&bad), "--out", p(&dir.path().join("b"))]).status.success());
}
