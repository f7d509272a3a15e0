use std::fs;
use std::path::Path;

use chaoslab::sweep::{run_sweep, RunOptions, SweepConfig, MANIFEST_FILE, RECORDS_FILE};

const ISING_MC: &str = r#"{
    "model": "ising",
    "axes": [{"name": "hz", "values": [0.48, 1.446]}, {"name": "j", "values": [0.8, 0.05]}],
    "l_dynamics": 5, "l_spectrum": 10, "n_states": 4, "t_max": 6, "dt": 0.5,
    "estimator": {"kind": "monte_carlo", "samples": 20, "seed": 0},
    "base_seed": 17
}"#;

const HEISENBERG: &str = r#"{
    "model": "heisenberg",
    "axes": [{"name": "h", "values": [0.5, 4]}],
    "n_realizations": 3,
    "l_dynamics": 5, "l_spectrum": 10, "n_states": 3, "t_max": 5, "dt": 0.5,
    "base_seed": 5
}"#;

fn run(cfg: &SweepConfig, dir: &Path, jobs: usize) -> Vec<u8> {
    run_sweep(
        cfg,
        &RunOptions {
            out_dir: Some(dir.to_path_buf()),
            jobs: Some(jobs),
        },
    )
    .unwrap();
    fs::read(dir.join(RECORDS_FILE)).unwrap()
}

#[test]
fn records_do_not_depend_on_worker_count() {
    for text in [ISING_MC, HEISENBERG] {
        let cfg = SweepConfig::from_json(text).unwrap();
        let tmp = tempfile::tempdir().unwrap();
        let one = run(&cfg, &tmp.path().join("one"), 1);
        let eight = run(&cfg, &tmp.path().join("eight"), 8);
        assert_eq!(one, eight);
    }
}

#[test]
fn records_respect_bounds() {
    for text in [ISING_MC, HEISENBERG] {
        let cfg = SweepConfig::from_json(text).unwrap();
        let out = run_sweep(&cfg, &RunOptions::default()).unwrap();
        for r in &out.records {
            assert!(r.error.is_none(), "{:?}", r.error);
            assert!((0.0..=1.0).contains(&r.mean_r.unwrap()));
            assert!((0.5 - 1e-9..=1.0 + 1e-9).contains(&r.purity.unwrap()));
            assert!((0.25 - 1e-9..=1.0 + 1e-9).contains(&r.echo.unwrap()));
        }
    }
}

#[test]
fn resumed_run_equals_single_shot() {
    let cfg = SweepConfig::from_json(HEISENBERG).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let single = run(&cfg, &tmp.path().join("single"), 2);

    let dir = tmp.path().join("resumed");
    run(&cfg, &dir, 2);
    // Simulate an interruption: keep the header and three tasks, then a torn line.
    let manifest = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest).unwrap();
    let mut kept: Vec<&str> = text.lines().take(4).collect();
    let torn = &text.lines().nth(4).unwrap()[..10];
    kept.push(torn);
    fs::write(&manifest, kept.join("\n")).unwrap();
    fs::remove_file(dir.join(RECORDS_FILE)).unwrap();

    let out = run_sweep(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.clone()),
            jobs: Some(1),
        },
    )
    .unwrap();
    assert_eq!(out.tasks_resumed, 3);
    assert_eq!(out.tasks_run, 2 * 3 * 2 - 3);
    assert_eq!(fs::read(dir.join(RECORDS_FILE)).unwrap(), single);

    let again = run_sweep(
        &cfg,
        &RunOptions {
            out_dir: Some(dir.clone()),
            jobs: Some(1),
        },
    )
    .unwrap();
    assert_eq!(again.tasks_run, 0);
    assert_eq!(fs::read(dir.join(RECORDS_FILE)).unwrap(), single);
}

#[test]
fn manifest_from_another_configuration_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SweepConfig::from_json(HEISENBERG).unwrap();
    run(&cfg, tmp.path(), 1);
    let mut other = cfg.clone();
    other.base_seed += 1;
    let err = run_sweep(
        &other,
        &RunOptions {
            out_dir: Some(tmp.path().to_path_buf()),
            jobs: Some(1),
        },
    );
    assert!(matches!(err, Err(chaoslab::Error::Config(_))));
}
