//! Parameter sweeps over a model grid with deterministic per-task seeds.
//!
//! A sweep splits into independent tasks, one spectral and one dynamical
//! task per (grid point, realization). Results are written sorted by grid
//! index, so the records CSV does not depend on execution order or worker
//! count. Completed tasks are appended to a manifest in the output
//! directory and skipped when the same configuration is run again.

mod config;
mod disorder;
mod output;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{Axis, Metric, ModelKind, SweepConfig};
pub use disorder::{aggregate, run_disorder_scan, write_aggregates_csv, DisorderAggregate, DisorderScan, AGGREGATES_FILE};
pub use output::{write_records_csv, Manifest, RunMetadata, MANIFEST_FILE, METADATA_FILE, RECORDS_FILE};

use crate::echo::{Estimator, ProbeDynamics, BOUND_SLACK};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::spectra::{eigh, spacing_ratios};

/// Environment variable consulted for the worker count.
pub const JOBS_ENV: &str = "CHAOSLAB_JOBS";

/// Worker count from an explicit flag, then `CHAOSLAB_JOBS`, then the
/// number of available cores.
pub fn resolve_jobs(flag: Option<usize>) -> Result<usize> {
    let jobs = match flag {
        Some(n) => n,
        None => match std::env::var(JOBS_ENV) {
            Ok(v) => v
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{JOBS_ENV}='{v}' is not a positive integer")))?,
            Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
    };
    if jobs == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    Ok(jobs)
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Directory for records, metadata and manifest. Nothing is written
    /// when absent.
    pub out_dir: Option<PathBuf>,
    pub jobs: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Spectrum,
    Dynamics,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskKey {
    pub grid_index: usize,
    pub realization: usize,
    pub kind: TaskKind,
}

/// Outcome of one task, as stored in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    pub key: TaskKey,
    pub mean_r: Option<f64>,
    pub n_levels: Option<usize>,
    pub purity: Option<f64>,
    pub echo: Option<f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub grid_index: usize,
    pub coords: Vec<f64>,
    pub realization: usize,
    pub seed: u64,
    pub mean_r: Option<f64>,
    pub n_levels: Option<usize>,
    /// Time- and trajectory-averaged probe purity.
    pub purity: Option<f64>,
    /// Time-averaged Choi echo.
    pub echo: Option<f64>,
    pub error: Option<String>,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub tasks_run: usize,
    pub tasks_resumed: usize,
}

impl SweepConfig {
    /// Seed of grid point `grid_index`, realization `realization`.
    pub fn task_seed(&self, grid_index: usize, realization: usize) -> u64 {
        derive_seed(self.base_seed, &[grid_index as u64, realization as u64])
    }

    fn task_keys(&self) -> Vec<TaskKey> {
        let mut keys = Vec::new();
        for grid_index in 0..self.grid_len() {
            for realization in 0..self.n_realizations {
                if self.wants(Metric::MeanR) {
                    keys.push(TaskKey {
                        grid_index,
                        realization,
                        kind: TaskKind::Spectrum,
                    });
                }
                if self.wants_dynamics() {
                    keys.push(TaskKey {
                        grid_index,
                        realization,
                        kind: TaskKind::Dynamics,
                    });
                }
            }
        }
        keys
    }

    fn task_estimator(&self, seed: u64) -> Estimator {
        match self.estimator {
            Estimator::MonteCarlo { samples, .. } => Estimator::MonteCarlo {
                samples,
                seed: derive_seed(seed, &[2]),
            },
            Estimator::SingleEnv { .. } => Estimator::SingleEnv {
                seed: derive_seed(seed, &[3]),
            },
            other => other,
        }
    }
}

fn in_bounds(name: &str, value: f64, lo: f64, hi: f64) -> Result<f64> {
    if value < lo - BOUND_SLACK || value > hi + BOUND_SLACK || !value.is_finite() {
        return Err(Error::Validation(format!("{name} = {value} outside [{lo}, {hi}]")));
    }
    Ok(value)
}

fn run_task(cfg: &SweepConfig, key: TaskKey) -> TaskResult {
    let start = Instant::now();
    let mut result = TaskResult {
        key,
        mean_r: None,
        n_levels: None,
        purity: None,
        echo: None,
        error: None,
        wall_time_s: 0.0,
    };
    let seed = cfg.task_seed(key.grid_index, key.realization);
    let outcome = match key.kind {
        TaskKind::Spectrum => spectrum_task(cfg, key.grid_index, seed, &mut result),
        TaskKind::Dynamics => dynamics_task(cfg, key.grid_index, seed, &mut result),
    };
    if let Err(e) = outcome {
        log::warn!("task {key:?} failed: {e}");
        result.error = Some(e.to_string());
    }
    result.wall_time_s = start.elapsed().as_secs_f64();
    result
}

fn spectrum_task(cfg: &SweepConfig, grid_index: usize, seed: u64, out: &mut TaskResult) -> Result<()> {
    let h = cfg.hamiltonian(grid_index, cfg.l_spectrum, seed, cfg.defect_site_spectrum)?;
    let stats = spacing_ratios(&h.sector_levels(cfg.sector())?, cfg.trim)?;
    out.mean_r = Some(in_bounds("mean_r", stats.mean_r, 0.0, 1.0)?);
    out.n_levels = Some(stats.n_levels_used);
    Ok(())
}

fn dynamics_task(cfg: &SweepConfig, grid_index: usize, seed: u64, out: &mut TaskResult) -> Result<()> {
    let h = cfg.hamiltonian(grid_index, cfg.l_dynamics, seed, cfg.defect_site_dynamics)?;
    let eig = eigh(&h.to_dense()?)?;
    let dynamics = ProbeDynamics::new(&eig, cfg.probe_site)?;
    if cfg.wants(Metric::Purity) {
        let p = dynamics.averaged_subsystem_purity(cfg.n_states, cfg.t_max, cfg.dt, derive_seed(seed, &[1]))?;
        out.purity = Some(in_bounds("purity", p.mean, 0.5, 1.0)?);
    }
    if cfg.wants(Metric::Echo) {
        let e = dynamics.time_averaged_choi_echo(cfg.t_max, cfg.dt, cfg.task_estimator(seed))?;
        out.echo = Some(in_bounds("echo", e, 0.25, 1.0)?);
    }
    Ok(())
}

fn assemble(cfg: &SweepConfig, results: &BTreeMap<TaskKey, TaskResult>) -> Vec<SweepRecord> {
    let mut records = Vec::new();
    for grid_index in 0..cfg.grid_len() {
        for realization in 0..cfg.n_realizations {
            let mut rec = SweepRecord {
                grid_index,
                coords: cfg.grid_point(grid_index),
                realization,
                seed: cfg.task_seed(grid_index, realization),
                mean_r: None,
                n_levels: None,
                purity: None,
                echo: None,
                error: None,
                wall_time_s: 0.0,
            };
            let mut errors = Vec::new();
            for kind in [TaskKind::Spectrum, TaskKind::Dynamics] {
                let key = TaskKey {
                    grid_index,
                    realization,
                    kind,
                };
                if let Some(r) = results.get(&key) {
                    rec.mean_r = rec.mean_r.or(r.mean_r);
                    rec.n_levels = rec.n_levels.or(r.n_levels);
                    rec.purity = rec.purity.or(r.purity);
                    rec.echo = rec.echo.or(r.echo);
                    rec.wall_time_s += r.wall_time_s;
                    if let Some(e) = &r.error {
                        errors.push(format!("{kind:?}: {e}").to_lowercase());
                    }
                }
            }
            if !errors.is_empty() {
                rec.error = Some(errors.join("; "));
            }
            records.push(rec);
        }
    }
    records
}

/// Validates the configuration, runs every outstanding task and, when an
/// output directory is given, writes the records CSV, run metadata and
/// manifest there. Per-task failures are recorded and do not stop the run.
pub fn run_sweep(cfg: &SweepConfig, opts: &RunOptions) -> Result<SweepOutput> {
    cfg.validate()?;
    let jobs = resolve_jobs(opts.jobs)?;
    let start = Instant::now();

    let manifest = match &opts.out_dir {
        Some(dir) => Some(Manifest::open(dir, cfg)?),
        None => None,
    };
    let mut results: BTreeMap<TaskKey, TaskResult> = manifest
        .as_ref()
        .map(|m| m.completed().iter().map(|r| (r.key, r.clone())).collect())
        .unwrap_or_default();
    let resumed = results.len();
    let pending: Vec<TaskKey> = cfg.task_keys().into_iter().filter(|k| !results.contains_key(k)).collect();
    log::info!(
        "{} tasks ({} resumed) on {jobs} worker(s)",
        pending.len() + resumed,
        resumed
    );

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let sink = manifest.map(Mutex::new);
    let fresh: Vec<TaskResult> = pool.install(|| {
        pending
            .par_iter()
            .map(|&key| {
                let r = run_task(cfg, key);
                if let Some(m) = &sink {
                    let mut m = m.lock().unwrap_or_else(|p| p.into_inner());
                    if let Err(e) = m.append(&r) {
                        log::error!("cannot update manifest: {e}");
                    }
                }
                r
            })
            .collect()
    });
    let tasks_run = fresh.len();
    results.extend(fresh.into_iter().map(|r| (r.key, r)));
    let records = assemble(cfg, &results);

    if let Some(dir) = &opts.out_dir {
        write_outputs(dir, cfg, &records, jobs, start.elapsed().as_secs_f64())?;
    }
    Ok(SweepOutput {
        records,
        tasks_run,
        tasks_resumed: resumed,
    })
}

fn write_outputs(dir: &Path, cfg: &SweepConfig, records: &[SweepRecord], jobs: usize, wall: f64) -> Result<()> {
    let file = std::fs::File::create(dir.join(RECORDS_FILE))?;
    write_records_csv(std::io::BufWriter::new(file), cfg, records)?;
    RunMetadata::new(cfg, records, jobs, wall)?.write(&dir.join(METADATA_FILE))
}
