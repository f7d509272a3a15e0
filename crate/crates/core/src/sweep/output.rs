use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SweepConfig, SweepRecord, TaskResult};
use crate::echo::time_grid;
use crate::error::{Error, Result};

pub const RECORDS_FILE: &str = "records.csv";
pub const METADATA_FILE: &str = "metadata.json";
pub const MANIFEST_FILE: &str = "manifest.jsonl";

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Columns: `grid_index`, one per axis, `realization, seed, mean_r,
/// n_levels, purity, echo, trim_fraction, dt, estimator, error`.
pub fn write_records_csv<W: Write>(out: W, cfg: &SweepConfig, records: &[SweepRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["grid_index".to_string()];
    header.extend(cfg.axes.iter().map(|a| a.name.clone()));
    header.extend(
        [
            "realization",
            "seed",
            "mean_r",
            "n_levels",
            "purity",
            "echo",
            "trim_fraction",
            "dt",
            "estimator",
            "error",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    let estimator = cfg.estimator.to_string();
    for r in records {
        let mut row = vec![r.grid_index.to_string()];
        row.extend(r.coords.iter().map(f64::to_string));
        row.extend([
            r.realization.to_string(),
            r.seed.to_string(),
            opt(r.mean_r),
            opt(r.n_levels),
            opt(r.purity),
            opt(r.echo),
            cfg.trim.to_string(),
            cfg.dt.to_string(),
            estimator.clone(),
            r.error.clone().unwrap_or_default(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TimeGridInfo {
    pub t_max: f64,
    pub dt: f64,
    pub n_points: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TaskSeed {
    pub grid_index: usize,
    pub realization: usize,
    pub seed: u64,
}

/// Everything needed to reproduce a run, plus timings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub config: SweepConfig,
    pub sector: String,
    pub trim_fraction: f64,
    pub time_grid: TimeGridInfo,
    pub seeds: Vec<TaskSeed>,
    pub n_records: usize,
    pub n_failed: usize,
    pub jobs: usize,
    pub wall_time_s: f64,
    pub record_wall_time_s: Vec<f64>,
}

impl RunMetadata {
    pub fn new(cfg: &SweepConfig, records: &[SweepRecord], jobs: usize, wall_time_s: f64) -> Result<Self> {
        Ok(Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: cfg.clone(),
            sector: cfg.sector().to_string(),
            trim_fraction: cfg.trim,
            time_grid: TimeGridInfo {
                t_max: cfg.t_max,
                dt: cfg.dt,
                n_points: time_grid(cfg.t_max, cfg.dt)?.len(),
            },
            seeds: records
                .iter()
                .map(|r| TaskSeed {
                    grid_index: r.grid_index,
                    realization: r.realization,
                    seed: r.seed,
                })
                .collect(),
            n_records: records.len(),
            n_failed: records.iter().filter(|r| r.error.is_some()).count(),
            jobs,
            wall_time_s,
            record_wall_time_s: records.iter().map(|r| r.wall_time_s).collect(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ManifestHeader {
    config: SweepConfig,
}

/// Append-only log of finished tasks. The first line holds the
/// configuration; each further line is one [`TaskResult`]. Failed tasks are
/// logged but not treated as complete.
#[derive(Debug)]
pub struct Manifest {
    path: PathBuf,
    file: File,
    completed: Vec<TaskResult>,
}

impl Manifest {
    /// Opens or creates the manifest in `dir`. An existing manifest written
    /// for a different configuration is an error.
    pub fn open(dir: &Path, cfg: &SweepConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let path = dir.join(MANIFEST_FILE);
        let mut completed = Vec::new();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            let mut lines = reader.lines();
            match lines.next().transpose()? {
                Some(first) => {
                    let header: ManifestHeader = serde_json::from_str(&first)?;
                    if &header.config != cfg {
                        return Err(Error::Config(format!(
                            "{} was written for a different configuration",
                            path.display()
                        )));
                    }
                }
                None => {
                    fs::remove_file(&path)?;
                    return Self::open(dir, cfg);
                }
            }
            for line in lines {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                // A torn final line from an interrupted run is skipped.
                if let Ok(r) = serde_json::from_str::<TaskResult>(&line) {
                    if r.error.is_none() {
                        completed.retain(|c: &TaskResult| c.key != r.key);
                        completed.push(r);
                    }
                }
            }
            let file = OpenOptions::new().append(true).open(&path)?;
            let mut m = Self { path, file, completed };
            // Terminate a possibly torn line.
            m.file.write_all(b"\n")?;
            m.file.flush()?;
            return Ok(m);
        }
        let mut file = File::create(&path)?;
        serde_json::to_writer(&mut file, &ManifestHeader { config: cfg.clone() })?;
        file.write_all(b"\n")?;
        file.flush()?;
        Ok(Self { path, file, completed })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn completed(&self) -> &[TaskResult] {
        &self.completed
    }

    pub fn append(&mut self, result: &TaskResult) -> Result<()> {
        let mut line = serde_json::to_vec(result)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.flush()?;
        Ok(())
    }
}
