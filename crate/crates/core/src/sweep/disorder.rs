use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{run_sweep, ModelKind, RunOptions, SweepConfig, SweepRecord};
use crate::error::{Error, Result};

pub const AGGREGATES_FILE: &str = "aggregates.csv";

/// Disorder statistics at one grid point. Deviations are `1 − P̄` and
/// `1 − echo`; spreads are sample standard deviations over realizations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderAggregate {
    pub grid_index: usize,
    pub coords: Vec<f64>,
    pub n_ok: usize,
    pub mean_r: Option<f64>,
    pub mean_r_std: Option<f64>,
    pub impurity: Option<f64>,
    pub impurity_std: Option<f64>,
    pub echo_deviation: Option<f64>,
    pub echo_deviation_std: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct DisorderScan {
    pub records: Vec<SweepRecord>,
    pub aggregates: Vec<DisorderAggregate>,
}

fn mean_std(values: &[f64]) -> (Option<f64>, Option<f64>) {
    match values.len() {
        0 => (None, None),
        1 => (Some(values[0]), None),
        n => {
            let m = values.iter().sum::<f64>() / n as f64;
            let var = values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            (Some(m), Some(var.sqrt()))
        }
    }
}

pub fn aggregate(cfg: &SweepConfig, records: &[SweepRecord]) -> Vec<DisorderAggregate> {
    (0..cfg.grid_len())
        .map(|g| {
            let ok: Vec<&SweepRecord> = records.iter().filter(|r| r.grid_index == g && r.error.is_none()).collect();
            let col = |f: &dyn Fn(&SweepRecord) -> Option<f64>| ok.iter().filter_map(|r| f(r)).collect::<Vec<_>>();
            let (mean_r, mean_r_std) = mean_std(&col(&|r| r.mean_r));
            let (impurity, impurity_std) = mean_std(&col(&|r| r.purity.map(|p| 1.0 - p)));
            let (echo_deviation, echo_deviation_std) = mean_std(&col(&|r| r.echo.map(|e| 1.0 - e)));
            DisorderAggregate {
                grid_index: g,
                coords: cfg.grid_point(g),
                n_ok: ok.len(),
                mean_r,
                mean_r_std,
                impurity,
                impurity_std,
                echo_deviation,
                echo_deviation_std,
            }
        })
        .collect()
}

/// Runs a random-field Heisenberg sweep over disorder strengths and
/// aggregates it over realizations. Writes `aggregates.csv` next to the
/// sweep outputs.
pub fn run_disorder_scan(cfg: &SweepConfig, opts: &RunOptions) -> Result<DisorderScan> {
    if cfg.model != ModelKind::Heisenberg {
        return Err(Error::Config("disorder scans need the heisenberg model".into()));
    }
    if cfg.n_realizations < 2 {
        return Err(Error::Config("disorder scans need at least 2 realizations".into()));
    }
    let out = run_sweep(cfg, opts)?;
    let aggregates = aggregate(cfg, &out.records);
    if let Some(dir) = &opts.out_dir {
        let f = std::fs::File::create(dir.join(AGGREGATES_FILE))?;
        write_aggregates_csv(std::io::BufWriter::new(f), cfg, &aggregates)?;
    }
    Ok(DisorderScan {
        records: out.records,
        aggregates,
    })
}

pub fn write_aggregates_csv<W: Write>(out: W, cfg: &SweepConfig, aggregates: &[DisorderAggregate]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let mut header = vec!["grid_index".to_string()];
    header.extend(cfg.axes.iter().map(|a| a.name.clone()));
    header.extend(
        [
            "n_ok",
            "mean_r",
            "mean_r_std",
            "impurity",
            "impurity_std",
            "echo_deviation",
            "echo_deviation_std",
        ]
        .map(String::from),
    );
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for a in aggregates {
        let mut row = vec![a.grid_index.to_string()];
        row.extend(a.coords.iter().map(f64::to_string));
        row.extend([
            a.n_ok.to_string(),
            opt(a.mean_r),
            opt(a.mean_r_std),
            opt(a.impurity),
            opt(a.impurity_std),
            opt(a.echo_deviation),
            opt(a.echo_deviation_std),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
