//! The Choi echo of a probe spin: single-environment values, Haar averages
//! over product environments, time series and time averages, plus the
//! averaged subsystem purity used as a state-based baseline.

mod haar;
mod purity;
mod single;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use haar::{
    haar_echo_design, haar_echo_exact, haar_echo_mc, haar_echo_pauli_sum, DEFAULT_MAX_EXACT_SITES,
    MAX_DESIGN_SITES,
};
pub use purity::{PurityAverage, PuritySeries};
pub use single::{choi_echo_paths, choi_echo_protocol, choi_echo_single_env, EchoPaths};

use crate::channel::{choi_from_unitary, propagator, Environment, QubitChannel};
use crate::error::{Error, Result};
use crate::spectra::EigenDecomposition;
use crate::spinops::{random_product_state, ComplexMatrix};

/// Slack on the `[1/4, 1]` echo bounds.
pub const BOUND_SLACK: f64 = 1e-9;
pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_DT: f64 = 0.1;

pub(crate) struct CheckedUnitary {
    pub length: usize,
}

pub(crate) fn check_probe(u: &ComplexMatrix, probe_site: usize) -> Result<CheckedUnitary> {
    let dim = u.dim();
    if dim < 4 || !dim.is_power_of_two() {
        return Err(Error::DimensionMismatch(format!(
            "dimension {dim} is not a chain of at least two qubits"
        )));
    }
    let length = dim.trailing_zeros() as usize;
    if probe_site == 0 || probe_site > length {
        return Err(Error::InvalidSite {
            site: probe_site,
            length,
        });
    }
    Ok(CheckedUnitary { length })
}

/// How the environment average of the echo is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Estimator {
    /// Exact Haar average over product environments.
    ExactPauli,
    MonteCarlo { samples: usize, seed: u64 },
    /// Exact average over products of Pauli eigenstates (short chains only).
    DesignEnum,
    /// One random product environment.
    SingleEnv { seed: u64 },
}

impl Estimator {
    pub fn seed(&self) -> Option<u64> {
        match self {
            Estimator::MonteCarlo { seed, .. } | Estimator::SingleEnv { seed } => Some(*seed),
            _ => None,
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Estimator::ExactPauli => write!(f, "exact_pauli"),
            Estimator::MonteCarlo { samples, .. } => write!(f, "monte_carlo({samples})"),
            Estimator::DesignEnum => write!(f, "design_enum"),
            Estimator::SingleEnv { .. } => write!(f, "single_env"),
        }
    }
}

/// Parses `exact`, `design`, `mc:<samples>:<seed>` or `single:<seed>`.
impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<u64> {
            parts
                .get(i)
                .ok_or_else(|| Error::Config(format!("estimator '{s}' is missing a field")))?
                .parse()
                .map_err(|_| Error::Config(format!("bad number in estimator '{s}'")))
        };
        match parts[0] {
            "exact" | "exact_pauli" if parts.len() == 1 => Ok(Estimator::ExactPauli),
            "design" | "design_enum" if parts.len() == 1 => Ok(Estimator::DesignEnum),
            "mc" | "monte_carlo" if parts.len() == 3 => Ok(Estimator::MonteCarlo {
                samples: num(1)? as usize,
                seed: num(2)?,
            }),
            "single" | "single_env" if parts.len() == 2 => Ok(Estimator::SingleEnv { seed: num(1)? }),
            _ => Err(Error::Config(format!("unknown estimator '{s}'"))),
        }
    }
}

/// Uniform grid `0, T/n, ..., T` with the largest step not exceeding `dt`.
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::OutOfRange {
            name: "t_max",
            value: t_max,
            range: "(0, inf)",
        });
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::OutOfRange {
            name: "dt",
            value: dt,
            range: "(0, inf)",
        });
    }
    let n = ((t_max / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n).map(|i| t_max * i as f64 / n as f64).collect())
}

/// Trapezoid-rule mean of `values` over `[times[0], times[last]]`.
pub fn trapezoid_average(times: &[f64], values: &[f64]) -> Result<f64> {
    if times.len() != values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} times for {} values",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::TooFewSamples {
            have: times.len(),
            need: 2,
        });
    }
    let span = times[times.len() - 1] - times[0];
    if span <= 0.0 {
        return Err(Error::Validation("time grid must be ascending".into()));
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (v[0] + v[1]) * (t[1] - t[0]))
        .sum();
    Ok(integral / span)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EchoSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
    pub estimator: Estimator,
}

impl EchoSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>, std_errors: Option<Vec<f64>>, estimator: Estimator) -> Result<Self> {
        if times.len() != values.len() || std_errors.as_ref().is_some_and(|e| e.len() != times.len()) {
            return Err(Error::DimensionMismatch("series columns differ in length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Validation("series times must be strictly ascending".into()));
        }
        if let Some(&bad) = values
            .iter()
            .find(|v| !(0.25 - BOUND_SLACK..=1.0 + BOUND_SLACK).contains(*v))
        {
            return Err(Error::OutOfRange {
                name: "Choi echo",
                value: bad,
                range: "[1/4, 1]",
            });
        }
        Ok(Self {
            times,
            values,
            std_errors,
            estimator,
        })
    }

    pub fn time_average(&self) -> Result<f64> {
        trapezoid_average(&self.times, &self.values)
    }
}

/// Writes `t,value,estimator,std_error,seed`; absent fields are left empty.
pub fn write_echo_csv<W: Write>(out: W, series: &EchoSeries) -> Result<()> {
    let label = series.estimator.to_string();
    let seed = series.estimator.seed().map(|s| s.to_string()).unwrap_or_default();
    let rows = series.times.iter().zip(&series.values).enumerate().map(|(i, (t, v))| {
        let se = series.std_errors.as_ref().map(|e| e[i].to_string()).unwrap_or_default();
        [t.to_string(), v.to_string(), label.clone(), se, seed.clone()]
    });
    write_series(out, rows)
}

pub fn write_purity_csv<W: Write>(out: W, series: &PuritySeries) -> Result<()> {
    let label = format!("purity({})", series.n_states);
    let rows = series.times.iter().zip(&series.values).map(|(t, v)| {
        [t.to_string(), v.to_string(), label.clone(), String::new(), series.seed.to_string()]
    });
    write_series(out, rows)
}

fn write_series<W: Write>(out: W, rows: impl Iterator<Item = [String; 5]>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value", "estimator", "std_error", "seed"])?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reduced dynamics of one probe site under `e^{-iHt}`.
#[derive(Clone, Copy, Debug)]
pub struct ProbeDynamics<'a> {
    eig: &'a EigenDecomposition,
    length: usize,
    probe_site: usize,
    max_exact_sites: usize,
}

impl<'a> ProbeDynamics<'a> {
    pub fn new(eig: &'a EigenDecomposition, probe_site: usize) -> Result<Self> {
        let length = eig
            .num_sites()
            .filter(|&l| l >= 2)
            .ok_or_else(|| Error::DimensionMismatch(format!("dimension {} is not a qubit chain", eig.dim())))?;
        if probe_site == 0 || probe_site > length {
            return Err(Error::InvalidSite {
                site: probe_site,
                length,
            });
        }
        Ok(Self {
            eig,
            length,
            probe_site,
            max_exact_sites: DEFAULT_MAX_EXACT_SITES,
        })
    }

    pub fn with_max_exact_sites(mut self, limit: usize) -> Self {
        self.max_exact_sites = limit;
        self
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn probe_site(&self) -> usize {
        self.probe_site
    }

    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        propagator(self.eig, t)
    }

    pub fn channel(&self, t: f64, env: Environment<'_>) -> Result<QubitChannel> {
        choi_from_unitary(&self.propagator(t), env, self.probe_site)
    }

    pub fn choi_echo_single_env(&self, t: f64, env: Environment<'_>) -> Result<f64> {
        choi_echo_single_env(&self.propagator(t), env, self.probe_site)
    }

    pub fn haar_choi_echo_exact(&self, t: f64) -> Result<f64> {
        haar_echo_exact(&self.propagator(t), self.probe_site, self.max_exact_sites)
    }

    pub fn haar_choi_echo_mc(&self, t: f64, samples: usize, seed: u64) -> Result<(f64, f64)> {
        haar_echo_mc(&self.propagator(t), self.probe_site, samples, seed)
    }

    pub fn haar_choi_echo_design(&self, t: f64) -> Result<f64> {
        haar_echo_design(&self.propagator(t), self.probe_site)
    }

    /// Rejects estimator choices that cannot run at this chain length.
    pub fn check_estimator(&self, estimator: Estimator) -> Result<()> {
        match estimator {
            Estimator::ExactPauli if self.length > self.max_exact_sites => Err(Error::Size {
                what: "exact Haar average (use the monte_carlo estimator)",
                requested: self.length,
                limit: self.max_exact_sites,
            }),
            Estimator::DesignEnum if self.length > MAX_DESIGN_SITES => Err(Error::Size {
                what: "design enumeration",
                requested: self.length,
                limit: MAX_DESIGN_SITES,
            }),
            Estimator::MonteCarlo { samples, .. } if samples < 2 => {
                Err(Error::TooFewSamples { have: samples, need: 2 })
            }
            _ => Ok(()),
        }
    }

    pub fn echo_series(&self, times: &[f64], estimator: Estimator) -> Result<EchoSeries> {
        self.check_estimator(estimator)?;
        let single_env = match estimator {
            Estimator::SingleEnv { seed } => Some(random_product_state(self.length - 1, seed)?),
            _ => None,
        };
        let points: Vec<(f64, Option<f64>)> = times
            .par_iter()
            .map(|&t| {
                let u = self.propagator(t);
                let p = self.probe_site;
                Ok(match estimator {
                    Estimator::ExactPauli => (haar::twirled_echo(&u, self.length, p), None),
                    Estimator::DesignEnum => (haar_echo_design(&u, p)?, None),
                    Estimator::MonteCarlo { samples, seed } => {
                        let (m, se) = haar_echo_mc(&u, p, samples, seed)?;
                        (m, Some(se))
                    }
                    Estimator::SingleEnv { .. } => {
                        let env = single_env.as_ref().expect("drawn above");
                        (choi_echo_single_env(&u, Environment::Pure(env.amplitudes()), p)?, None)
                    }
                })
            })
            .collect::<Result<_>>()?;
        let values = points.iter().map(|p| p.0).collect();
        let std_errors = matches!(estimator, Estimator::MonteCarlo { .. })
            .then(|| points.iter().map(|p| p.1.unwrap_or(0.0)).collect());
        EchoSeries::new(times.to_vec(), values, std_errors, estimator)
    }

    /// Trapezoid-rule time average of the echo over `[0, t_max]`.
    pub fn time_averaged_choi_echo(&self, t_max: f64, dt: f64, estimator: Estimator) -> Result<f64> {
        self.echo_series(&time_grid(t_max, dt)?, estimator)?.time_average()
    }
}
