use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::echo::{time_grid, Estimator, DEFAULT_DT, DEFAULT_MAX_EXACT_SITES, DEFAULT_T_MAX, MAX_DESIGN_SITES};
use crate::error::{Error, Result};
use crate::models::{
    default_defect_site, mixed_field_ising, random_field_heisenberg, xxz_defect, HeisenbergParams, IsingParams,
    SpinHamiltonian, XxzDefectParams, MAX_DENSE_SITES,
};
use crate::spectra::DEFAULT_TRIM;
use crate::spinops::{Parity, SectorKind, MAX_SECTOR_SITES};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Ising,
    Heisenberg,
    #[serde(alias = "xxz")]
    XxzDefect,
}

impl ModelKind {
    /// Accepted parameter names with their defaults (`None` = required).
    pub fn parameters(self) -> &'static [(&'static str, Option<f64>)] {
        match self {
            ModelKind::Ising => &[("hx", Some(1.0)), ("hz", None), ("j", None)],
            ModelKind::Heisenberg => &[("h", None)],
            ModelKind::XxzDefect => &[("jxy", None), ("jz", Some(1.0)), ("eps", None)],
        }
    }

    pub fn default_sector(self, length: usize) -> SectorKind {
        match self {
            ModelKind::Ising => SectorKind::Parity(Parity::Even),
            ModelKind::Heisenberg | ModelKind::XxzDefect => SectorKind::Magnetization { n_up: length / 2 },
        }
    }

    /// Grid used when a configuration gives no axes.
    pub fn default_axes(self) -> Vec<Axis> {
        let range = |start: f64, step: f64, n: usize| (0..n).map(|k| start + step * k as f64).collect::<Vec<_>>();
        let axis = |name: &str, values| Axis {
            name: name.into(),
            values,
        };
        match self {
            ModelKind::Ising => {
                let mut j = vec![0.05];
                j.extend(range(0.25, 0.25, 8));
                vec![axis("hz", range(0.0, 0.25, 13)), axis("j", j)]
            }
            ModelKind::Heisenberg => vec![axis("h", vec![0.5, 1.0, 2.0, 4.0, 6.0])],
            ModelKind::XxzDefect => vec![axis("jxy", range(0.1, 0.1, 20)), axis("eps", range(0.0, 0.1, 16))],
        }
    }

    pub fn is_disordered(self) -> bool {
        self == ModelKind::Heisenberg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanR,
    Purity,
    Echo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

fn default_l_dynamics() -> usize {
    7
}
fn default_l_spectrum() -> usize {
    12
}
fn default_probe_site() -> usize {
    1
}
fn default_n_states() -> usize {
    50
}
fn default_t_max() -> f64 {
    DEFAULT_T_MAX
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_realizations() -> usize {
    1
}
fn default_estimator() -> Estimator {
    Estimator::ExactPauli
}
fn default_metrics() -> Vec<Metric> {
    vec![Metric::MeanR, Metric::Purity, Metric::Echo]
}
fn default_trim() -> f64 {
    DEFAULT_TRIM
}

/// JSON sweep description. Every field except `model` has a default; an
/// absent or empty `axes` list selects [`ModelKind::default_axes`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub model: ModelKind,
    /// Cartesian grid, first axis slowest.
    #[serde(default)]
    pub axes: Vec<Axis>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    #[serde(default = "default_l_dynamics")]
    pub l_dynamics: usize,
    #[serde(default = "default_l_spectrum")]
    pub l_spectrum: usize,
    /// Spectral sector; the model default when absent.
    #[serde(default)]
    pub sector: Option<SectorKind>,
    #[serde(default = "default_probe_site")]
    pub probe_site: usize,
    /// Defect sites for the XXZ chain at each length; `⌊L/2⌋` when absent.
    #[serde(default)]
    pub defect_site_dynamics: Option<usize>,
    #[serde(default)]
    pub defect_site_spectrum: Option<usize>,
    /// Trajectories per purity average.
    #[serde(default = "default_n_states")]
    pub n_states: usize,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_realizations")]
    pub n_realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// A Monte-Carlo seed given here is replaced by the per-task seed.
    #[serde(default = "default_estimator")]
    pub estimator: Estimator,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_trim")]
    pub trim: f64,
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let mut cfg: Self = serde_json::from_str(text)?;
        if cfg.axes.is_empty() {
            cfg.axes = cfg.model.default_axes();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn sector(&self) -> SectorKind {
        self.sector.unwrap_or_else(|| self.model.default_sector(self.l_spectrum))
    }

    pub fn wants(&self, metric: Metric) -> bool {
        self.metrics.contains(&metric)
    }

    pub fn wants_dynamics(&self) -> bool {
        self.wants(Metric::Purity) || self.wants(Metric::Echo)
    }

    pub fn grid_len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Axis values of grid point `index`.
    pub fn grid_point(&self, mut index: usize) -> Vec<f64> {
        let mut coords = vec![0.0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            coords[k] = axis.values[index % axis.values.len()];
            index /= axis.values.len();
        }
        coords
    }

    /// Fixed parameters overlaid with the grid coordinates and defaults.
    pub fn parameters_at(&self, index: usize) -> Result<BTreeMap<String, f64>> {
        let mut params = self.fixed.clone();
        for (axis, value) in self.axes.iter().zip(self.grid_point(index)) {
            params.insert(axis.name.clone(), value);
        }
        for &(name, default) in self.model.parameters() {
            if !params.contains_key(name) {
                let value = default.ok_or_else(|| Error::Config(format!("parameter '{name}' is not set")))?;
                params.insert(name.to_string(), value);
            }
        }
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.axes.is_empty() {
            return bad("the grid needs at least one axis".into());
        }
        let known: Vec<&str> = self.model.parameters().iter().map(|p| p.0).collect();
        let mut seen: Vec<&str> = Vec::new();
        for axis in &self.axes {
            if axis.values.is_empty() {
                return bad(format!("axis '{}' has no values", axis.name));
            }
            if seen.contains(&axis.name.as_str()) {
                return bad(format!("axis '{}' appears twice", axis.name));
            }
            seen.push(&axis.name);
            if axis.values.iter().any(|v| !v.is_finite()) {
                return bad(format!("axis '{}' has a non-finite value", axis.name));
            }
        }
        for name in self.axes.iter().map(|a| a.name.as_str()).chain(self.fixed.keys().map(String::as_str)) {
            if !known.contains(&name) {
                return bad(format!(
                    "unknown parameter '{name}' for model {:?} (expected one of {known:?})",
                    self.model
                ));
            }
        }
        for name in self.fixed.keys() {
            if seen.contains(&name.as_str()) {
                return bad(format!("parameter '{name}' is both fixed and an axis"));
            }
        }
        self.parameters_at(0)?;
        if self.metrics.is_empty() {
            return bad("no metrics requested".into());
        }
        if self.n_realizations == 0 {
            return bad("n_realizations must be at least 1".into());
        }
        if !(0.0..0.5).contains(&self.trim) {
            return bad(format!("trim {} outside [0, 0.5)", self.trim));
        }
        if self.wants(Metric::MeanR) {
            if !(2..=MAX_SECTOR_SITES).contains(&self.l_spectrum) {
                return bad(format!("l_spectrum {} outside [2, {MAX_SECTOR_SITES}]", self.l_spectrum));
            }
            if let SectorKind::Magnetization { n_up } = self.sector() {
                if n_up > self.l_spectrum {
                    return bad(format!("n_up {n_up} exceeds l_spectrum {}", self.l_spectrum));
                }
            }
        }
        if self.wants_dynamics() {
            if !(2..=MAX_DENSE_SITES).contains(&self.l_dynamics) {
                return bad(format!("l_dynamics {} outside [2, {MAX_DENSE_SITES}]", self.l_dynamics));
            }
            if self.probe_site == 0 || self.probe_site > self.l_dynamics {
                return bad(format!("probe_site {} outside the chain", self.probe_site));
            }
            time_grid(self.t_max, self.dt)?;
            if self.wants(Metric::Purity) && self.n_states == 0 {
                return bad("n_states must be at least 1".into());
            }
            if self.wants(Metric::Echo) {
                match self.estimator {
                    Estimator::ExactPauli if self.l_dynamics > DEFAULT_MAX_EXACT_SITES => {
                        return bad(format!(
                            "l_dynamics {} exceeds the exact estimator limit {DEFAULT_MAX_EXACT_SITES}; use monte_carlo",
                            self.l_dynamics
                        ))
                    }
                    Estimator::DesignEnum if self.l_dynamics > MAX_DESIGN_SITES => {
                        return bad(format!("design estimator needs l_dynamics <= {MAX_DESIGN_SITES}"))
                    }
                    Estimator::MonteCarlo { samples, .. } if samples < 2 => {
                        return bad("monte_carlo needs at least 2 samples".into())
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// Hamiltonian at grid point `index` for a chain of `length` sites.
    /// `seed` selects the disorder realization.
    pub fn hamiltonian(&self, index: usize, length: usize, seed: u64, defect_site: Option<usize>) -> Result<SpinHamiltonian> {
        let p = self.parameters_at(index)?;
        let get = |name: &str| p[name];
        match self.model {
            ModelKind::Ising => mixed_field_ising(&IsingParams {
                length,
                hx: get("hx"),
                hz: get("hz"),
                j: get("j"),
            }),
            ModelKind::Heisenberg => random_field_heisenberg(&HeisenbergParams {
                length,
                h: get("h"),
                seed,
            })
            .map(|(h, _)| h),
            ModelKind::XxzDefect => xxz_defect(&XxzDefectParams {
                length,
                jxy: get("jxy"),
                jz: get("jz"),
                eps: get("eps"),
                defect_site: defect_site.unwrap_or_else(|| default_defect_site(length)),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ISING: &str = r#"{
        "model": "ising",
        "axes": [{"name": "hz", "values": [0.48, 1.446]}, {"name": "j", "values": [0.8, 0.05, 0.0]}]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = SweepConfig::from_json(ISING).unwrap();
        assert_eq!(cfg.l_dynamics, 7);
        assert_eq!(cfg.l_spectrum, 12);
        assert_eq!(cfg.n_states, 50);
        assert_eq!(cfg.t_max, 100.0);
        assert_eq!(cfg.dt, 0.1);
        assert_eq!(cfg.estimator, Estimator::ExactPauli);
        assert_eq!(cfg.sector(), SectorKind::Parity(Parity::Even));
        assert_eq!(cfg.grid_len(), 6);
        assert_eq!(cfg.grid_point(0), vec![0.48, 0.8]);
        assert_eq!(cfg.grid_point(4), vec![1.446, 0.05]);
        let p = cfg.parameters_at(5).unwrap();
        assert_eq!((p["hx"], p["hz"], p["j"]), (1.0, 1.446, 0.0));
    }

    #[test]
    fn default_grids() {
        let ising = SweepConfig::from_json(r#"{"model": "ising"}"#).unwrap();
        assert_eq!(ising.grid_len(), 13 * 9);
        assert_eq!(ising.grid_point(0), vec![0.0, 0.05]);
        assert_eq!(ising.grid_point(13 * 9 - 1), vec![3.0, 2.0]);
        let xxz = SweepConfig::from_json(r#"{"model": "xxz"}"#).unwrap();
        assert_eq!(xxz.grid_len(), 20 * 16);
        let last = xxz.grid_point(xxz.grid_len() - 1);
        assert!((last[0] - 2.0).abs() < 1e-12 && (last[1] - 1.5).abs() < 1e-12);
        let heis = SweepConfig::from_json(r#"{"model": "heisenberg", "axes": []}"#).unwrap();
        assert_eq!(heis.axes[0].values, vec![0.5, 1.0, 2.0, 4.0, 6.0]);
    }

    #[test]
    fn validation_errors() {
        let unknown = ISING.replace("\"j\"", "\"jj\"");
        assert!(matches!(SweepConfig::from_json(&unknown), Err(Error::Config(_))));
        let empty = r#"{"model": "ising", "axes": [{"name": "hz", "values": []}], "fixed": {"j": 1}}"#;
        assert!(SweepConfig::from_json(empty).is_err());
        let missing = r#"{"model": "ising", "axes": [{"name": "hz", "values": [1]}]}"#;
        assert!(SweepConfig::from_json(missing).is_err());
        let big = r#"{"model": "heisenberg", "axes": [{"name": "h", "values": [1]}], "l_dynamics": 9}"#;
        assert!(SweepConfig::from_json(big).is_err());
        let typo = r#"{"model": "heisenberg", "axes": [{"name": "h", "values": [1]}], "l_dynamic": 5}"#;
        assert!(matches!(SweepConfig::from_json(typo), Err(Error::Json(_))));
        let mc = r#"{"model": "heisenberg", "axes": [{"name": "h", "values": [1]}], "l_dynamics": 9,
                    "estimator": {"kind": "monte_carlo", "samples": 10, "seed": 1}}"#;
        assert!(SweepConfig::from_json(mc).is_ok());
    }

    #[test]
    fn xxz_alias_and_sector() {
        let cfg = SweepConfig::from_json(
            r#"{"model": "xxz", "axes": [{"name": "jxy", "values": [2]}], "fixed": {"eps": 0},
                "sector": {"magnetization": {"n_up": 6}}}"#,
        )
        .unwrap();
        assert_eq!(cfg.model, ModelKind::XxzDefect);
        assert_eq!(cfg.sector(), SectorKind::Magnetization { n_up: 6 });
        assert!(cfg.hamiltonian(0, 7, 0, None).is_ok());
    }
}
