//! Averaged single-site purity along trajectories from random product states.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{time_grid, trapezoid_average, ProbeDynamics};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::spinops::{random_product_state, single_site_purity, ONE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PuritySeries {
    pub times: Vec<f64>,
    /// Mean of `Tr[ρ_S(t)²]` over the trajectories.
    pub values: Vec<f64>,
    pub n_states: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityAverage {
    /// Time-averaged purity, averaged over trajectories.
    pub mean: f64,
    /// Time average of each trajectory.
    pub per_state: Vec<f64>,
    pub series: PuritySeries,
}

impl ProbeDynamics<'_> {
    /// Evolves `n_states` random product states of the whole chain (state
    /// `i` seeded by `derive_seed(seed, [i])`) and averages the probe purity
    /// over `[0, t_max]` with the trapezoid rule.
    pub fn averaged_subsystem_purity(&self, n_states: usize, t_max: f64, dt: f64, seed: u64) -> Result<PurityAverage> {
        if n_states == 0 {
            return Err(Error::TooFewSamples { have: 0, need: 1 });
        }
        let times = time_grid(t_max, dt)?;
        let dim = self.eig.dim();
        let initial: Vec<_> = (0..n_states)
            .map(|i| random_product_state(self.length, derive_seed(seed, &[i as u64])))
            .collect::<Result<_>>()?;
        let v = self.eig.eigenvectors.as_faer();
        let psi0 = Mat::<Complex64>::from_fn(dim, n_states, |g, i| initial[i].amplitudes()[g]);
        let mut coeffs = Mat::<Complex64>::zeros(dim, n_states);
        matmul(coeffs.as_mut(), Accum::Replace, v.adjoint(), psi0.as_ref(), ONE, Par::Seq);

        let per_time: Vec<Vec<f64>> = times
            .par_iter()
            .map(|&t| {
                let phases: Vec<Complex64> = self
                    .eig
                    .eigenvalues
                    .iter()
                    .map(|&e| Complex64::from_polar(1.0, -e * t))
                    .collect();
                let rotated = Mat::<Complex64>::from_fn(dim, n_states, |n, i| coeffs[(n, i)] * phases[n]);
                let mut psi_t = Mat::<Complex64>::zeros(dim, n_states);
                matmul(psi_t.as_mut(), Accum::Replace, v, rotated.as_ref(), ONE, Par::Seq);
                (0..n_states)
                    .map(|i| {
                        let column: Vec<Complex64> = (0..dim).map(|g| psi_t[(g, i)]).collect();
                        single_site_purity(&column, self.length, self.probe_site)
                    })
                    .collect()
            })
            .collect();

        let per_state: Vec<f64> = (0..n_states)
            .map(|i| {
                let series: Vec<f64> = per_time.iter().map(|row| row[i]).collect();
                trapezoid_average(&times, &series)
            })
            .collect::<Result<_>>()?;
        let values: Vec<f64> = per_time
            .iter()
            .map(|row| row.iter().sum::<f64>() / n_states as f64)
            .collect();
        let mean = per_state.iter().sum::<f64>() / n_states as f64;
        Ok(PurityAverage {
            mean,
            per_state,
            series: PuritySeries {
                times,
                values,
                n_states,
                seed,
            },
        })
    }
}
