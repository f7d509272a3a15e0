//! Hermitian eigendecomposition and nearest-neighbour spacing-ratio statistics.

use std::io::Write;

use faer::{Mat, Side};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spinops::ComplexMatrix;

/// `⟨r̃⟩` for Poisson statistics, `2 ln 2 − 1`.
pub const POISSON_MEAN_R: f64 = 0.386_294_361_119_890_6;
/// Large-dimension GOE `⟨r̃⟩`.
pub const GOE_MEAN_R: f64 = 0.5307;
/// Fraction of levels dropped at each spectral edge by default.
pub const DEFAULT_TRIM: f64 = 0.05;

const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `n` is the eigenvector of `eigenvalues[n]`.
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V Λ V^†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(self.dim(), |i, j| v[(i, j)] * self.eigenvalues[j]);
        let mut out = ComplexMatrix::zeros(self.dim());
        faer::linalg::matmul::matmul(
            out.as_faer_mut(),
            faer::Accum::Replace,
            scaled.as_faer(),
            v.as_faer().adjoint(),
            Complex64::new(1.0, 0.0),
            faer::Par::Seq,
        );
        out
    }

    /// Number of qubits when the dimension is a power of two.
    pub fn num_sites(&self) -> Option<usize> {
        let d = self.dim();
        d.is_power_of_two().then(|| d.trailing_zeros() as usize)
    }
}

fn check_hermitian(h: &ComplexMatrix) -> Result<()> {
    let defect = h.hermiticity_defect();
    if defect > HERMITIAN_TOL * h.max_abs().max(1.0) {
        return Err(Error::NonHermitian(defect));
    }
    Ok(())
}

fn real_part(h: &ComplexMatrix) -> Mat<f64> {
    Mat::from_fn(h.dim(), h.dim(), |i, j| h[(i, j)].re)
}

/// Full eigendecomposition of a Hermitian matrix. Real symmetric input takes
/// a real-arithmetic path.
pub fn eigh(h: &ComplexMatrix) -> Result<EigenDecomposition> {
    check_hermitian(h)?;
    let n = h.dim();
    if h.is_real() {
        let evd = real_part(h).self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let s = evd.S().column_vector();
        let u = evd.U();
        Ok(EigenDecomposition {
            eigenvalues: (0..n).map(|i| s[i]).collect(),
            eigenvectors: ComplexMatrix::from_fn(n, |i, j| Complex64::new(u[(i, j)], 0.0)),
        })
    } else {
        let evd = h.as_faer().self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
        let s = evd.S().column_vector();
        Ok(EigenDecomposition {
            eigenvalues: (0..n).map(|i| s[i].re).collect(),
            eigenvectors: ComplexMatrix::from_faer(evd.U()),
        })
    }
}

/// Ascending eigenvalues only.
pub fn eigvalsh(h: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    if h.is_real() {
        real_part(h).self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
    } else {
        h.as_faer().self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumStatistics {
    pub ratios: Vec<f64>,
    pub mean_r: f64,
    pub n_levels_used: usize,
    pub trim_fraction: f64,
    /// Ratios discarded because both adjacent spacings vanished.
    pub n_degenerate_dropped: usize,
}

/// `r̃ₙ = min(sₙ, sₙ₋₁) / max(sₙ, sₙ₋₁)` over the bulk of an ascending
/// spectrum, after dropping `⌊trim·N⌋` levels at each edge.
pub fn spacing_ratios(levels: &[f64], trim_fraction: f64) -> Result<SpectrumStatistics> {
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(Error::OutOfRange {
            name: "trim_fraction",
            value: trim_fraction,
            range: "[0, 0.5)",
        });
    }
    if levels.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Validation("levels must be ascending".into()));
    }
    let cut = (trim_fraction * levels.len() as f64).floor() as usize;
    let bulk = if 2 * cut < levels.len() {
        &levels[cut..levels.len() - cut]
    } else {
        &levels[..0]
    };
    if bulk.len() < 3 {
        return Err(Error::TooFewLevels {
            have: bulk.len(),
            need: 3,
        });
    }
    let range = bulk[bulk.len() - 1] - bulk[0];
    let threshold = 1e-12 * range;
    let mut ratios = Vec::with_capacity(bulk.len() - 2);
    let mut dropped = 0;
    for w in bulk.windows(3) {
        let s_prev = w[1] - w[0];
        let s_next = w[2] - w[1];
        let hi = s_prev.max(s_next);
        if hi < threshold || hi == 0.0 {
            dropped += 1;
            continue;
        }
        ratios.push(s_prev.min(s_next) / hi);
    }
    if ratios.is_empty() {
        return Err(Error::TooFewLevels { have: 0, need: 1 });
    }
    let mean_r = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(SpectrumStatistics {
        ratios,
        mean_r,
        n_levels_used: bulk.len(),
        trim_fraction,
        n_degenerate_dropped: dropped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurmiseKind {
    Poisson,
    Goe,
}

/// Reference densities of `r̃` on `[0, 1]`.
pub fn surmise_pdf(kind: SurmiseKind, r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::OutOfRange {
            name: "r",
            value: r,
            range: "[0, 1]",
        });
    }
    Ok(match kind {
        SurmiseKind::Poisson => 2.0 / ((1.0 + r) * (1.0 + r)),
        SurmiseKind::Goe => {
            let q = 1.0 + r + r * r;
            27.0 * (r + r * r) / (4.0 * q.powf(2.5))
        }
    })
}

/// Mean of the surmise density over `[a, b]` (composite Simpson, 32 panels).
fn surmise_bin_average(kind: SurmiseKind, a: f64, b: f64) -> f64 {
    let panels = 32;
    let h = (b - a) / panels as f64;
    let f = |x: f64| surmise_pdf(kind, x.clamp(0.0, 1.0)).expect("clamped");
    let mut acc = f(a) + f(b);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0 / (b - a)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramComparison {
    pub bin_centers: Vec<f64>,
    pub empirical: Vec<f64>,
    pub surmise: Vec<f64>,
    pub l1_distance: f64,
}

fn density_histogram(ratios: &[f64], n_bins: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_bins];
    for &r in ratios {
        let b = ((r * n_bins as f64) as usize).min(n_bins - 1);
        counts[b] += 1;
    }
    let width = 1.0 / n_bins as f64;
    counts
        .iter()
        .map(|&c| c as f64 / (ratios.len() as f64 * width))
        .collect()
}

const MIN_HISTOGRAM_SAMPLES: usize = 100;

/// Density-normalized histogram on `[0, 1]` against a surmise; the surmise
/// is averaged over each bin.
pub fn histogram_vs_surmise(ratios: &[f64], kind: SurmiseKind, n_bins: usize) -> Result<HistogramComparison> {
    if ratios.len() < MIN_HISTOGRAM_SAMPLES {
        return Err(Error::TooFewSamples {
            have: ratios.len(),
            need: MIN_HISTOGRAM_SAMPLES,
        });
    }
    if n_bins == 0 {
        return Err(Error::Validation("histogram needs at least one bin".into()));
    }
    if let Some(&bad) = ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::OutOfRange {
            name: "ratio",
            value: bad,
            range: "[0, 1]",
        });
    }
    let width = 1.0 / n_bins as f64;
    let empirical = density_histogram(ratios, n_bins);
    let bin_centers: Vec<f64> = (0..n_bins).map(|b| (b as f64 + 0.5) * width).collect();
    let surmise: Vec<f64> = (0..n_bins)
        .map(|b| surmise_bin_average(kind, b as f64 * width, (b + 1) as f64 * width))
        .collect();
    let l1_distance = empirical
        .iter()
        .zip(&surmise)
        .map(|(e, s)| (e - s).abs() * width)
        .sum();
    Ok(HistogramComparison {
        bin_centers,
        empirical,
        surmise,
        l1_distance,
    })
}

/// Writes `bin_center,empirical,poisson,goe`.
pub fn write_histogram_csv<W: Write>(out: W, ratios: &[f64], n_bins: usize) -> Result<()> {
    let poisson = histogram_vs_surmise(ratios, SurmiseKind::Poisson, n_bins)?;
    let goe = histogram_vs_surmise(ratios, SurmiseKind::Goe, n_bins)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_center", "empirical", "poisson", "goe"])?;
    for b in 0..n_bins {
        w.write_record([
            poisson.bin_centers[b].to_string(),
            poisson.empirical[b].to_string(),
            poisson.surmise[b].to_string(),
            goe.surmise[b].to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn goe_matrix(dim: usize, seed: u64) -> Mat<f64> {
    let mut rng = rng_from_seed(seed);
    let a: Vec<f64> = (0..dim * dim).map(|_| rng.sample(StandardNormal)).collect();
    Mat::from_fn(dim, dim, |i, j| 0.5 * (a[i * dim + j] + a[j * dim + i]))
}

/// Spacing ratios pooled over `n_matrices` GOE draws `(A + Aᵀ)/2`.
pub fn sample_goe_ratios(dim: usize, n_matrices: usize, seed: u64, trim_fraction: f64) -> Result<Vec<f64>> {
    let mut pooled = Vec::new();
    for m in 0..n_matrices {
        let levels = goe_matrix(dim, derive_seed(seed, &[m as u64]))
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|_| Error::Eigen)?;
        pooled.extend(spacing_ratios(&levels, trim_fraction)?.ratios);
    }
    Ok(pooled)
}

/// Self-test oracle: `⟨r̃⟩` of sampled GOE matrices (default edge trim).
pub fn sample_goe_mean_r(dim: usize, n_matrices: usize, seed: u64) -> Result<f64> {
    if dim < 100 {
        return Err(Error::OutOfRange {
            name: "dim",
            value: dim as f64,
            range: "[100, inf)",
        });
    }
    if n_matrices == 0 {
        return Err(Error::Validation("need at least one matrix".into()));
    }
    let ratios = sample_goe_ratios(dim, n_matrices, seed, DEFAULT_TRIM)?;
    Ok(ratios.iter().sum::<f64>() / ratios.len() as f64)
}

/// Ascending levels with i.i.d. unit-mean exponential spacings.
pub fn sample_poisson_levels(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut e = 0.0;
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            e += -(1.0 - u).ln();
            e
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(dim: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rng_from_seed(seed);
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        a.add(&a.adjoint()).scale(Complex64::new(0.5, 0.0))
    }

    #[test]
    fn pauli_x_eigenvalues() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let e = eigh(&x).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_sorted_ascending() {
        let d = ComplexMatrix::from_real_rows(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 2.0]]).unwrap();
        let e = eigvalsh(&d).unwrap();
        assert!(e.iter().zip([1.0, 2.0, 3.0]).all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn complex_roundtrip_and_unitarity() {
        let h = random_hermitian(50, 8);
        let e = eigh(&h).unwrap();
        assert!(e.reconstruct().max_abs_diff(&h) <= 1e-10 * h.max_abs().max(1.0));
        assert!(e.eigenvectors.unitarity_defect() < 1e-10);
        let vals = eigvalsh(&h).unwrap();
        assert!(vals.iter().zip(&e.eigenvalues).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn spacing_ratio_examples() {
        let s = spacing_ratios(&[0.0, 1.0, 3.0], 0.0).unwrap();
        assert_eq!(s.ratios, vec![0.5]);
        assert_eq!(s.mean_r, 0.5);
        let ladder: Vec<f64> = (0..50).map(|k| 0.3 * k as f64).collect();
        let s = spacing_ratios(&ladder, 0.05).unwrap();
        assert!(s.ratios.iter().all(|&r| (r - 1.0).abs() < 1e-12));
        assert_eq!(s.n_levels_used, 50 - 2 * 2);
    }

    #[test]
    fn spacing_ratio_errors_and_degeneracies() {
        assert!(matches!(spacing_ratios(&[0.0, 1.0], 0.0), Err(Error::TooFewLevels { .. })));
        assert!(spacing_ratios(&[0.0, 1.0, 2.0, 3.0], 0.5).is_err());
        assert!(spacing_ratios(&[0.0, 2.0, 1.0], 0.0).is_err());
        let s = spacing_ratios(&[0.0, 1.0, 1.0, 1.0, 2.0, 4.0], 0.0).unwrap();
        assert_eq!(s.n_degenerate_dropped, 1);
        assert_eq!(s.ratios, vec![0.0, 0.0, 0.5]);
    }

    #[test]
    fn poisson_sampling_oracle() {
        let levels = sample_poisson_levels(100_000, 1);
        let s = spacing_ratios(&levels, 0.0).unwrap();
        assert!((s.mean_r - 0.386).abs() < 0.005, "{}", s.mean_r);
    }

    fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for k in 1..n {
            acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn surmise_values_and_normalization() {
        assert_eq!(surmise_pdf(SurmiseKind::Poisson, 0.0).unwrap(), 2.0);
        assert_eq!(surmise_pdf(SurmiseKind::Poisson, 1.0).unwrap(), 0.5);
        assert_eq!(surmise_pdf(SurmiseKind::Goe, 0.0).unwrap(), 0.0);
        assert!(surmise_pdf(SurmiseKind::Goe, 1.5).is_err());
        for kind in [SurmiseKind::Poisson, SurmiseKind::Goe] {
            let total = simpson(|r| surmise_pdf(kind, r).unwrap(), 2000);
            assert!((total - 1.0).abs() < 1e-6, "{kind:?}: {total}");
        }
    }

    #[test]
    fn histogram_distances() {
        let poisson = spacing_ratios(&sample_poisson_levels(100_002, 5), 0.0).unwrap().ratios;
        let near = histogram_vs_surmise(&poisson, SurmiseKind::Poisson, 20).unwrap();
        assert!(near.l1_distance <= 0.05, "{}", near.l1_distance);

        let goe = sample_goe_ratios(1000, 112, 77, DEFAULT_TRIM).unwrap();
        assert!(goe.len() >= 100_000);
        let goe_goe = histogram_vs_surmise(&goe, SurmiseKind::Goe, 20).unwrap();
        assert!(goe_goe.l1_distance <= 0.05, "{}", goe_goe.l1_distance);
        let goe_poisson = histogram_vs_surmise(&goe, SurmiseKind::Poisson, 20).unwrap();
        assert!(goe_poisson.l1_distance >= 0.2, "{}", goe_poisson.l1_distance);

        assert!(histogram_vs_surmise(&poisson[..50], SurmiseKind::Goe, 10).is_err());
    }

    #[test]
    fn goe_mean_r_self_test() {
        let r = sample_goe_mean_r(1000, 10, 2026).unwrap();
        assert!((r - GOE_MEAN_R).abs() < 0.01, "{r}");
        assert_eq!(r, sample_goe_mean_r(1000, 10, 2026).unwrap());
        assert!(sample_goe_mean_r(50, 1, 0).is_err());
    }

    #[test]
    fn trim_insensitivity_on_goe() {
        let dim = 600;
        let levels = goe_matrix(dim, 3).self_adjoint_eigenvalues(Side::Lower).unwrap();
        let r0 = spacing_ratios(&levels, 0.0).unwrap().mean_r;
        let r1 = spacing_ratios(&levels, 0.1).unwrap().mean_r;
        assert!((r0 - r1).abs() < 0.02);
    }

    #[test]
    fn histogram_csv_layout() {
        let ratios = spacing_ratios(&sample_poisson_levels(500, 2), 0.0).unwrap().ratios;
        let mut buf = Vec::new();
        write_histogram_csv(&mut buf, &ratios, 5).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "bin_center,empirical,poisson,goe");
        assert_eq!(lines.len(), 6);
    }
}
