//! Partial traces, purities and random product states.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{kron_vec, ComplexMatrix, ZERO};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};

pub(crate) fn check_sites(length: usize, sites: &[usize]) -> Result<()> {
    let mut seen = vec![false; length + 1];
    for &site in sites {
        if site == 0 || site > length || seen[site] {
            return Err(Error::InvalidSite { site, length });
        }
        seen[site] = true;
    }
    Ok(())
}

/// Offsets in the full index for every assignment of the given sites,
/// enumerated with the first listed site as the most significant bit.
fn site_offsets(length: usize, sites: &[usize]) -> Vec<usize> {
    let k = sites.len();
    (0..1usize << k)
        .map(|local| {
            sites.iter().enumerate().fold(0usize, |acc, (pos, &site)| {
                if local >> (k - 1 - pos) & 1 == 1 {
                    acc | 1 << (length - site)
                } else {
                    acc
                }
            })
        })
        .collect()
}

/// Traces out `traced_sites` from a `2^length`-dimensional operator. The
/// remaining sites keep their relative order.
pub fn partial_trace(rho: &ComplexMatrix, length: usize, traced_sites: &[usize]) -> Result<ComplexMatrix> {
    if length >= usize::BITS as usize || rho.dim() != 1usize << length {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} is not on {length} qubits",
            rho.dim()
        )));
    }
    check_sites(length, traced_sites)?;
    let kept: Vec<usize> = (1..=length).filter(|s| !traced_sites.contains(s)).collect();
    let mut traced: Vec<usize> = traced_sites.to_vec();
    traced.sort_unstable();

    let kept_off = site_offsets(length, &kept);
    let traced_off = site_offsets(length, &traced);
    let dk = kept_off.len();
    let mut out = ComplexMatrix::zeros(dk);
    for (a, &ra) in kept_off.iter().enumerate() {
        for (b, &rb) in kept_off.iter().enumerate() {
            let mut acc = ZERO;
            for &t in &traced_off {
                acc += rho[(ra | t, rb | t)];
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

/// Places a single-site operator on `probe_site` and an environment operator
/// on the remaining sites (in chain order).
pub fn embed_probe(
    probe_op: &ComplexMatrix,
    env_op: &ComplexMatrix,
    length: usize,
    probe_site: usize,
) -> Result<ComplexMatrix> {
    check_sites(length, &[probe_site])?;
    if probe_op.dim() != 2 || env_op.dim() != 1usize << (length - 1) {
        return Err(Error::DimensionMismatch(format!(
            "probe dim {} / environment dim {} incompatible with {length} sites",
            probe_op.dim(),
            env_op.dim()
        )));
    }
    let split = |g: usize| split_probe_index(g, length, probe_site);
    Ok(ComplexMatrix::from_fn(1 << length, |g, h| {
        let (s, e) = split(g);
        let (s2, e2) = split(h);
        probe_op[(s, s2)] * env_op[(e, e2)]
    }))
}

/// Splits a full index into (probe bit, environment index).
pub(crate) fn split_probe_index(g: usize, length: usize, probe_site: usize) -> (usize, usize) {
    let pos = length - probe_site;
    let s = (g >> pos) & 1;
    let low = g & ((1 << pos) - 1);
    let high = g >> (pos + 1);
    (s, (high << pos) | low)
}

/// Inverse of [`split_probe_index`].
pub(crate) fn merge_probe_index(s: usize, e: usize, length: usize, probe_site: usize) -> usize {
    let pos = length - probe_site;
    let low = e & ((1 << pos) - 1);
    let high = e >> pos;
    (high << (pos + 1)) | (s << pos) | low
}

/// `Tr[ρ²]` of a unit-trace Hermitian matrix.
pub fn purity(rho: &ComplexMatrix) -> Result<f64> {
    let tr = rho.trace();
    if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-9 {
        return Err(Error::Validation(format!("density matrix trace is {tr}, expected 1")));
    }
    let defect = rho.hermiticity_defect();
    if defect > 1e-9 {
        return Err(Error::NonHermitian(defect));
    }
    Ok(rho.frobenius_norm_sqr())
}

/// Purity of `Tr_E |ψ><ψ|` for the single site `probe_site` of a pure state,
/// computed from amplitudes without forming the global density matrix.
pub fn single_site_purity(psi: &[Complex64], length: usize, probe_site: usize) -> f64 {
    let rho = single_site_marginal(psi, length, probe_site);
    rho.frobenius_norm_sqr()
}

pub fn single_site_marginal(psi: &[Complex64], length: usize, probe_site: usize) -> ComplexMatrix {
    debug_assert_eq!(psi.len(), 1 << length);
    let mut r = [[ZERO; 2]; 2];
    let bit = 1usize << (length - probe_site);
    for (g, a) in psi.iter().enumerate() {
        if g & bit != 0 {
            continue;
        }
        let b = psi[g | bit];
        r[0][0] += a * a.conj();
        r[0][1] += a * b.conj();
        r[1][1] += b * b.conj();
    }
    r[1][0] = r[0][1].conj();
    ComplexMatrix::from_row_major(2, vec![r[0][0], r[0][1], r[1][0], r[1][1]]).expect("2x2")
}

/// A tensor product of single-qubit pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState {
    length: usize,
    sites: Vec<[Complex64; 2]>,
    amplitudes: Vec<Complex64>,
    seed: Option<u64>,
}

impl ProductState {
    /// Normalizes each site vector and forms the tensor product.
    pub fn from_sites(sites: Vec<[Complex64; 2]>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Validation("product state needs at least one site".into()));
        }
        let mut normalized = Vec::with_capacity(sites.len());
        for v in sites {
            let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
            if n < 1e-300 || !n.is_finite() {
                return Err(Error::Validation("zero or non-finite site vector".into()));
            }
            normalized.push([v[0] / n, v[1] / n]);
        }
        let amplitudes = normalized
            .iter()
            .fold(vec![Complex64::new(1.0, 0.0)], |acc, v| kron_vec(&acc, v));
        Ok(Self {
            length: normalized.len(),
            sites: normalized,
            amplitudes,
            seed: None,
        })
    }

    /// `|0...0>` on `length` sites.
    pub fn all_up(length: usize) -> Result<Self> {
        Self::from_sites(vec![[Complex64::new(1.0, 0.0), ZERO]; length])
    }

    pub fn len(&self) -> usize {
        self.length
    }

    pub fn is_empty(&self) -> bool {
        self.length == 0
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn site(&self, site: usize) -> [Complex64; 2] {
        self.sites[site - 1]
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn density_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }
}

/// One Haar-random qubit: two independent standard complex Gaussians, normalized.
pub fn haar_qubit(rng: &mut SimRng) -> [Complex64; 2] {
    let mut draw = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let v = [draw(), draw()];
    let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    [v[0] / n, v[1] / n]
}

pub fn random_product_state_from_rng(length: usize, rng: &mut SimRng) -> ProductState {
    let sites = (0..length).map(|_| haar_qubit(rng)).collect();
    ProductState::from_sites(sites).expect("Haar qubits are normalized")
}

/// Product of `length` independent Haar-random qubits, reproducible from `seed`.
pub fn random_product_state(length: usize, seed: u64) -> Result<ProductState> {
    if length == 0 {
        return Err(Error::Validation("product state needs at least one site".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut state = random_product_state_from_rng(length, &mut rng);
    state.seed = Some(seed);
    Ok(state)
}

/// Haar-random unitary from Gram-Schmidt orthonormalization of a complex
/// Ginibre matrix (columns processed left to right).
pub fn haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed);
    let mut cols: Vec<Vec<Complex64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    for k in 0..dim {
        for prev in 0..k {
            let (done, rest) = cols.split_at_mut(k);
            let q = &done[prev];
            let overlap: Complex64 = q.iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, a) in rest[0].iter_mut().zip(q) {
                *x -= overlap * a;
            }
        }
        let norm = cols[k].iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        for x in cols[k].iter_mut() {
            *x /= norm;
        }
    }
    ComplexMatrix::from_fn(dim, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spinops::matrix::kron;

    #[test]
    fn probe_index_split_and_merge_are_inverse() {
        for length in 1..=5 {
            for probe in 1..=length {
                for g in 0..1usize << length {
                    let (s, e) = split_probe_index(g, length, probe);
                    assert!(s < 2 && e < 1 << (length - 1));
                    assert_eq!(merge_probe_index(s, e, length, probe), g);
                }
            }
        }
    }

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random_density(length: usize, seed: u64) -> ComplexMatrix {
        let mut rng = rng_from_seed(seed);
        let dim = 1 << length;
        let a = ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let rho = a.matmul(&a.adjoint());
        let tr = rho.trace();
        rho.scale(tr.inv())
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let s = 0.5f64.sqrt();
        let phi = [c(s), c(0.0), c(0.0), c(s)];
        let rho = ComplexMatrix::outer(&phi);
        let half = ComplexMatrix::identity(2).scale(c(0.5));
        for site in [1, 2] {
            let red = partial_trace(&rho, 2, &[site]).unwrap();
            assert!(red.max_abs_diff(&half) < 1e-15);
        }
    }

    #[test]
    fn product_input_recovers_factor() {
        let rho_s = ComplexMatrix::from_real_rows(&[&[0.75, 0.1], &[0.1, 0.25]]).unwrap();
        let rho_e = random_density(2, 5);
        let joint = kron(&rho_s, &rho_e);
        let red = partial_trace(&joint, 3, &[2, 3]).unwrap();
        assert!(red.max_abs_diff(&rho_s) < 1e-12);
    }

    #[test]
    fn trace_preserved_and_composition_consistent() {
        let rho = random_density(4, 11);
        let once = partial_trace(&rho, 4, &[2, 3]).unwrap();
        let step = partial_trace(&partial_trace(&rho, 4, &[2]).unwrap(), 3, &[2]).unwrap();
        assert!(once.max_abs_diff(&step) < 1e-12);
        assert!((once.trace() - rho.trace()).norm() < 1e-12);
        let all = partial_trace(&rho, 4, &[1, 2, 3, 4]).unwrap();
        assert_eq!(all.dim(), 1);
        assert!((all[(0, 0)] - c(1.0)).norm() < 1e-12);
    }

    #[test]
    fn invalid_sites_are_rejected() {
        let rho = ComplexMatrix::identity(4);
        assert!(matches!(partial_trace(&rho, 2, &[3]), Err(Error::InvalidSite { .. })));
        assert!(partial_trace(&rho, 2, &[0]).is_err());
        assert!(partial_trace(&rho, 2, &[1, 1]).is_err());
        assert!(partial_trace(&rho, 3, &[1]).is_err());
    }

    #[test]
    fn embed_probe_matches_kron_on_first_site_and_inverts_partial_trace() {
        let rho_s = ComplexMatrix::from_real_rows(&[&[0.6, 0.2], &[0.2, 0.4]]).unwrap();
        let rho_e = random_density(2, 3);
        let emb = embed_probe(&rho_s, &rho_e, 3, 1).unwrap();
        assert!(emb.max_abs_diff(&kron(&rho_s, &rho_e)) < 1e-15);
        let emb2 = embed_probe(&rho_s, &rho_e, 3, 2).unwrap();
        assert!(partial_trace(&emb2, 3, &[1, 3]).unwrap().max_abs_diff(&rho_s) < 1e-12);
        assert!(partial_trace(&emb2, 3, &[2]).unwrap().max_abs_diff(&rho_e) < 1e-12);
    }

    #[test]
    fn purity_values() {
        let proj = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]).unwrap();
        assert!((purity(&proj).unwrap() - 1.0).abs() < 1e-15);
        let mixed = ComplexMatrix::identity(4).scale(c(0.25));
        assert!((purity(&mixed).unwrap() - 0.25).abs() < 1e-15);
        let d = ComplexMatrix::from_real_rows(&[&[0.75, 0.0], &[0.0, 0.25]]).unwrap();
        assert!((purity(&d).unwrap() - 0.625).abs() < 1e-15);
        assert!(purity(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn product_state_determinism_and_pure_marginals() {
        let a = random_product_state(5, 99).unwrap();
        let b = random_product_state(5, 99).unwrap();
        assert_eq!(a.amplitudes(), b.amplitudes());
        let norm: f64 = a.amplitudes().iter().map(|x| x.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        for site in 1..=5 {
            assert!((single_site_purity(a.amplitudes(), 5, site) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn haar_first_moment_is_maximally_mixed() {
        let mut rng = rng_from_seed(2024);
        let mut acc = ComplexMatrix::zeros(2);
        let n = 10_000;
        for _ in 0..n {
            let v = haar_qubit(&mut rng);
            acc = acc.add(&ComplexMatrix::outer(&v));
        }
        let mean = acc.scale(c(1.0 / n as f64));
        let half = ComplexMatrix::identity(2).scale(c(0.5));
        assert!(mean.max_abs_diff(&half) < 0.02, "{mean:?}");
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let u = haar_unitary(16, 4);
        assert!(u.unitarity_defect() < 1e-12);
        assert_eq!(u, haar_unitary(16, 4));
    }

    #[test]
    fn single_site_marginal_matches_partial_trace() {
        let s = random_product_state(4, 1).unwrap();
        let rho = s.density_matrix();
        for site in 1..=4 {
            let traced: Vec<usize> = (1..=4).filter(|&k| k != site).collect();
            let a = partial_trace(&rho, 4, &traced).unwrap();
            let b = single_site_marginal(s.amplitudes(), 4, site);
            assert!(a.max_abs_diff(&b) < 1e-14);
        }
    }
}
