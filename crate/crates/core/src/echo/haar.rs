//! Haar averages of the Choi echo over product environments.

use faer::linalg::matmul::matmul;
use faer::{Accum, Mat, Par};
use num_complex::Complex64;
use rayon::prelude::*;

use super::single::environment_purity_echo;
use super::{check_probe, CheckedUnitary};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::spinops::{
    embed_probe, merge_probe_index, partial_trace, pauli_string_matrix, random_product_state_from_rng, ComplexMatrix,
    PauliString, ONE,
};

/// Default ceiling on chain length for the exact `4^{L-1}`-term average.
pub const DEFAULT_MAX_EXACT_SITES: usize = 8;
/// Ceiling for the `6^{L-1}` design enumeration.
pub const MAX_DESIGN_SITES: usize = 5;

fn exact_limit_error(length: usize, limit: usize) -> Error {
    Error::Size {
        what: "exact Haar average (use the monte_carlo estimator)",
        requested: length,
        limit,
    }
}

/// Literal Pauli-string sum
/// `4^{-L} Σ_α 3^{-w(α)} Tr_E[(Tr_S[U (I ⊗ σ_α) U†])²]` over environment
/// strings `α`. Costs one dense conjugation per string.
pub fn haar_echo_pauli_sum(u: &ComplexMatrix, probe_site: usize, max_sites: usize) -> Result<f64> {
    let CheckedUnitary { length, .. } = check_probe(u, probe_site)?;
    if length > max_sites {
        return Err(exact_limit_error(length, max_sites));
    }
    let n = length - 1;
    let identity = ComplexMatrix::identity(2);
    let terms: Vec<f64> = (0..1usize << (2 * n))
        .into_par_iter()
        .map(|index| -> Result<f64> {
            let string = PauliString::from_index(n, index);
            let env_op = if n == 0 {
                ComplexMatrix::identity(1)
            } else {
                pauli_string_matrix(&string)?
            };
            let global = embed_probe(&identity, &env_op, length, probe_site)?;
            let reduced = partial_trace(&u.conjugate(&global), length, &[probe_site])?;
            Ok(3f64.powi(-(string.weight() as i32)) * reduced.frobenius_norm_sqr())
        })
        .collect::<Result<_>>()?;
    Ok(terms.iter().sum::<f64>() / 4f64.powi(length as i32))
}

/// The same average evaluated without forming Pauli strings: the echo is a
/// quadratic form in `ψ ⊗ ψ`, whose product-Haar average factorizes into a
/// per-site Pauli transform of one Gram matrix.
pub fn haar_echo_exact(u: &ComplexMatrix, probe_site: usize, max_sites: usize) -> Result<f64> {
    let CheckedUnitary { length, .. } = check_probe(u, probe_site)?;
    if length > max_sites {
        return Err(exact_limit_error(length, max_sites));
    }
    Ok(twirled_echo(u, length, probe_site))
}

pub(crate) fn twirled_echo(u: &ComplexMatrix, length: usize, probe_site: usize) -> f64 {
    let n = length - 1;
    let de = 1usize << n;
    // M[e, (2k+s)·de + f] = <s, e| U |k, f>
    let m = Mat::<Complex64>::from_fn(de, 4 * de, |e, c| {
        let (ks, f) = (c / de, c % de);
        let (k, s) = (ks / 2, ks % 2);
        u[(
            merge_probe_index(s, e, length, probe_site),
            merge_probe_index(k, f, length, probe_site),
        )]
    });
    let mut gram = Mat::<Complex64>::zeros(4 * de, 4 * de);
    matmul(gram.as_mut(), Accum::Replace, m.transpose(), m.conjugate(), ONE, Par::Seq);

    let weights = twirl_weights(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); de * de];
    let mut total = 0.0;
    for b1 in 0..4 {
        for b2 in b1..4 {
            for f in 0..de {
                for g in 0..de {
                    buf[f * de + g] = gram[(b1 * de + f, b2 * de + g)];
                }
            }
            pauli_transform(&mut buf, n);
            let block: f64 = buf.iter().zip(&weights).map(|(q, w)| w * q.norm_sqr()).sum();
            total += if b1 == b2 { block } else { 2.0 * block };
        }
    }
    total / 4f64.powi(length as i32)
}

/// `3^{-w}` for each transformed slot, where `w` counts sites with a
/// non-identity label.
fn twirl_weights(n: usize) -> Vec<f64> {
    let mask = (1usize << n) - 1;
    (0..1usize << (2 * n))
        .map(|idx| {
            let w = ((idx >> n) | idx) & mask;
            3f64.powi(-(w.count_ones() as i32))
        })
        .collect()
}

/// In place: `B[f, g] ↦ Σ_{f,g} B[f,g] σ_α[f,g]`, site by site. Slot bits
/// `(f_m, g_m)` = 00, 01, 10, 11 end up holding labels I, X, Y, Z.
fn pauli_transform(buf: &mut [Complex64], n: usize) {
    let i = Complex64::i();
    for m in 0..n {
        let gb = 1usize << m;
        let fb = 1usize << (n + m);
        for idx in 0..buf.len() {
            if idx & (gb | fb) != 0 {
                continue;
            }
            let b00 = buf[idx];
            let b01 = buf[idx | gb];
            let b10 = buf[idx | fb];
            let b11 = buf[idx | fb | gb];
            buf[idx] = b00 + b11;
            buf[idx | gb] = b01 + b10;
            buf[idx | fb] = i * (b10 - b01);
            buf[idx | fb | gb] = b00 - b11;
        }
    }
}

fn pauli_eigenstates() -> [[Complex64; 2]; 6] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(h, 0.0), c(h, 0.0)],
        [c(h, 0.0), c(-h, 0.0)],
        [c(h, 0.0), c(0.0, h)],
        [c(h, 0.0), c(0.0, -h)],
    ]
}

/// Uniform average of the single-environment echo over all products of the
/// six Pauli eigenstates.
pub fn haar_echo_design(u: &ComplexMatrix, probe_site: usize) -> Result<f64> {
    let CheckedUnitary { length, .. } = check_probe(u, probe_site)?;
    if length > MAX_DESIGN_SITES {
        return Err(Error::Size {
            what: "design enumeration",
            requested: length,
            limit: MAX_DESIGN_SITES,
        });
    }
    let n = length - 1;
    let states = pauli_eigenstates();
    let count = 6usize.pow(n as u32);
    let values: Vec<f64> = (0..count)
        .into_par_iter()
        .map(|mut code| {
            let mut psi = vec![ONE];
            for _ in 0..n {
                let site = states[code % 6];
                code /= 6;
                psi = psi.iter().flat_map(|a| [a * site[0], a * site[1]]).collect();
            }
            environment_purity_echo(u, &psi, length, probe_site)
        })
        .collect();
    Ok(values.iter().sum::<f64>() / count as f64)
}

/// Sample mean and standard error of the single-environment echo over
/// `samples` Haar-random product environments. Sample `i` draws from seed
/// `derive_seed(seed, [i])`.
pub fn haar_echo_mc(u: &ComplexMatrix, probe_site: usize, samples: usize, seed: u64) -> Result<(f64, f64)> {
    let CheckedUnitary { length, .. } = check_probe(u, probe_site)?;
    if samples < 2 {
        return Err(Error::TooFewSamples { have: samples, need: 2 });
    }
    let values: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, &[i as u64]));
            let env = random_product_state_from_rng(length - 1, &mut rng);
            environment_purity_echo(u, env.amplitudes(), length, probe_site)
        })
        .collect();
    Ok(mean_and_standard_error(&values))
}

pub(crate) fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
