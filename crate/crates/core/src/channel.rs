//! Reduced single-qubit channels of a probe spin under global unitary
//! dynamics, stored as normalized Choi matrices.
//!
//! The Choi matrix is `D = (1/d) Σ_ij E(|i><j|) ⊗ |i><j|` with the channel
//! output as the first (more significant) factor and the reference as the
//! second. It has unit trace, so `1/d² ≤ Tr[D²] ≤ 1`, and its marginal over
//! the output factor is `I/d`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{eigvalsh, EigenDecomposition};
use crate::spinops::{
    embed_probe, partial_trace, split_probe_index, ComplexMatrix, PauliLabel, ONE, ZERO,
};

/// Probe dimension.
pub const PROBE_DIM: usize = 2;
/// Most negative Choi eigenvalue accepted as positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const MARGINAL_TOL: f64 = 1e-9;

/// `U(t) = V e^{−iΛt} V^†`.
pub fn propagator(eig: &EigenDecomposition, t: f64) -> ComplexMatrix {
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&e| Complex64::from_polar(1.0, -e * t))
        .collect();
    let scaled = ComplexMatrix::from_fn(eig.dim(), |i, j| v[(i, j)] * phases[j]);
    let mut out = ComplexMatrix::zeros(eig.dim());
    faer::linalg::matmul::matmul(
        out.as_faer_mut(),
        faer::Accum::Replace,
        scaled.as_faer(),
        v.as_faer().adjoint(),
        ONE,
        faer::Par::Seq,
    );
    out
}

/// Initial state of the environment sites.
#[derive(Clone, Copy, Debug)]
pub enum Environment<'a> {
    /// State vector on the environment sites in chain order.
    Pure(&'a [Complex64]),
    Density(&'a ComplexMatrix),
}

impl Environment<'_> {
    fn dim(&self) -> usize {
        match self {
            Environment::Pure(v) => v.len(),
            Environment::Density(m) => m.dim(),
        }
    }

    fn validate(&self) -> Result<()> {
        let tr = match self {
            Environment::Pure(v) => v.iter().map(|x| x.norm_sqr()).sum::<f64>(),
            Environment::Density(m) => {
                if m.hermiticity_defect() > 1e-10 {
                    return Err(Error::NonHermitian(m.hermiticity_defect()));
                }
                let tr = m.trace();
                if tr.im.abs() > TRACE_TOL {
                    return Err(Error::Validation(format!("environment trace {tr} is not real")));
                }
                tr.re
            }
        };
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Validation(format!("environment trace is {tr}, expected 1")));
        }
        Ok(())
    }
}

fn chain_length(u: &ComplexMatrix) -> Result<usize> {
    let d = u.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::DimensionMismatch(format!("dimension {d} is not a qubit chain")));
    }
    Ok(d.trailing_zeros() as usize)
}

/// `X ↦ Tr_E[U (X ⊗ ρ_E) U^†]` for an arbitrary (not necessarily
/// Hermitian) probe operator `X`.
fn reduced_map_dense(
    u: &ComplexMatrix,
    env: &ComplexMatrix,
    x: &ComplexMatrix,
    length: usize,
    probe_site: usize,
) -> Result<ComplexMatrix> {
    let global = embed_probe(x, env, length, probe_site)?;
    let evolved = u.conjugate(&global);
    let traced: Vec<usize> = (1..=length).filter(|&s| s != probe_site).collect();
    partial_trace(&evolved, length, &traced)
}

/// The 2×2 images `E(|i><j|)` for `i, j ∈ {0, 1}`, indexed `[i][j]`.
fn basis_images(u: &ComplexMatrix, env: Environment<'_>, probe_site: usize) -> Result<[[ComplexMatrix; 2]; 2]> {
    let length = chain_length(u)?;
    if probe_site == 0 || probe_site > length {
        return Err(Error::InvalidSite {
            site: probe_site,
            length,
        });
    }
    if env.dim() != 1 << (length - 1) {
        return Err(Error::DimensionMismatch(format!(
            "environment of dimension {} for {} environment sites",
            env.dim(),
            length - 1
        )));
    }
    env.validate()?;
    let unit = |i: usize, j: usize| {
        let mut m = ComplexMatrix::zeros(2);
        m[(i, j)] = ONE;
        m
    };
    match env {
        Environment::Density(rho_e) => {
            let mut out: [[ComplexMatrix; 2]; 2] = Default::default();
            for (i, row) in out.iter_mut().enumerate() {
                for (j, slot) in row.iter_mut().enumerate() {
                    *slot = reduced_map_dense(u, rho_e, &unit(i, j), length, probe_site)?;
                }
            }
            Ok(out)
        }
        Environment::Pure(psi) => {
            // φ_i = U |i>_probe |ψ>_env, then E(|i><j|) = Tr_E |φ_i><φ_j|.
            let dim = 1usize << length;
            let inputs: [Vec<Complex64>; 2] = std::array::from_fn(|k| {
                (0..dim)
                    .map(|g| match split_probe_index(g, length, probe_site) {
                        (s, e) if s == k => psi[e],
                        _ => ZERO,
                    })
                    .collect()
            });
            let phi = [u.mul_vec(&inputs[0]), u.mul_vec(&inputs[1])];
            let mut out: [[ComplexMatrix; 2]; 2] = Default::default();
            for i in 0..2 {
                for j in 0..2 {
                    out[i][j] = probe_cross_marginal(&phi[i], &phi[j], length, probe_site);
                }
            }
            Ok(out)
        }
    }
}

/// `Tr_E |a><b|` on the probe site.
pub(crate) fn probe_cross_marginal(a: &[Complex64], b: &[Complex64], length: usize, probe_site: usize) -> ComplexMatrix {
    let bit = 1usize << (length - probe_site);
    let mut m = ComplexMatrix::zeros(2);
    for g in 0..a.len() {
        if g & bit != 0 {
            continue;
        }
        let h = g | bit;
        m[(0, 0)] += a[g] * b[g].conj();
        m[(0, 1)] += a[g] * b[h].conj();
        m[(1, 0)] += a[h] * b[g].conj();
        m[(1, 1)] += a[h] * b[h].conj();
    }
    m
}

/// `ρ_S(t) = Tr_E[U (ρ_S ⊗ ρ_E) U^†]` with the probe on `probe_site`.
pub fn apply_channel(
    u: &ComplexMatrix,
    rho_env: &ComplexMatrix,
    rho_probe: &ComplexMatrix,
    probe_site: usize,
) -> Result<ComplexMatrix> {
    let length = chain_length(u)?;
    if rho_probe.dim() != PROBE_DIM || rho_env.dim() * PROBE_DIM != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "probe {} and environment {} do not match a {}-dimensional unitary",
            rho_probe.dim(),
            rho_env.dim(),
            u.dim()
        )));
    }
    Environment::Density(rho_env).validate()?;
    if (rho_probe.trace() - ONE).norm() > TRACE_TOL {
        return Err(Error::Validation("probe state must have unit trace".into()));
    }
    reduced_map_dense(u, rho_env, rho_probe, length, probe_site)
}

/// Choi state of the channel induced on `probe_site` by `U` with the given
/// environment.
pub fn choi_from_unitary(u: &ComplexMatrix, env: Environment<'_>, probe_site: usize) -> Result<QubitChannel> {
    let images = basis_images(u, env, probe_site)?;
    QubitChannel::from_basis_images(&images)
}

#[derive(Clone, Debug, PartialEq)]
pub struct QubitChannel {
    choi: ComplexMatrix,
}

impl QubitChannel {
    /// Validates complete positivity and trace preservation.
    pub fn from_choi(choi: ComplexMatrix) -> Result<Self> {
        if choi.dim() != PROBE_DIM * PROBE_DIM {
            return Err(Error::DimensionMismatch(format!("Choi matrix of dimension {}", choi.dim())));
        }
        let herm = choi.hermiticity_defect();
        if herm > TRACE_TOL {
            return Err(Error::NonHermitian(herm));
        }
        let tr = choi.trace();
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::Validation(format!("Choi trace is {tr}, expected 1")));
        }
        let min_eig = eigvalsh(&choi)?[0];
        if min_eig < -PSD_TOL {
            return Err(Error::Validation(format!(
                "Choi matrix is not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        let marginal = partial_trace(&choi, 2, &[1])?;
        let half = ComplexMatrix::identity(PROBE_DIM).scale(Complex64::new(0.5, 0.0));
        let tp = marginal.max_abs_diff(&half);
        if tp > MARGINAL_TOL {
            return Err(Error::Validation(format!(
                "channel is not trace preserving (output marginal off by {tp:e})"
            )));
        }
        Ok(Self { choi })
    }

    fn from_basis_images(images: &[[ComplexMatrix; 2]; 2]) -> Result<Self> {
        let mut choi = ComplexMatrix::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                for s in 0..2 {
                    for s2 in 0..2 {
                        choi[(2 * s + i, 2 * s2 + j)] = images[i][j][(s, s2)] * 0.5;
                    }
                }
            }
        }
        Self::from_choi(choi)
    }

    /// Channel with Kraus operators `K_k`.
    pub fn from_kraus(kraus: &[ComplexMatrix]) -> Result<Self> {
        if kraus.iter().any(|k| k.dim() != PROBE_DIM) {
            return Err(Error::DimensionMismatch("Kraus operators must be 2x2".into()));
        }
        let mut images: [[ComplexMatrix; 2]; 2] = Default::default();
        for (i, row) in images.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                let mut acc = ComplexMatrix::zeros(2);
                for k in kraus {
                    for s in 0..2 {
                        for s2 in 0..2 {
                            acc[(s, s2)] += k[(s, i)] * k[(s2, j)].conj();
                        }
                    }
                }
                *slot = acc;
            }
        }
        Self::from_basis_images(&images)
    }

    pub fn identity() -> Self {
        Self::unitary(&ComplexMatrix::identity(PROBE_DIM)).expect("identity is unitary")
    }

    pub fn unitary(u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != PROBE_DIM || u.unitarity_defect() > 1e-10 {
            return Err(Error::Validation("not a 2x2 unitary".into()));
        }
        Self::from_kraus(std::slice::from_ref(u))
    }

    /// Maps every input to `I/2`; Choi matrix `I/4`.
    pub fn completely_depolarizing() -> Self {
        Self::from_choi(ComplexMatrix::identity(4).scale(Complex64::new(0.25, 0.0))).expect("valid")
    }

    pub fn choi(&self) -> &ComplexMatrix {
        &self.choi
    }

    /// `E(ρ) = d · Tr_ref[D (I ⊗ ρᵀ)]`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = PROBE_DIM as f64;
        ComplexMatrix::from_fn(PROBE_DIM, |s, s2| {
            let mut acc = ZERO;
            for i in 0..PROBE_DIM {
                for j in 0..PROBE_DIM {
                    acc += self.choi[(2 * s + i, 2 * s2 + j)] * rho[(i, j)];
                }
            }
            acc * d
        })
    }

    /// `Tr[D²]`.
    pub fn choi_purity(&self) -> f64 {
        self.choi.frobenius_norm_sqr()
    }

    /// `(1/d²) Σ_kl Tr[E(|k><l|) E(|l><k|)]`; equals [`Self::choi_purity`].
    pub fn choi_purity_from_basis_action(&self) -> f64 {
        let unit = |i: usize, j: usize| {
            let mut m = ComplexMatrix::zeros(2);
            m[(i, j)] = ONE;
            m
        };
        let mut acc = ZERO;
        for k in 0..PROBE_DIM {
            for l in 0..PROBE_DIM {
                acc += self.apply(&unit(k, l)).trace_product(&self.apply(&unit(l, k)));
            }
        }
        acc.re / (PROBE_DIM * PROBE_DIM) as f64
    }

    /// `Tr[E(I)²]`, with `E(I) = d · Tr_ref[D]`.
    pub fn unitality_term(&self) -> f64 {
        let e_identity = partial_trace(&self.choi, 2, &[2])
            .expect("4x4")
            .scale(Complex64::new(PROBE_DIM as f64, 0.0));
        e_identity.frobenius_norm_sqr()
    }

    /// Mean output purity over Haar-random pure inputs,
    /// `[Tr E(I)² + d² Tr D²] / (d(d+1))`.
    pub fn haar_averaged_output_purity(&self) -> f64 {
        let d = PROBE_DIM as f64;
        (self.unitality_term() + d * d * self.choi_purity()) / (d * (d + 1.0))
    }

    pub fn pauli_transfer_matrix(&self) -> PauliTransferMatrix {
        let mut r = [[0.0; 4]; 4];
        for (nu, row_label) in PauliLabel::ALL.iter().enumerate() {
            let image = self.apply(&row_label.matrix());
            for (mu, label) in PauliLabel::ALL.iter().enumerate() {
                r[mu][nu] = 0.5 * label.matrix().trace_product(&image).re;
            }
        }
        PauliTransferMatrix { r }
    }

    /// Partial transpose on the reference factor.
    pub fn partial_transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(4, |a, b| {
            let (s, i) = (a / 2, a % 2);
            let (s2, j) = (b / 2, b % 2);
            self.choi[(2 * s + j, 2 * s2 + i)]
        })
    }

    /// Positive partial transpose, which is equivalent to separability of
    /// the 2⊗2 Choi state.
    pub fn is_entanglement_breaking(&self) -> bool {
        eigvalsh(&self.partial_transpose()).map(|e| e[0] >= -PSD_TOL).unwrap_or(false)
    }
}

/// Amplitude damping towards `|0>` with decay probability `gamma`.
pub fn amplitude_damping_channel(gamma: f64) -> Result<QubitChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::OutOfRange {
            name: "gamma",
            value: gamma,
            range: "[0, 1]",
        });
    }
    let k0 = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, (1.0 - gamma).sqrt()]])?;
    let k1 = ComplexMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?;
    QubitChannel::from_kraus(&[k0, k1])
}

/// `R_μν = ½ Tr[σ_μ E(σ_ν)]` with `μ, ν ∈ {0, x, y, z}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTransferMatrix {
    pub r: [[f64; 4]; 4],
}

impl PauliTransferMatrix {
    /// Determinant of the 3×3 Bloch block: the signed volume ratio of the
    /// image ellipsoid to the Bloch ball.
    pub fn bloch_volume_factor(&self) -> f64 {
        let m = |i: usize, j: usize| self.r[i + 1][j + 1];
        m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
            + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
    }

    /// Image of the Bloch-ball centre.
    pub fn translation(&self) -> [f64; 3] {
        [self.r[1][0], self.r[2][0], self.r[3][0]]
    }

    pub fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.r.iter().flatten().copied()
    }
}

/// Writes `t,R00,...,R33,bloch_volume`.
pub fn write_ptm_csv<W: Write>(out: W, series: &[(f64, PauliTransferMatrix)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    for mu in 0..4 {
        for nu in 0..4 {
            header.push(format!("R{mu}{nu}"));
        }
    }
    header.push("bloch_volume".into());
    w.write_record(&header)?;
    for (t, ptm) in series {
        let mut row = vec![t.to_string()];
        row.extend(ptm.entries().map(|x| x.to_string()));
        row.push(ptm.bloch_volume_factor().to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Bell state `|Φ⁺>` on output ⊗ reference.
pub fn bell_state() -> [Complex64; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    [h, ZERO, ZERO, h]
}
