//! Choi echo for one fixed environment state.

use num_complex::Complex64;

use super::{check_probe, CheckedUnitary};
use crate::channel::{choi_from_unitary, Environment};
use crate::error::{Error, Result};
use crate::spinops::{embed_probe, merge_probe_index, partial_trace, ComplexMatrix, ZERO};

const PURE_TOL: f64 = 1e-10;

/// The echo evaluated three independent ways.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EchoPaths {
    /// Forward evolution, local depolarization, backward evolution, overlap
    /// with the initial environment.
    pub protocol: f64,
    /// `Tr[ρ_E(t)²]` with `ρ_E(t) = Tr_S[U (I/2 ⊗ ρ_E) U†]`.
    pub environment_purity: f64,
    /// `Tr[D²]` of the Choi matrix built from the channel.
    pub choi_purity: f64,
}

impl EchoPaths {
    pub fn max_disagreement(&self) -> f64 {
        let v = [self.protocol, self.environment_purity, self.choi_purity];
        let hi = v.iter().copied().fold(f64::MIN, f64::max);
        let lo = v.iter().copied().fold(f64::MAX, f64::min);
        hi - lo
    }
}

fn env_density(env: Environment<'_>) -> ComplexMatrix {
    match env {
        Environment::Pure(psi) => ComplexMatrix::outer(psi),
        Environment::Density(rho) => rho.clone(),
    }
}

fn require_pure(env: Environment<'_>, env_dim: usize) -> Result<()> {
    let (dim, purity) = match env {
        Environment::Pure(psi) => (psi.len(), psi.iter().map(|a| a.norm_sqr()).sum::<f64>().powi(2)),
        Environment::Density(rho) => (rho.dim(), rho.frobenius_norm_sqr()),
    };
    if dim != env_dim {
        return Err(Error::DimensionMismatch(format!(
            "environment of dimension {dim}, expected {env_dim}"
        )));
    }
    if (purity - 1.0).abs() > PURE_TOL {
        return Err(Error::MixedEnvironment(purity));
    }
    Ok(())
}

fn depolarized_environment(u: &ComplexMatrix, rho_env: &ComplexMatrix, length: usize, probe_site: usize) -> Result<ComplexMatrix> {
    let half = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
    let global = embed_probe(&half, rho_env, length, probe_site)?;
    partial_trace(&u.conjugate(&global), length, &[probe_site])
}

/// `<ψ| Tr_S[U† Λ_S[U (I/2 ⊗ |ψ><ψ|) U†] U] |ψ>` with
/// `Λ_S(X) = I/2 ⊗ Tr_S X`, evaluated on dense matrices.
pub fn choi_echo_protocol(u: &ComplexMatrix, env: Environment<'_>, probe_site: usize) -> Result<f64> {
    let CheckedUnitary { length, .. } = check_probe(u, probe_site)?;
    require_pure(env, u.dim() / 2)?;
    let rho_env = env_density(env);
    let rho_e_t = depolarized_environment(u, &rho_env, length, probe_site)?;
    let half = ComplexMatrix::identity(2).scale(Complex64::new(0.5, 0.0));
    let erased = embed_probe(&half, &rho_e_t, length, probe_site)?;
    let back = u.adjoint().conjugate(&erased);
    let returned = partial_trace(&back, length, &[probe_site])?;
    Ok(rho_env.trace_product(&returned).re)
}

/// Single-environment Choi echo, computed as the purity of the depolarized
/// environment. Fails for mixed environments, where the identity with the
/// Choi purity does not hold.
pub fn choi_echo_single_env(u: &ComplexMatrix, env: Environment<'_>, probe_site: usize) -> Result<f64> {
    let CheckedUnitary { length, .. } = check_probe(u, probe_site)?;
    require_pure(env, u.dim() / 2)?;
    match env {
        Environment::Pure(psi) => Ok(environment_purity_echo(u, psi, length, probe_site)),
        Environment::Density(rho) => Ok(depolarized_environment(u, rho, length, probe_site)?.frobenius_norm_sqr()),
    }
}

pub fn choi_echo_paths(u: &ComplexMatrix, env: Environment<'_>, probe_site: usize) -> Result<EchoPaths> {
    Ok(EchoPaths {
        protocol: choi_echo_protocol(u, env, probe_site)?,
        environment_purity: choi_echo_single_env(u, env, probe_site)?,
        choi_purity: choi_from_unitary(u, env, probe_site)?.choi_purity(),
    })
}

/// `Tr[ρ_E(t)²]` from the four environment vectors `<s| U |k, ψ>`:
/// `ρ_E = ½ Σ_{k,s} a_{ks} a_{ks}†`, so the purity is a quarter of the
/// squared Frobenius norm of their Gram matrix.
pub(crate) fn environment_purity_echo(u: &ComplexMatrix, psi: &[Complex64], length: usize, probe_site: usize) -> f64 {
    let de = psi.len();
    let mut a = [vec![ZERO; de], vec![ZERO; de], vec![ZERO; de], vec![ZERO; de]];
    for k in 0..2 {
        let cols: Vec<usize> = (0..de).map(|f| merge_probe_index(k, f, length, probe_site)).collect();
        for s in 0..2 {
            let slot = &mut a[2 * k + s];
            for (e, out) in slot.iter_mut().enumerate() {
                let row = u.row(merge_probe_index(s, e, length, probe_site));
                *out = cols.iter().zip(psi).map(|(&c, p)| row[c] * p).sum();
            }
        }
    }
    let mut total = 0.0;
    for i in 0..4 {
        for j in i..4 {
            let g: Complex64 = a[i].iter().zip(&a[j]).map(|(x, y)| x.conj() * y).sum();
            total += if i == j { g.norm_sqr() } else { 2.0 * g.norm_sqr() };
        }
    }
    total / 4.0
}
