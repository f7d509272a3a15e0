//! The three chain Hamiltonians, kept as weighted Pauli sums so they can be
//! materialized densely or directly inside a symmetry sector.
//!
//! Conventions, all with open boundaries:
//!
//! * mixed-field Ising: `Σ (hx σˣ + hz σᶻ) − J Σ σᶻσᶻ`
//! * random-field Heisenberg: `¼ Σ σ⃗·σ⃗ + ½ Σ hᵢ σᶻᵢ`, `hᵢ ~ U[−h, h]`
//! * XXZ with defect: `¼ Σ [Jxy (σˣσˣ + σʸσʸ) + Jz σᶻσᶻ] + ½ ε σᶻ_d`

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use crate::spectra::eigvalsh;
use crate::spinops::{
    basis_phase, n_up, reflect, sector_basis, ComplexMatrix, PauliLabel, PauliString, SectorBasis, SectorKind,
};

/// Largest chain materialized as a dense `2^L × 2^L` matrix (1 GiB at 13 sites).
pub const MAX_DENSE_SITES: usize = 13;

const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
struct Term {
    coeff: f64,
    flip: usize,
    zmask: usize,
    n_y: usize,
}

/// A Hermitian operator `Σ_k c_k σ_k` with real coefficients.
#[derive(Clone, Debug)]
pub struct SpinHamiltonian {
    length: usize,
    strings: Vec<(f64, PauliString)>,
    terms: Vec<Term>,
}

impl SpinHamiltonian {
    pub fn new(length: usize) -> Self {
        Self {
            length,
            strings: Vec::new(),
            terms: Vec::new(),
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn terms(&self) -> &[(f64, PauliString)] {
        &self.strings
    }

    pub fn push(&mut self, coeff: f64, string: PauliString) -> Result<()> {
        if string.len() != self.length {
            return Err(Error::DimensionMismatch(format!(
                "term on {} sites added to a {}-site Hamiltonian",
                string.len(),
                self.length
            )));
        }
        if !coeff.is_finite() {
            return Err(Error::Validation(format!("non-finite coefficient {coeff}")));
        }
        let (flip, zmask, n_y) = string.masks();
        self.terms.push(Term {
            coeff,
            flip,
            zmask,
            n_y,
        });
        self.strings.push((coeff, string));
        Ok(())
    }

    fn push_sites(&mut self, coeff: f64, ops: &[(usize, PauliLabel)]) -> Result<()> {
        let s = PauliString::from_sites(self.length, ops)?;
        self.push(coeff, s)
    }

    /// True when the matrix has only real entries in the computational basis.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.n_y % 2 == 0)
    }

    /// Exchanges two sites in every term.
    pub fn swap_sites(&self, a: usize, b: usize) -> Result<Self> {
        if a == 0 || a > self.length {
            return Err(Error::InvalidSite { site: a, length: self.length });
        }
        if b == 0 || b > self.length {
            return Err(Error::InvalidSite { site: b, length: self.length });
        }
        let mut out = Self::new(self.length);
        for (c, s) in &self.strings {
            let mut labels = s.labels().to_vec();
            labels.swap(a - 1, b - 1);
            out.push(*c, PauliString::new(labels))?;
        }
        Ok(out)
    }

    /// `H|s> = Σ amp |s'>` (entries may repeat `s'`).
    pub fn apply_to_basis(&self, state: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.terms
            .iter()
            .map(move |t| (state ^ t.flip, basis_phase(state, t.zmask, t.n_y) * t.coeff))
    }

    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        if self.length > MAX_DENSE_SITES {
            return Err(Error::Size {
                what: "dense Hamiltonian",
                requested: self.length,
                limit: MAX_DENSE_SITES,
            });
        }
        let dim = 1usize << self.length;
        let mut m = ComplexMatrix::zeros(dim);
        for col in 0..dim {
            for (row, amp) in self.apply_to_basis(col) {
                m[(row, col)] += amp;
            }
        }
        Ok(m)
    }

    /// Builds `B^† H B` without materializing the full matrix. Fails with a
    /// symmetry error if `H` maps the sector outside itself.
    pub fn sector_matrix(&self, basis: &SectorBasis) -> Result<ComplexMatrix> {
        if basis.length() != self.length {
            return Err(Error::DimensionMismatch(format!(
                "{}-site sector for a {}-site Hamiltonian",
                basis.length(),
                self.length
            )));
        }
        let dim = basis.dim();
        let scale: f64 = self.terms.iter().map(|t| t.coeff.abs()).sum::<f64>().max(1.0);
        let mut out = ComplexMatrix::zeros(dim);
        let mut scratch = vec![Complex64::new(0.0, 0.0); basis.full_dim()];
        let mut seen = vec![false; basis.full_dim()];
        let mut touched: Vec<usize> = Vec::new();
        let mut column = vec![Complex64::new(0.0, 0.0); dim];
        for j in 0..dim {
            for &(s, a) in basis.vector(j) {
                for (t, amp) in self.apply_to_basis(s) {
                    if !seen[t] {
                        seen[t] = true;
                        touched.push(t);
                    }
                    scratch[t] += amp * a;
                }
            }
            for &t in &touched {
                if let Some((i, amp)) = basis.locate(t) {
                    column[i] += scratch[t] * amp;
                }
            }
            let mut leak_sqr = 0.0;
            for &t in &touched {
                let projected = match basis.locate(t) {
                    Some((i, amp)) => column[i] * amp,
                    None => Complex64::new(0.0, 0.0),
                };
                leak_sqr += (scratch[t] - projected).norm_sqr();
            }
            for (i, c) in column.iter_mut().enumerate() {
                if *c != Complex64::new(0.0, 0.0) {
                    out[(i, j)] = *c;
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            let leak = leak_sqr.sqrt();
            if leak > SYMMETRY_TOL * scale {
                return Err(Error::Symmetry(format!(
                    "sector {} basis vector {j} leaks norm {leak:e}",
                    basis.kind()
                )));
            }
            for &t in &touched {
                scratch[t] = Complex64::new(0.0, 0.0);
                seen[t] = false;
            }
            touched.clear();
        }
        Ok(out)
    }
}

impl SpinHamiltonian {
    /// Ascending eigenvalues of the block in one symmetry sector.
    pub fn sector_levels(&self, kind: SectorKind) -> Result<Vec<f64>> {
        let basis = sector_basis(self.length, kind)?;
        eigvalsh(&self.sector_matrix(&basis)?)
    }
}

fn check_length(length: usize) -> Result<()> {
    if length < 2 {
        return Err(Error::Validation(format!("chain length must be >= 2, got {length}")));
    }
    Ok(())
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            range: "finite reals",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub length: usize,
    pub hx: f64,
    pub hz: f64,
    pub j: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergParams {
    pub length: usize,
    /// Disorder strength: fields are drawn from `[−h, h]`.
    pub h: f64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct XxzDefectParams {
    pub length: usize,
    pub jxy: f64,
    pub jz: f64,
    pub eps: f64,
    /// 1-based defect site.
    pub defect_site: usize,
}

/// Default defect placement: `⌊L/2⌋`, which is never the reflection axis
/// (3 for seven sites, 9 for eighteen).
pub fn default_defect_site(length: usize) -> usize {
    (length / 2).max(1)
}

pub fn mixed_field_ising(p: &IsingParams) -> Result<SpinHamiltonian> {
    check_length(p.length)?;
    check_finite("hx", p.hx)?;
    check_finite("hz", p.hz)?;
    check_finite("J", p.j)?;
    let mut h = SpinHamiltonian::new(p.length);
    for i in 1..=p.length {
        h.push_sites(p.hx, &[(i, PauliLabel::X)])?;
        h.push_sites(p.hz, &[(i, PauliLabel::Z)])?;
    }
    for i in 1..p.length {
        h.push_sites(-p.j, &[(i, PauliLabel::Z), (i + 1, PauliLabel::Z)])?;
    }
    Ok(h)
}

/// Draws the random fields `hᵢ ∈ [−h, h]` of one disorder realization.
pub fn heisenberg_fields(p: &HeisenbergParams) -> Vec<f64> {
    let mut rng = rng_from_seed(p.seed);
    (0..p.length)
        .map(|_| p.h * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

pub fn random_field_heisenberg(p: &HeisenbergParams) -> Result<(SpinHamiltonian, Vec<f64>)> {
    check_length(p.length)?;
    if !(p.h >= 0.0 && p.h.is_finite()) {
        return Err(Error::OutOfRange {
            name: "h",
            value: p.h,
            range: "[0, inf)",
        });
    }
    let fields = heisenberg_fields(p);
    let mut h = SpinHamiltonian::new(p.length);
    for i in 1..p.length {
        for label in [PauliLabel::X, PauliLabel::Y, PauliLabel::Z] {
            h.push_sites(0.25, &[(i, label), (i + 1, label)])?;
        }
    }
    for (i, &hi) in fields.iter().enumerate() {
        h.push_sites(0.5 * hi, &[(i + 1, PauliLabel::Z)])?;
    }
    Ok((h, fields))
}

pub fn xxz_defect(p: &XxzDefectParams) -> Result<SpinHamiltonian> {
    check_length(p.length)?;
    check_finite("Jxy", p.jxy)?;
    check_finite("Jz", p.jz)?;
    check_finite("eps", p.eps)?;
    let d = p.defect_site;
    if d == 0 || d > p.length {
        return Err(Error::InvalidSite {
            site: d,
            length: p.length,
        });
    }
    if 2 * d == p.length + 1 {
        return Err(Error::Validation(format!(
            "defect site {d} lies on the reflection axis of a {}-site chain",
            p.length
        )));
    }
    let mut h = SpinHamiltonian::new(p.length);
    for i in 1..p.length {
        h.push_sites(0.25 * p.jxy, &[(i, PauliLabel::X), (i + 1, PauliLabel::X)])?;
        h.push_sites(0.25 * p.jxy, &[(i, PauliLabel::Y), (i + 1, PauliLabel::Y)])?;
        h.push_sites(0.25 * p.jz, &[(i, PauliLabel::Z), (i + 1, PauliLabel::Z)])?;
    }
    h.push_sites(0.5 * p.eps, &[(d, PauliLabel::Z)])?;
    Ok(h)
}

pub fn build_mixed_field_ising(p: &IsingParams) -> Result<ComplexMatrix> {
    mixed_field_ising(p)?.to_dense()
}

/// Dense Hamiltonian plus the realized fields `hᵢ`.
pub fn build_random_field_heisenberg(p: &HeisenbergParams) -> Result<(ComplexMatrix, Vec<f64>)> {
    let (h, fields) = random_field_heisenberg(p)?;
    Ok((h.to_dense()?, fields))
}

pub fn build_xxz_defect(p: &XxzDefectParams) -> Result<ComplexMatrix> {
    xxz_defect(p)?.to_dense()
}

/// `max |[H, R]|` for the reflection permutation `R`.
pub fn reflection_commutator(h: &ComplexMatrix, length: usize) -> f64 {
    let dim = h.dim();
    let mut worst = 0.0f64;
    for i in 0..dim {
        let ri = reflect(i, length);
        for j in 0..dim {
            let rj = reflect(j, length);
            worst = worst.max((h[(i, rj)] - h[(ri, j)]).norm());
        }
    }
    worst
}

/// Largest matrix element connecting different magnetization sectors,
/// i.e. `max |[H, M_z]|` up to the integer factor `2ΔN↑`.
pub fn magnetization_leakage(h: &ComplexMatrix, length: usize) -> f64 {
    let dim = h.dim();
    let mut worst = 0.0f64;
    for i in 0..dim {
        let ni = n_up(i, length);
        for j in 0..dim {
            if n_up(j, length) != ni {
                worst = worst.max(h[(i, j)].norm());
            }
        }
    }
    worst
}

/// Projects a dense Hamiltonian into a sector after checking that it
/// commutes with the sector's symmetry.
pub fn project_to_sector(h: &ComplexMatrix, basis: &SectorBasis) -> Result<ComplexMatrix> {
    let length = basis.length();
    if h.dim() != basis.full_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator of dimension {} for a {length}-site sector",
            h.dim()
        )));
    }
    let defect = match basis.kind() {
        SectorKind::Full => 0.0,
        SectorKind::Parity(_) => reflection_commutator(h, length),
        SectorKind::Magnetization { .. } => magnetization_leakage(h, length),
    };
    if defect > SYMMETRY_TOL {
        return Err(Error::Symmetry(format!(
            "commutator with the {} symmetry is {defect:e}",
            basis.kind()
        )));
    }
    Ok(basis.compress(h))
}

/// Model selection with parameters, as used by sweeps and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Ising(IsingParams),
    Heisenberg(HeisenbergParams),
    XxzDefect(XxzDefectParams),
}

impl ModelSpec {
    pub fn length(&self) -> usize {
        match self {
            ModelSpec::Ising(p) => p.length,
            ModelSpec::Heisenberg(p) => p.length,
            ModelSpec::XxzDefect(p) => p.length,
        }
    }

    pub fn hamiltonian(&self) -> Result<SpinHamiltonian> {
        match self {
            ModelSpec::Ising(p) => mixed_field_ising(p),
            ModelSpec::Heisenberg(p) => random_field_heisenberg(p).map(|(h, _)| h),
            ModelSpec::XxzDefect(p) => xxz_defect(p),
        }
    }
}
