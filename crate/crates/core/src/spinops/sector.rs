//! Symmetry-sector bases: U(1) magnetization and reflection parity.
//!
//! Basis vectors are stored sparsely as `(basis state, amplitude)` pairs;
//! every basis state belongs to at most one vector, which makes projection
//! onto the sector a table lookup.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectorKind {
    Full,
    /// Fixed number of up spins (`σ^z = +1`, bit value 0).
    Magnetization { n_up: usize },
    Parity(Parity),
}

impl fmt::Display for SectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectorKind::Full => write!(f, "full"),
            SectorKind::Magnetization { n_up } => write!(f, "nup={n_up}"),
            SectorKind::Parity(Parity::Even) => write!(f, "even"),
            SectorKind::Parity(Parity::Odd) => write!(f, "odd"),
        }
    }
}

/// Parses `full`, `even`, `odd` or `nup=K`.
impl FromStr for SectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SectorKind::Full),
            "even" => Ok(SectorKind::Parity(Parity::Even)),
            "odd" => Ok(SectorKind::Parity(Parity::Odd)),
            _ => s
                .strip_prefix("nup=")
                .and_then(|k| k.parse().ok())
                .map(|n_up| SectorKind::Magnetization { n_up })
                .ok_or_else(|| Error::Validation(format!("unknown sector '{s}' (full, even, odd, nup=K)"))),
        }
    }
}

/// Mirror image of a basis state under site `i ↔ L - i + 1`.
pub fn reflect(state: usize, length: usize) -> usize {
    let mut out = 0usize;
    for k in 0..length {
        if state >> k & 1 == 1 {
            out |= 1 << (length - 1 - k);
        }
    }
    out
}

/// Number of up spins (zero bits) in a basis state.
pub fn n_up(state: usize, length: usize) -> usize {
    length - state.count_ones() as usize
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Clone, Debug)]
pub struct SectorBasis {
    length: usize,
    kind: SectorKind,
    vectors: Vec<Vec<(usize, f64)>>,
    /// For each basis state: the vector containing it and its amplitude there.
    lookup: Vec<Option<(u32, f64)>>,
}

impl SectorBasis {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn kind(&self) -> SectorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn full_dim(&self) -> usize {
        1 << self.length
    }

    pub fn vector(&self, index: usize) -> &[(usize, f64)] {
        &self.vectors[index]
    }

    pub fn vectors(&self) -> &[Vec<(usize, f64)>] {
        &self.vectors
    }

    /// `(vector index, amplitude)` of a computational basis state, if the
    /// state lies in the support of the sector.
    pub fn locate(&self, state: usize) -> Option<(usize, f64)> {
        self.lookup[state].map(|(i, a)| (i as usize, a))
    }

    /// Dense column representation, `2^L` rows by `dim` columns, row-major.
    pub fn to_dense_columns(&self) -> Vec<Vec<Complex64>> {
        let mut cols = vec![vec![Complex64::new(0.0, 0.0); self.dim()]; self.full_dim()];
        for (j, v) in self.vectors.iter().enumerate() {
            for &(s, a) in v {
                cols[s][j] = Complex64::new(a, 0.0);
            }
        }
        cols
    }

    /// `max |B^† B - I|` computed from the sparse representation.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, v) in self.vectors.iter().enumerate() {
            for (j, w) in self.vectors.iter().enumerate() {
                let overlap: f64 = v
                    .iter()
                    .map(|&(s, a)| w.iter().filter(|&&(t, _)| t == s).map(|&(_, b)| a * b).sum::<f64>())
                    .sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((overlap - expected).abs());
            }
        }
        worst
    }

    /// `B^† H B` for a dense operator on the full chain.
    pub fn compress(&self, h: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim(), |a, b| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(s, x) in &self.vectors[a] {
                for &(t, y) in &self.vectors[b] {
                    acc += h[(s, t)] * (x * y);
                }
            }
            acc
        })
    }

    fn from_vectors(length: usize, kind: SectorKind, vectors: Vec<Vec<(usize, f64)>>) -> Self {
        let mut lookup = vec![None; 1 << length];
        for (i, v) in vectors.iter().enumerate() {
            for &(s, a) in v {
                lookup[s] = Some((i as u32, a));
            }
        }
        Self {
            length,
            kind,
            vectors,
            lookup,
        }
    }
}

/// Largest chain for which a sector basis is built (the lookup table is `2^L` entries).
pub const MAX_SECTOR_SITES: usize = 24;

pub fn sector_basis(length: usize, kind: SectorKind) -> Result<SectorBasis> {
    if length < 2 {
        return Err(Error::Validation(format!("sector bases need L >= 2, got {length}")));
    }
    if length > MAX_SECTOR_SITES {
        return Err(Error::Size {
            what: "sector basis",
            requested: length,
            limit: MAX_SECTOR_SITES,
        });
    }
    let full = 1usize << length;
    let vectors: Vec<Vec<(usize, f64)>> = match kind {
        SectorKind::Full => (0..full).map(|s| vec![(s, 1.0)]).collect(),
        SectorKind::Magnetization { n_up: k } => {
            if k > length {
                return Err(Error::OutOfRange {
                    name: "n_up",
                    value: k as f64,
                    range: "[0, L]",
                });
            }
            (0..full)
                .filter(|&s| n_up(s, length) == k)
                .map(|s| vec![(s, 1.0)])
                .collect()
        }
        SectorKind::Parity(parity) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let sign = match parity {
                Parity::Even => 1.0,
                Parity::Odd => -1.0,
            };
            (0..full)
                .filter_map(|s| {
                    let r = reflect(s, length);
                    match (s.cmp(&r), parity) {
                        (std::cmp::Ordering::Equal, Parity::Even) => Some(vec![(s, 1.0)]),
                        (std::cmp::Ordering::Less, _) => Some(vec![(s, h), (r, sign * h)]),
                        _ => None,
                    }
                })
                .collect()
        }
    };
    Ok(SectorBasis::from_vectors(length, kind, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_names_roundtrip() {
        for kind in [
            SectorKind::Full,
            SectorKind::Parity(Parity::Even),
            SectorKind::Parity(Parity::Odd),
            SectorKind::Magnetization { n_up: 3 },
        ] {
            assert_eq!(kind.to_string().parse::<SectorKind>().unwrap(), kind);
        }
        assert!("nup=x".parse::<SectorKind>().is_err());
        assert!("sideways".parse::<SectorKind>().is_err());
    }

    #[test]
    fn magnetization_dims_are_binomial() {
        assert_eq!(sector_basis(4, SectorKind::Magnetization { n_up: 2 }).unwrap().dim(), 6);
        // The N↑ = 7 sector of an 18-site chain.
        assert_eq!(binomial(18, 7), 31_824);
        assert_eq!(sector_basis(18, SectorKind::Magnetization { n_up: 7 }).unwrap().dim(), 31_824);
        for (k, d) in [(4, 3_060), (5, 8_568), (6, 18_564), (13, 8_568)] {
            assert_eq!(binomial(18, k), d);
        }
    }

    #[test]
    fn two_site_even_sector_by_enumeration() {
        let b = sector_basis(2, SectorKind::Parity(Parity::Even)).unwrap();
        assert_eq!(b.dim(), 3);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(b.vector(0), &[(0b00, 1.0)]);
        assert_eq!(b.vector(1), &[(0b01, h), (0b10, h)]);
        assert_eq!(b.vector(2), &[(0b11, 1.0)]);
        let odd = sector_basis(2, SectorKind::Parity(Parity::Odd)).unwrap();
        assert_eq!(odd.vectors(), &[vec![(0b01, h), (0b10, -h)]]);
    }

    #[test]
    fn even_dimension_formula_for_even_lengths() {
        for length in [2usize, 4, 6, 8, 10, 12, 16] {
            let even = sector_basis(length, SectorKind::Parity(Parity::Even)).unwrap();
            let expected = ((1usize << length) + (1usize << length.div_ceil(2))) / 2;
            assert_eq!(even.dim(), expected, "L = {length}");
        }
        // 32 896 for sixteen sites.
        assert_eq!(sector_basis(16, SectorKind::Parity(Parity::Even)).unwrap().dim(), 32_896);
    }

    #[test]
    fn sectors_are_complete_and_orthonormal() {
        for length in 2..=7 {
            let total: usize = (0..=length)
                .map(|k| sector_basis(length, SectorKind::Magnetization { n_up: k }).unwrap().dim())
                .sum();
            assert_eq!(total, 1 << length);
            let even = sector_basis(length, SectorKind::Parity(Parity::Even)).unwrap();
            let odd = sector_basis(length, SectorKind::Parity(Parity::Odd)).unwrap();
            assert_eq!(even.dim() + odd.dim(), 1 << length);
            assert!(even.orthonormality_defect() < 1e-12);
            assert!(odd.orthonormality_defect() < 1e-12);
        }
    }

    #[test]
    fn out_of_range_n_up() {
        assert!(matches!(
            sector_basis(4, SectorKind::Magnetization { n_up: 5 }),
            Err(Error::OutOfRange { .. })
        ));
        assert!(sector_basis(1, SectorKind::Full).is_err());
    }

    #[test]
    fn reflection_is_an_involution() {
        for s in 0..128 {
            assert_eq!(reflect(reflect(s, 7), 7), s);
        }
        assert_eq!(reflect(0b0011, 4), 0b1100);
    }
}
