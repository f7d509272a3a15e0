//! Pauli labels and Pauli strings on a chain.
//!
//! Sites are 1-based; site 1 is the leftmost tensor factor and maps to the
//! most significant bit of a computational-basis index. `|0>` is the
//! `σ^z = +1` (spin-up) state.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, ONE, ZERO};
use crate::error::{Error, Result};

/// Largest chain handled by dense Pauli-string materialization.
pub const DEFAULT_MAX_SITES: usize = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PauliLabel {
    I,
    X,
    Y,
    Z,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::I, PauliLabel::X, PauliLabel::Y, PauliLabel::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let i = Complex64::i();
        let data = match self {
            PauliLabel::I => vec![ONE, ZERO, ZERO, ONE],
            PauliLabel::X => vec![ZERO, ONE, ONE, ZERO],
            PauliLabel::Y => vec![ZERO, -i, i, ZERO],
            PauliLabel::Z => vec![ONE, ZERO, ZERO, -ONE],
        };
        ComplexMatrix::from_row_major(2, data).expect("2x2")
    }

    pub fn is_identity(self) -> bool {
        self == PauliLabel::I
    }

    /// Index in the ordering `{0, x, y, z}`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i & 3]
    }

    fn flips(self) -> bool {
        matches!(self, PauliLabel::X | PauliLabel::Y)
    }

    fn has_z(self) -> bool {
        matches!(self, PauliLabel::Z | PauliLabel::Y)
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            PauliLabel::I => '0',
            PauliLabel::X => 'x',
            PauliLabel::Y => 'y',
            PauliLabel::Z => 'z',
        };
        write!(f, "{c}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    labels: Vec<PauliLabel>,
}

impl PauliString {
    pub fn new(labels: Vec<PauliLabel>) -> Self {
        Self { labels }
    }

    pub fn identity(len: usize) -> Self {
        Self::new(vec![PauliLabel::I; len])
    }

    /// Identity everywhere except the listed `(site, label)` pairs.
    pub fn from_sites(len: usize, ops: &[(usize, PauliLabel)]) -> Result<Self> {
        let mut labels = vec![PauliLabel::I; len];
        for &(site, label) in ops {
            if site == 0 || site > len {
                return Err(Error::InvalidSite { site, length: len });
            }
            labels[site - 1] = label;
        }
        Ok(Self::new(labels))
    }

    /// Decodes the base-4 integer `index` into a string of `len` labels, the
    /// first label in the most significant digit.
    pub fn from_index(len: usize, mut index: usize) -> Self {
        let mut labels = vec![PauliLabel::I; len];
        for slot in labels.iter_mut().rev() {
            *slot = PauliLabel::from_index(index & 3);
            index >>= 2;
        }
        Self::new(labels)
    }

    pub fn labels(&self) -> &[PauliLabel] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of non-identity labels.
    pub fn weight(&self) -> usize {
        self.labels.iter().filter(|l| !l.is_identity()).count()
    }

    /// Prepends identity on a new leftmost site.
    pub fn with_identity_prefix(&self) -> Self {
        let mut labels = Vec::with_capacity(self.len() + 1);
        labels.push(PauliLabel::I);
        labels.extend_from_slice(&self.labels);
        Self::new(labels)
    }

    /// Bit masks of sites that flip (`x`, `y`) and that carry a `σ^z`
    /// factor (`z`, `y`), plus the number of `y` labels.
    pub fn masks(&self) -> (usize, usize, usize) {
        let n = self.len();
        let mut flip = 0usize;
        let mut zmask = 0usize;
        let mut n_y = 0usize;
        for (k, label) in self.labels.iter().enumerate() {
            let bit = 1usize << (n - 1 - k);
            if label.flips() {
                flip |= bit;
            }
            if label.has_z() {
                zmask |= bit;
            }
            if *label == PauliLabel::Y {
                n_y += 1;
            }
        }
        (flip, zmask, n_y)
    }

    /// `σ|s> = phase |s'>`; returns `(s', phase)`.
    pub fn apply_to_basis(&self, state: usize) -> (usize, Complex64) {
        let (flip, zmask, n_y) = self.masks();
        (state ^ flip, basis_phase(state, zmask, n_y))
    }
}

#[inline]
pub(crate) fn i_power(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

#[inline]
pub(crate) fn basis_phase(state: usize, zmask: usize, n_y: usize) -> Complex64 {
    let sign = if (state & zmask).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    };
    i_power(n_y) * sign
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.labels {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_lowercase() {
                '0' | 'i' => Ok(PauliLabel::I),
                'x' => Ok(PauliLabel::X),
                'y' => Ok(PauliLabel::Y),
                'z' => Ok(PauliLabel::Z),
                other => Err(Error::Validation(format!("unknown Pauli label '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString::new)
    }
}

/// Dense matrix of a Pauli string, limited to [`DEFAULT_MAX_SITES`] sites.
pub fn pauli_string_matrix(s: &PauliString) -> Result<ComplexMatrix> {
    pauli_string_matrix_with_limit(s, DEFAULT_MAX_SITES)
}

/// Builds the matrix row by row: every Pauli string has exactly one nonzero
/// per row, at column `row ^ flip`.
pub fn pauli_string_matrix_with_limit(s: &PauliString, max_sites: usize) -> Result<ComplexMatrix> {
    let n = s.len();
    if n > max_sites {
        return Err(Error::Size {
            what: "Pauli string materialization",
            requested: n,
            limit: max_sites,
        });
    }
    let dim = 1usize << n;
    let (flip, zmask, n_y) = s.masks();
    let mut m = ComplexMatrix::zeros(dim);
    // <r|σ|c> is nonzero for c = r ^ flip with the phase picked up by |c>.
    for row in 0..dim {
        let col = row ^ flip;
        m[(row, col)] = basis_phase(col, zmask, n_y);
    }
    Ok(m)
}
