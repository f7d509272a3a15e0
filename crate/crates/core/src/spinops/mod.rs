//! Linear algebra for spin-1/2 chains: dense operators, Pauli strings,
//! partial traces, random product states and symmetry-sector bases.

mod matrix;
mod pauli;
mod sector;
mod states;

pub use matrix::{kron, kron_vec, ComplexMatrix, ONE, ZERO};
pub use pauli::{
    pauli_string_matrix, pauli_string_matrix_with_limit, PauliLabel, PauliString, DEFAULT_MAX_SITES,
};
pub(crate) use pauli::basis_phase;
pub use sector::{binomial, n_up, reflect, sector_basis, Parity, SectorBasis, SectorKind, MAX_SECTOR_SITES};
pub use states::{
    embed_probe, haar_qubit, haar_unitary, partial_trace, purity, random_product_state, random_product_state_from_rng,
    single_site_marginal, single_site_purity, ProductState,
};
pub(crate) use states::{merge_probe_index, split_probe_index};
