//! Exact-statevector simulation of state-averaged VQE on active-space
//! electronic Hamiltonians.
//!
//! The crate provides:
//! - FCIDUMP parsing into an active-space Hamiltonian, compiled to sparse
//!   matrices over determinant bases (Jordan-Wigner interleaved convention)
//!   and to qubit Pauli sums,
//! - genealogically coupled configuration state functions used as orthogonal
//!   reference states,
//! - a spin-adapted excitation pool with exact one-parameter exponential
//!   gates,
//! - state-averaged VQE drivers for layered ansatze and adaptive operator
//!   selection (single- and multi-operator growth rules),
//! - an exact diagonalization oracle with singlet targeting, and
//! - a scan harness that runs method/geometry grids and reports errors
//!   against the oracle.

pub mod ansatz;
pub mod error;
pub mod fermion;
pub mod hamiltonian;
pub mod oracle;
pub mod pool;
pub mod scan;
pub mod sparse;
pub mod states;
pub mod vqe;

pub use error::{Result, SavqeError};
pub use hamiltonian::ActiveSpaceHamiltonian;
pub use pool::OperatorPool;
pub use states::{CsfReference, DetBasis, Determinant, Statevector};
