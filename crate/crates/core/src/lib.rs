//! Quantum speed limits for observables.
//!
//! The crate evaluates two lower bounds on the evolution time of an
//! expectation value under a time-independent Hamiltonian: the Robertson-based
//! bound (`t_qslo`) and the tighter bound obtained from the product-form
//! stronger uncertainty relation (`t_sqslo`), where the integrand is divided by
//! the correction factor `1 - R(t)`.
//!
//! Module map:
//!
//! - [`operator`]: dense complex matrices, Hermitian eigensystems, tensor structure.
//! - [`state`]: pure states, density operators, moments, perpendicular states.
//! - [`info`]: entanglement entropy, modular Hamiltonian, capacity of entanglement, ergotropy.
//! - [`dynamics`]: propagators, Heisenberg evolution, exact expectation derivatives.
//! - [`quadrature`]: cumulative composite Simpson with a grid-halving error estimate.
//! - [`bounds`]: correction factor `R`, uncertainty checks and the bound integrals.
//! - [`scenarios`]: two-qubit entanglement, modular energy and quantum battery case studies.
//!
//! Units: `hbar = 1`, natural logarithms, entropies in nats.

pub mod bounds;
pub mod dynamics;
pub mod error;
pub mod info;
pub mod operator;
pub mod quadrature;
pub mod scenarios;
pub mod state;

#[cfg(test)]
mod testing;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
