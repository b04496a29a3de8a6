//! Single-site entanglement of spin-1/2 lattice fermions.
//!
//! The crate computes the von Neumann entropy of one lattice site two ways:
//! by exact diagonalization of finite chains ([`fock`], [`hamiltonian`],
//! [`ed`]) and from closed-form ground-state solutions ([`analytic`]). The
//! [`scan`] module sweeps a driving parameter, estimates derivatives of the
//! entropy and classifies finite-order quantum phase transitions from them.
//!
//! Grid sweeps are data-parallel. With the default `parallel` feature they run
//! on rayon; without it every [`Execution`] mode falls back to a sequential
//! loop and produces bit-identical results.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod ed;
pub mod entropy;
mod error;
mod exec;
pub mod fock;
pub mod hamiltonian;
pub mod scan;

pub use entropy::{entropy_from_occupations, OccupationSet};
pub use error::{Error, Result};
pub use exec::{configure_threads, Execution};
