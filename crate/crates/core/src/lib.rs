//! Inflation-based Bell tests for genuine network multipartite nonlocality.
//!
//! The crate is organised around five layers:
//!
//! * [`netcore`] encodes networks of `N` parties sharing `(N-1)`-partite
//!   resources as binary incidence matrices, builds non-fan-out inflations and
//!   decides two-party subnetwork isomorphism from XOR signatures.
//! * [`quantum`] is a dense qubit engine for GHZ-type states under white
//!   noise, producing correlators and full outcome tables.
//! * [`bellfunc`] holds the Bell functionals `S_N`, their bounds and
//!   thresholds, a classical brute-force oracle and a see-saw optimiser.
//! * [`certifier`] reproduces the LOSR bound from inflation constraints with
//!   in-repo LP solvers (a dense revised simplex and an interior-point
//!   method) and checks each step of the analytic derivation.
//! * [`expsim`] simulates finite-statistics experiments and the fidelity to
//!   visibility pipeline.
//!
//! The `netbell` binary ([`cli`]) wires all of it to the command line; the
//! `examples/` directory of this crate has one runnable program per capability.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bellfunc;
pub mod certifier;
pub mod cli;
pub mod error;
pub mod expsim;
pub mod netcore;
pub mod quantum;

pub use error::{Error, Result};
