//! Simulation core for heralded hybrid entanglement between a time-bin
//! single-photon qubit and a coherent-state qubit.
//!
//! Two engines evaluate the same optical network:
//!
//! - [`fock`]: a brute-force dense engine over truncated multimode Fock
//!   spaces. Slow but auditable; every closed form is checked against it.
//! - [`branch`]: an exact-in-structure engine that stores states as short
//!   superpositions of displaced low-order Fock excitations.
//!
//! [`analytic`] holds the closed-form heralding probabilities and fidelities,
//! [`scheme`] wires sources, optical elements and detectors into the full
//! network, and [`metrics`] provides fidelity, Wigner negativity and the
//! negativity of the partial transpose.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled; all IO lives in the companion CLI crate.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x >= 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod branch;
pub mod detectors;
pub mod elements;
pub mod error;
pub mod fock;
pub mod labels;
pub mod linalg;
pub mod math;
pub mod metrics;
pub mod scheme;
pub mod sources;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
