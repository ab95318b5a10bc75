//! Numerical simulator for adiabatic echo verification.
//!
//! The crate prepares ground states with quasi-adiabatic sweeps, applies ideal
//! and random-time dephasing channels in the target-Hamiltonian eigenbasis, and
//! evaluates the echo-verified ratio estimator alongside the plain adiabatic
//! estimate and the analytic error bounds.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod dephasing;
pub mod echo;
pub mod error;
pub mod models;
pub mod linalg;

pub use error::{Error, Result};
