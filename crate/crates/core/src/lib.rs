//! Clifford-module machinery for Dirac-type operators on the flat torus.
//!
//! Fibers are dense complex matrices ([`linalg`]), sections are exact
//! truncated Fourier series ([`fourier_fields`]), and every operator identity
//! is evaluated by two independent routes so that agreement, not a single
//! value, is what gets checked.

pub mod clifford_fiber;
pub mod dirac_ops;
pub mod error;
pub mod fourier_fields;
pub mod graded_modules;
pub mod lagrangians;
pub mod linalg;
pub mod pauli_maps;
pub mod random;
pub mod scenarios;

pub use error::{Error, Result};
