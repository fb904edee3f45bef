//! Smeared Unruh-DeWitt detectors on timelike worldlines in Minkowski space.
//!
//! The crate computes detection spectra p(E, τ), intensities and the
//! second-order coherence g2(Δτ) of detector pairs, together with the
//! closed forms these quantities take for uniform acceleration and for
//! thermal states. Every closed form has an independent quadrature
//! counterpart so the two can be checked against each other.
//!
//! Natural units ħ = c = k_B = 1 are used throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod coherence;
pub mod error;
pub mod propagators;
pub mod quadrature;
pub mod response;
pub mod smearing;
pub mod special;
pub mod worldlines;

pub use error::{Error, Result};
