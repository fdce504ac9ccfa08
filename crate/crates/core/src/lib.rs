//! Photodetection observables for light-matter systems at arbitrary coupling
//! strength.
//!
//! The pipeline: build a model Hamiltonian ([`models`]), diagonalize it
//! ([`spectrum`]), construct dressed positive-frequency operators in the
//! eigenbasis ([`dressed`]), and evaluate detection rates, spectra and
//! short-time absorption probabilities ([`detection`]). All quantities use
//! angular-frequency units with `ħ = 1`.
//!
//! The point of working in the eigenbasis: once light and matter hybridize
//! strongly, the bare mode operators no longer split cleanly into positive-
//! and negative-frequency parts, and normal-ordered bare correlations
//! predict clicks from the ground state. The dressed splitting keeps only
//! energy-lowering transitions, so the ground state is dark for any
//! detector, while its bare-photon content shows up only as a transient
//! `t²` absorption probability at short times.

pub mod detection;
pub mod dressed;
pub mod error;
pub mod hilbert;
pub mod models;
pub mod report;
pub mod spectrum;

pub use error::{Error, Result};

/// Version string embedded in report provenance.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
