//! Finite-volume random two-particle lattice Schrödinger operators: operator
//! assembly, spectral data, multiscale-analysis classifiers and seeded Monte
//! Carlo estimators of the probabilities those classifiers feed into.

pub mod disorder;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod msa;
pub mod operators;
pub mod rng;
pub mod spectral;
pub mod stats;
pub mod system;

pub use error::{MsaError, Result};
