//! Spectral self-affine measures: Hadamard triples, spectra, periodic zero
//! sets, quasi-product reductions and Fourier frame towers.

pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod frames;
pub mod intlat;
pub mod measure;
pub mod quasiprod;
pub mod spectra;
pub mod triples;
pub mod zeroset;

pub use error::{Error, Result};
