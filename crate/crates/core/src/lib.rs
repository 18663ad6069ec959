//! Floquet-Bloch response of a laser-driven 1D model crystal, the quasielastic
//! x-ray–optical wave-mixing spectra it produces, and the inverse problem of
//! recovering induced charge densities from those spectra.

pub mod cache;
pub mod config;
pub mod crystal;
pub mod error;
pub mod floquet;
pub mod grid;
pub mod linalg;
pub mod observables;
pub mod pipeline;
pub mod reconstruct;
pub mod registry;
pub mod tdse;
pub mod units;
pub mod xray;

pub use error::{Error, ErrorClass, Result};
