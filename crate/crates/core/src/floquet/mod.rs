//! Floquet-Bloch states of the laser-dressed crystal.

pub mod archive;
pub mod converge;
pub mod kgrid;
pub mod matrix;
pub mod solve;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units;

pub use archive::{
    solve_archive, solve_archive_with, solve_bloch_set, BlochSet, FloquetArchive, FloquetParams, KPointResult, ResonancePolicy,
};
pub use converge::{converge_floquet, ConvergenceReport, ConvergenceStep, Tolerances};
pub use kgrid::KGrid;
pub use matrix::build_floquet_matrix;
pub use solve::{solve_floquet, FloquetSolution};

/// Classical drive A(t) = s (E0/ω) cos ωt, so that E(t) = s E0 sin ωt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveField {
    pub omega: f64,
    pub e0: f64,
    /// ±1, the 1D polarization direction.
    pub polarization: f64,
}

impl DriveField {
    pub fn new(omega: f64, e0: f64, polarization: f64) -> Result<Self> {
        let d = DriveField { omega, e0, polarization };
        d.validate()?;
        Ok(d)
    }

    pub fn from_intensity(omega: f64, intensity_w_cm2: f64, polarization: f64) -> Result<Self> {
        if !(intensity_w_cm2 >= 0.0) {
            return Err(Error::Config(format!("intensity must be non-negative, got {intensity_w_cm2}")));
        }
        Self::new(omega, units::intensity_to_field(intensity_w_cm2), polarization)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::Config(format!("photon energy must be positive, got {}", self.omega)));
        }
        if !(self.e0 >= 0.0) || !self.e0.is_finite() {
            return Err(Error::Config(format!("field amplitude must be non-negative, got {}", self.e0)));
        }
        if self.polarization != 1.0 && self.polarization != -1.0 {
            return Err(Error::Config(format!("polarization sign must be +1 or -1, got {}", self.polarization)));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega
    }

    pub fn intensity(&self) -> f64 {
        units::field_to_intensity(self.e0)
    }

    /// Coupling between neighbouring photon blocks, s E0 / (2ω).
    pub fn half_amplitude(&self) -> f64 {
        self.polarization * self.e0 / (2.0 * self.omega)
    }

    pub fn vector_potential(&self, t: f64) -> f64 {
        self.polarization * self.e0 / self.omega * (self.omega * t).cos()
    }

    pub fn electric_field(&self, t: f64) -> f64 {
        self.polarization * self.e0 * (self.omega * t).sin()
    }
}

/// Non-fatal conditions recorded alongside results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Warning {
    /// The selected Floquet state shares less than half its weight with the field-free state.
    Hybridization { k: f64, band: usize, overlap: f64 },
    /// A resonant k-point was dropped from Brillouin-zone sums.
    ResonanceExcluded { k: f64, band: usize, overlap: f64 },
    Other { message: String },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::Hybridization { k, band, overlap } => {
                write!(f, "hybridized Floquet state at k = {k:.6}, band {band} (overlap {overlap:.3})")
            }
            Warning::ResonanceExcluded { k, band, overlap } => write!(
                f,
                "resonant k = {k:.6} (band {band}, overlap {overlap:.3e}) excluded from zone sums"
            ),
            Warning::Other { message } => f.write_str(message),
        }
    }
}
