use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error class; the CLI maps it to a process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorClass {
    Config,
    Numerical,
    Resonance,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Numerical => 3,
            ErrorClass::Resonance => 4,
        }
    }
}

/// One of the two Floquet eigenvectors competing for the occupied-state slot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Competitor {
    pub quasienergy: f64,
    pub overlap: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unit error: {0}")]
    Unit(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("eigensolver failed at k = {k:.6}: {detail}")]
    Eigensolver { k: f64, detail: String },
    #[error(
        "resonance at k = {k:.6}, band {band}: largest overlap with the field-free state is {overlap:.3e} \
         (competitors at quasienergies {:.6} and {:.6})",
        competing[0].quasienergy, competing[1].quasienergy
    )]
    Resonance {
        k: f64,
        band: usize,
        overlap: f64,
        competing: [Competitor; 2],
    },
    #[error("time-reversal violation at order {mu}: parity residual {residual:.3e}")]
    TimeReversal { mu: i32, residual: f64 },
    #[error("norm drift {drift:.3e} at k = {k:.6}, band {band}; reduce the time step")]
    NormDrift { k: f64, band: usize, drift: f64 },
    #[error("no convergence within ceilings after {steps} ladder steps (last change {last_change:.3e})")]
    Convergence { steps: usize, last_change: f64 },
    #[error("spectral window error: {0}")]
    Window(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("interference undetectable: {0}")]
    Undetectable(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::Unit(_) | Error::Domain(_) | Error::Io(_) | Error::Serde(_) => {
                ErrorClass::Config
            }
            Error::Resonance { .. } => ErrorClass::Resonance,
            _ => ErrorClass::Numerical,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}
