use thiserror::Error;

/// Everything that can go wrong inside the solver layers.
///
/// Configuration problems (bad geometry, bad tolerances) are kept apart from
/// computation failures so the CLI can map them onto different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("energy {energy} eV is at a pole of the {side} side")]
    Pole { energy: f64, side: &'static str },

    #[error("calibration failed: best value {best} with misfit {misfit:.3e} eV exceeds {threshold:.3e} eV")]
    CalibrationFailed {
        best: f64,
        misfit: f64,
        threshold: f64,
    },

    #[error("resonance not found for pair {pair} near {incoming:.6} eV (window {window} eV)")]
    ResonanceNotFound {
        pair: String,
        incoming: f64,
        window: f64,
    },

    #[error("{0} is not an eigenvalue: matching residual {1:.3e}")]
    NotAnEigenvalue(f64, f64),

    #[error("oracle: {0}")]
    Oracle(String),
}

impl Error {
    /// True for errors caused by bad input rather than by a failed computation.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Geometry(_) | Error::Config(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
