use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error(
        "unphysical covariance at t = {time}: smallest symplectic eigenvalue {nu_min} < 1 - {tol}"
    )]
    Unphysical { time: f64, nu_min: f64, tol: f64 },

    /// The propagated covariance (or mean) left the range of `f64`.
    /// `exponent` is the natural log of the growth factor that overflowed.
    #[error("overflow propagating to t = {time}: largest growth exponent {exponent:.3}")]
    Overflow { time: f64, exponent: f64 },

    #[error("phase mismatch: formula requires {expected}, parameters are in {actual}")]
    PhaseMismatch {
        expected: &'static str,
        actual: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("Fock truncation exceeded at t = {time}: top-level population {population:.3e} > {leak_tol:.1e}")]
    Truncation {
        time: f64,
        population: f64,
        leak_tol: f64,
    },

    #[error("degenerate fit window: {points} points (need at least 4)")]
    DegenerateWindow { points: usize },
}

impl Error {
    /// True for failures of the numerics (overflow, loss of physicality,
    /// truncation) as opposed to bad caller input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Unphysical { .. }
                | Error::Overflow { .. }
                | Error::Truncation { .. }
                | Error::InvalidState(_)
                | Error::Domain(_)
        )
    }
}
