//! Open-system dynamics of two coupled bosonic modes, one pumped by a gain
//! bath and one damped by a loss bath.
//!
//! The state stays Gaussian, so everything is carried by the 4×4 covariance
//! matrix in quadrature order `(x_L, p_L, x_G, p_G)` with the vacuum
//! normalised to the identity. The crate propagates that matrix, evaluates
//! Rényi-2 (and von Neumann) correlation measures on it, classifies the
//! dynamical regime of a parameter point, and carries a brute-force Fock-space
//! integrator used to validate the Gaussian layer.
//!
//! ```
//! use ptg_core::{correlations, dynamics, gaussian_state::CovarianceMatrix, model::SystemParams};
//!
//! let params = SystemParams::new(1.0, 1.5, 1.5).unwrap();
//! let sigma = dynamics::propagate_exact(&params, &CovarianceMatrix::identity(), 40.0).unwrap();
//! let d_lg = correlations::discord_heterodyne(
//!     &sigma,
//!     correlations::Direction::LG,
//!     correlations::EntropyKind::Renyi2,
//! )
//! .unwrap();
//! assert!((d_lg - 0.0907).abs() < 1e-3);
//! ```

pub mod correlations;
pub mod dynamics;
pub mod error;
pub mod fock_oracle;
pub mod gaussian_state;
mod linalg;
pub mod model;
pub mod pt_analysis;

pub use error::{Error, Result};
