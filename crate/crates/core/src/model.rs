//! System parameters and the matrices built from them: the non-Hermitian
//! mean-field Hamiltonian, the drift `Y` and the diffusion `D` of the
//! covariance equation `dσ/dt = Yσ + σYᵀ + 4D`.
//!
//! Quadrature ordering is `(x_L, p_L, x_G, p_G)` everywhere in the crate.

use nalgebra::{Complex, Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Complex64 = Complex<f64>;

/// Coupling `g` and the loss/gain rates, all in the same (inverse time) unit.
///
/// `g = 0` is accepted: it is the decoupled limit and is handy for checking
/// single-mode behaviour. Front ends that express rates in units of `g`
/// must reject it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SystemParams {
    g: f64,
    gamma_l: f64,
    gamma_g: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    g: f64,
    gamma_l: f64,
    gamma_g: f64,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SystemParams::new(raw.g, raw.gamma_l, raw.gamma_g)
    }
}

impl From<SystemParams> for RawParams {
    fn from(p: SystemParams) -> Self {
        RawParams {
            g: p.g,
            gamma_l: p.gamma_l,
            gamma_g: p.gamma_g,
        }
    }
}

impl SystemParams {
    pub fn new(g: f64, gamma_l: f64, gamma_g: f64) -> Result<Self> {
        if !(g.is_finite() && gamma_l.is_finite() && gamma_g.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite rate in (g={g}, gamma_L={gamma_l}, gamma_G={gamma_g})"
            )));
        }
        if g < 0.0 || gamma_l < 0.0 || gamma_g < 0.0 {
            return Err(Error::InvalidParams(format!(
                "rates must be non-negative, got (g={g}, gamma_L={gamma_l}, gamma_G={gamma_g})"
            )));
        }
        Ok(Self {
            g,
            gamma_l,
            gamma_g,
        })
    }

    /// Balanced gain and loss, `gamma_L = gamma_G = gamma`.
    pub fn pt_line(g: f64, gamma: f64) -> Result<Self> {
        Self::new(g, gamma, gamma)
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn gamma_l(&self) -> f64 {
        self.gamma_l
    }

    pub fn gamma_g(&self) -> f64 {
        self.gamma_g
    }

    /// `(gamma_L + gamma_G) / 2`
    pub fn mean_rate(&self) -> f64 {
        0.5 * (self.gamma_l + self.gamma_g)
    }

    /// `(gamma_G - gamma_L) / 2`, the common real part of the drift spectrum
    /// whenever the spectrum is complex.
    pub fn rate_imbalance(&self) -> f64 {
        0.5 * (self.gamma_g - self.gamma_l)
    }

    /// Largest rate; used to make tolerances relative.
    pub fn scale(&self) -> f64 {
        self.g
            .max(self.gamma_l)
            .max(self.gamma_g)
            .max(f64::MIN_POSITIVE)
    }
}

/// 2×2 non-Hermitian generator of the mean amplitudes `(<a_L>, <a_G>)`,
/// `dψ/dt = -i H ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanFieldHamiltonian(pub Matrix2<Complex64>);

/// Drift matrix `Y` acting on quadratures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix(pub Matrix4<f64>);

/// Diagonal diffusion matrix `D = diag(γ_L, γ_L, γ_G, γ_G) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionMatrix(pub Matrix4<f64>);

impl MeanFieldHamiltonian {
    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.0
    }
}

impl DriftMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

impl DiffusionMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }
}

pub fn build_drift(params: &SystemParams) -> DriftMatrix {
    let (g, gl, gg) = (params.g, params.gamma_l, params.gamma_g);
    #[rustfmt::skip]
    let y = Matrix4::new(
        -gl, 0.0, 0.0,   g,
        0.0, -gl,  -g, 0.0,
        0.0,   g,  gg, 0.0,
         -g, 0.0, 0.0,  gg,
    );
    DriftMatrix(y)
}

pub fn build_diffusion(params: &SystemParams) -> DiffusionMatrix {
    let (gl, gg) = (params.gamma_l, params.gamma_g);
    DiffusionMatrix(Matrix4::from_diagonal(&nalgebra::Vector4::new(
        0.5 * gl,
        0.5 * gl,
        0.5 * gg,
        0.5 * gg,
    )))
}

pub fn build_mean_field_hamiltonian(params: &SystemParams) -> MeanFieldHamiltonian {
    let g = Complex64::new(params.g, 0.0);
    MeanFieldHamiltonian(Matrix2::new(
        Complex64::new(0.0, -params.gamma_l),
        g,
        g,
        Complex64::new(0.0, params.gamma_g),
    ))
}

/// Eigenvalues of the mean-field Hamiltonian,
/// `ε± = i(γ_G − γ_L)/2 ± sqrt(g² − ((γ_L + γ_G)/2)²)`,
/// ordered by real part then imaginary part, descending.
pub fn h_eigenvalues(params: &SystemParams) -> [Complex64; 2] {
    let centre = Complex64::new(0.0, params.rate_imbalance());
    let root = Complex64::new(params.g * params.g - params.mean_rate().powi(2), 0.0).sqrt();
    let mut ev = [centre + root, centre - root];
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    ev
}

/// The two distinct drift eigenvalues `λ± = -i ε∓`; each is doubly
/// degenerate in the 4×4 drift (the other copy is its complex conjugate
/// when the pair is complex). Ordered with `Re λ+ ≥ Re λ-`, and with
/// `Im λ+ ≥ 0` when the real parts coincide.
pub fn drift_eigenvalues(params: &SystemParams) -> [Complex64; 2] {
    let a = params.rate_imbalance();
    let disc = params.mean_rate().powi(2) - params.g * params.g;
    if disc >= 0.0 {
        let s = disc.sqrt();
        [Complex64::new(a + s, 0.0), Complex64::new(a - s, 0.0)]
    } else {
        let w = (-disc).sqrt();
        [Complex64::new(a, w), Complex64::new(a, -w)]
    }
}

/// Largest real part of the drift spectrum,
/// `(γ_G − γ_L)/2 + Re sqrt(((γ_L + γ_G)/2)² − g²)`.
pub fn spectral_abscissa(params: &SystemParams) -> f64 {
    drift_eigenvalues(params)[0].re
}
