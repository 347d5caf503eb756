//! Covariance matrices of two-mode Gaussian states and the symplectic
//! quantities derived from them.
//!
//! Normalisation: `σ_ij = <X_i X_j + X_j X_i> − 2<X_i><X_j>` with
//! `X = (x_L, p_L, x_G, p_G)`, so the vacuum (and every coherent state) has
//! `σ = 1`, physical states satisfy `σ + iΩ ⪰ 0`, and all symplectic
//! eigenvalues are `≥ 1`.
//!
//! # Representation
//!
//! Under unstable saddle-type dynamics the covariance grows like `e^{2λt}`
//! along some directions while staying `O(1)` along others. Writing such a
//! matrix out entry by entry destroys the small directions once `e^{2λt}`
//! exceeds `1/ε`, and with them every entropy difference. A
//! [`CovarianceMatrix`] is therefore stored in factored form
//!
//! ```text
//! σ = V · diag(e^ℓ) · M · diag(e^ℓ) · Vᵀ,    ℓ ≥ 0
//! ```
//!
//! where `M` is well conditioned. Dense matrices use `V = 1, ℓ = 0`.
//! Determinants, inverses and symplectic eigenvalues are evaluated on the
//! factors, so they stay accurate when the dense matrix would not.

use nalgebra::{Complex, Matrix2, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{det2, inv2, ln_det_pd, omega4, symmetrize};

/// Default tolerance on `ν_min ≥ 1`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Relative tolerance on `|σ_ij − σ_ji|` accepted by [`CovarianceMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// One of the two modes. `L` is the lossy mode, `G` the amplified one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    L,
    G,
}

impl Mode {
    pub fn offset(self) -> usize {
        match self {
            Mode::L => 0,
            Mode::G => 2,
        }
    }

    pub fn other(self) -> Mode {
        match self {
            Mode::L => Mode::G,
            Mode::G => Mode::L,
        }
    }
}

/// `σ_L`, `σ_G` and the cross block `σ_C` (rows L, columns G).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeBlocks {
    pub sigma_l: Matrix2<f64>,
    pub sigma_g: Matrix2<f64>,
    pub sigma_c: Matrix2<f64>,
}

impl TwoModeBlocks {
    pub fn assemble(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.sigma_l);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.sigma_g);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.sigma_c);
        m.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.sigma_c.transpose());
        m
    }

    pub fn local(&self, mode: Mode) -> &Matrix2<f64> {
        match mode {
            Mode::L => &self.sigma_l,
            Mode::G => &self.sigma_g,
        }
    }
}

/// A 2×2 block stored as `e^{2·log_scale} · mantissa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBlock {
    pub mantissa: Matrix2<f64>,
    pub log_scale: f64,
}

impl ScaledBlock {
    pub fn ln_det(&self) -> Option<f64> {
        let d = det2(&self.mantissa);
        (d.is_finite() && d > 0.0).then(|| d.ln() + 4.0 * self.log_scale)
    }

    pub fn dense(&self) -> Matrix2<f64> {
        self.mantissa * (2.0 * self.log_scale).exp()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    basis: Matrix4<f64>,
    log_scale: Vector4<f64>,
    core: Matrix4<f64>,
}

impl CovarianceMatrix {
    /// Vacuum / coherent-state covariance.
    pub fn identity() -> Self {
        Self::plain(Matrix4::identity())
    }

    /// Wraps a dense matrix after checking it is finite and symmetric to
    /// within [`SYMMETRY_TOL`]. Physicality is checked separately
    /// ([`CovarianceMatrix::check_physical`]).
    pub fn new(sigma: Matrix4<f64>) -> Result<Self> {
        if sigma.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput(
                "covariance has non-finite entries".into(),
            ));
        }
        let asym = (sigma - sigma.transpose()).abs().max();
        let tol = SYMMETRY_TOL * sigma.norm().max(1.0);
        if asym > tol {
            return Err(Error::InvalidInput(format!(
                "covariance not symmetric: max |σ_ij − σ_ji| = {asym:e} > {tol:e}"
            )));
        }
        Ok(Self::plain(symmetrize(&sigma)))
    }

    pub fn from_blocks(blocks: &TwoModeBlocks) -> Result<Self> {
        Self::new(blocks.assemble())
    }

    pub(crate) fn plain(sigma: Matrix4<f64>) -> Self {
        Self {
            basis: Matrix4::identity(),
            log_scale: Vector4::zeros(),
            core: sigma,
        }
    }

    /// `σ = V diag(e^ℓ) M diag(e^ℓ) Vᵀ`; `M` is symmetrised.
    pub(crate) fn from_factors(
        basis: Matrix4<f64>,
        log_scale: Vector4<f64>,
        core: Matrix4<f64>,
    ) -> Self {
        debug_assert!(log_scale.iter().all(|&l| l >= 0.0));
        Self {
            basis,
            log_scale,
            core: symmetrize(&core),
        }
    }

    pub(crate) fn factors(&self) -> (&Matrix4<f64>, &Vector4<f64>, &Matrix4<f64>) {
        (&self.basis, &self.log_scale, &self.core)
    }

    /// True when the matrix is carried in a non-trivial factored form.
    pub fn is_factored(&self) -> bool {
        self.basis != Matrix4::identity() || self.log_scale != Vector4::zeros()
    }

    /// Largest per-direction growth exponent `max ℓ`.
    pub fn max_log_scale(&self) -> f64 {
        self.log_scale.max()
    }

    /// `σ = e^{2s} B` with `s = max ℓ` and `B` of moderate size.
    pub fn scaled_matrix(&self) -> (Matrix4<f64>, f64) {
        let s = self.log_scale.max();
        let e = Matrix4::from_diagonal(&self.log_scale.map(|l| (l - s).exp()));
        let t = self.basis * e;
        (symmetrize(&(t * self.core * t.transpose())), s)
    }

    /// Dense matrix. Entries overflow to infinity once `max ℓ ≳ 350`.
    pub fn matrix(&self) -> Matrix4<f64> {
        let (b, s) = self.scaled_matrix();
        if s == 0.0 {
            b
        } else {
            b * (2.0 * s).exp()
        }
    }

    pub fn blocks(&self) -> TwoModeBlocks {
        let m = self.matrix();
        TwoModeBlocks {
            sigma_l: m.fixed_view::<2, 2>(0, 0).into_owned(),
            sigma_g: m.fixed_view::<2, 2>(2, 2).into_owned(),
            sigma_c: m.fixed_view::<2, 2>(0, 2).into_owned(),
        }
    }

    /// Block `σ_{ab}` in scaled form.
    pub fn block(&self, row: Mode, col: Mode) -> ScaledBlock {
        let (b, s) = self.scaled_matrix();
        ScaledBlock {
            mantissa: b
                .fixed_view::<2, 2>(row.offset(), col.offset())
                .into_owned(),
            log_scale: s,
        }
    }

    /// `ln det σ`.
    pub fn ln_det(&self) -> Result<f64> {
        let det_v = self.basis.determinant();
        let ln_core = ln_det_pd(&self.core)
            .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))?;
        if !(det_v.is_finite() && det_v != 0.0) {
            return Err(Error::InvalidState("singular covariance basis".into()));
        }
        Ok(2.0 * det_v.abs().ln() + 2.0 * self.log_scale.sum() + ln_core)
    }

    pub fn determinant(&self) -> Result<f64> {
        Ok(self.ln_det()?.exp())
    }

    /// `ln det σ_mode` of a local block.
    pub fn ln_det_local(&self, mode: Mode) -> Result<f64> {
        self.block(mode, mode).ln_det().ok_or_else(|| {
            Error::InvalidState(format!("local block {mode:?} is not positive definite"))
        })
    }

    /// `σ⁻¹`, computed from the factors. Its entries stay bounded under
    /// growth because `ℓ ≥ 0`.
    pub fn inverse(&self) -> Result<Matrix4<f64>> {
        let v_inv = self
            .basis
            .try_inverse()
            .ok_or_else(|| Error::InvalidState("singular covariance basis".into()))?;
        let core_inv = self
            .core
            .cholesky()
            .map(|c| c.inverse())
            .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))?;
        let e = Matrix4::from_diagonal(&self.log_scale.map(|l| (-l).exp()));
        let t = e * v_inv;
        Ok(symmetrize(&(t.transpose() * core_inv * t)))
    }

    /// `ln det(σ + shift)` for a positive semi-definite `shift`.
    pub fn ln_det_plus(&self, shift: &Matrix4<f64>) -> Result<f64> {
        let p = self.inverse()?;
        let rel = Matrix4::identity() + p * shift;
        let d = rel.determinant();
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::InvalidState(format!(
                "det(1 + σ⁻¹ S) = {d:e} is not positive"
            )));
        }
        Ok(self.ln_det()? + d.ln())
    }

    /// `S σ Sᵀ`.
    pub fn congruence(&self, s: &Matrix4<f64>) -> Self {
        Self {
            basis: s * self.basis,
            log_scale: self.log_scale,
            core: self.core,
        }
    }

    /// Momentum reflection `p_G → −p_G` (partial transposition of mode G).
    pub fn partial_transpose(&self) -> Self {
        self.congruence(&Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0)))
    }

    /// `(ln ν₁, ln ν₂)` with `ν₁ ≥ ν₂`.
    ///
    /// For any factor `σ = K Kᵀ` the matrix `A = Kᵀ Ω K` is antisymmetric
    /// with eigenvalues `±iν`, so `ν²` are the eigenvalues of the symmetric
    /// `AᵀA`; a symmetric eigensolver keeps degenerate spectra (pure states)
    /// accurate to rounding. `ν₁` is read from `K = V diag(e^{ℓ−s}) chol(M)`
    /// and `ν₂` from the matching factor of `σ⁻¹`, whose spectrum is
    /// `{1/ν₁, 1/ν₂}`, so each comes from the matrix where it dominates.
    pub fn ln_symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        let chol = self
            .core
            .cholesky()
            .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))?
            .l();
        let s = self.log_scale.max();
        let k = self.basis * Matrix4::from_diagonal(&self.log_scale.map(|l| (l - s).exp())) * chol;
        let ln_nu_max = 2.0 * s + 0.5 * ln_largest_nu_squared(&k)?;

        let v_inv_t = self
            .basis
            .try_inverse()
            .ok_or_else(|| Error::InvalidState("singular covariance basis".into()))?
            .transpose();
        let chol_inv_t = chol
            .try_inverse()
            .ok_or_else(|| Error::InvalidState("covariance is not positive definite".into()))?
            .transpose();
        let k_inv =
            v_inv_t * Matrix4::from_diagonal(&self.log_scale.map(|l| (-l).exp())) * chol_inv_t;
        let ln_nu_min = -0.5 * ln_largest_nu_squared(&k_inv)?;
        Ok((ln_nu_max, ln_nu_min.min(ln_nu_max)))
    }

    /// Symplectic eigenvalues `(ν₁, ν₂)`, `ν₁ ≥ ν₂`, via the factor route
    /// of [`CovarianceMatrix::ln_symplectic_eigenvalues`].
    pub fn symplectic_eigenvalues(&self) -> Result<(f64, f64)> {
        self.ensure_finite()?;
        let (a, b) = self.ln_symplectic_eigenvalues()?;
        Ok((a.exp(), b.exp()))
    }

    /// Symplectic eigenvalues as the moduli of the eigenvalues of `iΩσ`,
    /// using a general eigensolver on the dense matrix. Independent of
    /// [`CovarianceMatrix::symplectic_eigenvalues`]; only meaningful while
    /// the dense matrix is well conditioned.
    pub fn symplectic_eigenvalues_spectral(&self) -> Result<(f64, f64)> {
        self.ensure_finite()?;
        let m = self.matrix();
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("dense covariance overflows".into()));
        }
        let i_omega_sigma = (omega4() * m).map(|x| Complex::new(0.0, x));
        let mut moduli: Vec<f64> = i_omega_sigma
            .eigenvalues()
            .ok_or_else(|| Error::InvalidState("eigensolver did not converge".into()))?
            .iter()
            .map(|z| z.norm())
            .collect();
        moduli.sort_by(|a, b| b.total_cmp(a));
        // Eigenvalues of iΩσ come in ± pairs.
        Ok((0.5 * (moduli[0] + moduli[1]), 0.5 * (moduli[2] + moduli[3])))
    }

    pub fn min_symplectic_eigenvalue(&self) -> Result<f64> {
        Ok(self.ln_symplectic_eigenvalues()?.1.exp())
    }

    /// Fails with [`Error::Unphysical`] when `ν_min < 1 − tol`. `time` only
    /// labels the diagnostic.
    pub fn check_physical(&self, tol: f64, time: f64) -> Result<()> {
        let nu_min = self.min_symplectic_eigenvalue()?;
        if nu_min < 1.0 - tol {
            return Err(Error::Unphysical { time, nu_min, tol });
        }
        Ok(())
    }

    /// `Tr ρ² = 1/sqrt(det σ)`.
    pub fn purity(&self) -> Result<f64> {
        let ln_det = self
            .ln_det()
            .map_err(|_| Error::InvalidState("det σ ≤ 0".into()))?;
        if ln_det < -1e-9 {
            return Err(Error::InvalidState(format!(
                "det σ = {:e} < 1: not a physical state",
                ln_det.exp()
            )));
        }
        Ok((-0.5 * ln_det).exp().min(1.0))
    }

    fn ensure_finite(&self) -> Result<()> {
        let finite = self
            .basis
            .iter()
            .chain(self.core.iter())
            .chain(self.log_scale.iter())
            .all(|x| x.is_finite());
        if finite {
            Ok(())
        } else {
            Err(Error::InvalidInput(
                "covariance has non-finite entries".into(),
            ))
        }
    }
}

/// `ln ν_max²` of `K Kᵀ`.
fn ln_largest_nu_squared(k: &Matrix4<f64>) -> Result<f64> {
    let a = k.transpose() * omega4() * k;
    let nu2 = symmetrize(&(a.transpose() * a))
        .symmetric_eigenvalues()
        .max();
    if !(nu2.is_finite() && nu2 > 0.0) {
        return Err(Error::InvalidState(format!(
            "symplectic spectrum not positive: {nu2:e}"
        )));
    }
    Ok(nu2.ln())
}

/// Single-mode symplectic eigenvalue `sqrt(det σ)`.
pub fn single_mode_symplectic_eigenvalue(block: &Matrix2<f64>) -> Result<f64> {
    let d = det2(block);
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidState(format!(
            "single-mode det = {d:e} is not positive"
        )));
    }
    Ok(d.sqrt())
}

/// Mean vector plus covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub cov: CovarianceMatrix,
}

impl GaussianState {
    pub fn new(mean: Vector4<f64>, cov: CovarianceMatrix) -> Self {
        Self { mean, cov }
    }

    /// Product of coherent states `|α_L⟩ ⊗ |α_G⟩`.
    pub fn coherent(alpha_l: Complex<f64>, alpha_g: Complex<f64>) -> Self {
        let r2 = std::f64::consts::SQRT_2;
        Self {
            mean: Vector4::new(
                r2 * alpha_l.re,
                r2 * alpha_l.im,
                r2 * alpha_g.re,
                r2 * alpha_g.im,
            ),
            cov: CovarianceMatrix::identity(),
        }
    }

    pub fn vacuum() -> Self {
        Self::coherent(Complex::new(0.0, 0.0), Complex::new(0.0, 0.0))
    }
}

/// Two-mode squeezed vacuum: `σ_L = σ_G = cosh(2r)·1`,
/// `σ_C = sinh(2r)·diag(1, −1)`.
pub fn two_mode_squeezed(r: f64) -> CovarianceMatrix {
    let c = (2.0 * r).cosh();
    let s = (2.0 * r).sinh();
    CovarianceMatrix::plain(
        TwoModeBlocks {
            sigma_l: Matrix2::identity() * c,
            sigma_g: Matrix2::identity() * c,
            sigma_c: Matrix2::new(s, 0.0, 0.0, -s),
        }
        .assemble(),
    )
}

/// Product of single-mode thermal states with symplectic eigenvalues `a`
/// (mode L) and `b` (mode G).
pub fn thermal_product(a: f64, b: f64) -> CovarianceMatrix {
    CovarianceMatrix::plain(Matrix4::from_diagonal(&Vector4::new(a, a, b, b)))
}

/// Local symplectic (phase-space rotation) on both modes, `R(φ) ⊕ R(φ′)`.
pub fn local_rotation(phi_l: f64, phi_g: f64) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0)
        .copy_from(&crate::linalg::rotation(phi_l));
    m.fixed_view_mut::<2, 2>(2, 2)
        .copy_from(&crate::linalg::rotation(phi_g));
    m
}

/// The covariance's inverse computed through the closed-form 2×2 Schur
/// complements, for dense matrices. Used to cross-check
/// [`CovarianceMatrix::inverse`].
pub fn block_inverse(blocks: &TwoModeBlocks) -> Option<Matrix4<f64>> {
    let g_inv = inv2(&blocks.sigma_g)?;
    let schur = blocks.sigma_l - blocks.sigma_c * g_inv * blocks.sigma_c.transpose();
    let s_inv = inv2(&schur)?;
    let top_right = -s_inv * blocks.sigma_c * g_inv;
    let bottom_right = g_inv + g_inv * blocks.sigma_c.transpose() * s_inv * blocks.sigma_c * g_inv;
    Some(
        TwoModeBlocks {
            sigma_l: s_inv,
            sigma_g: bottom_right,
            sigma_c: top_right,
        }
        .assemble(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn identity_blocks() {
        let b = CovarianceMatrix::identity().blocks();
        assert_eq!(b.sigma_l, Matrix2::identity());
        assert_eq!(b.sigma_g, Matrix2::identity());
        assert_eq!(b.sigma_c, Matrix2::zeros());
    }

    #[test]
    fn cross_block_indexing() {
        let mut m = Matrix4::identity();
        m[(0, 2)] = 0.3;
        m[(2, 0)] = 0.3;
        let b = CovarianceMatrix::new(m).unwrap().blocks();
        assert_eq!(b.sigma_c, Matrix2::new(0.3, 0.0, 0.0, 0.0));
        assert_eq!(b.assemble(), m);
    }

    #[test]
    fn symplectic_eigenvalues_examples() {
        let (a, b) = CovarianceMatrix::identity()
            .symplectic_eigenvalues()
            .unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-14);
        assert_relative_eq!(b, 1.0, epsilon = 1e-14);

        let (a, b) = thermal_product(3.0, 2.0).symplectic_eigenvalues().unwrap();
        assert_relative_eq!(a, 3.0, epsilon = 1e-13);
        assert_relative_eq!(b, 2.0, epsilon = 1e-13);

        // Pure two-mode squeezed state: both ν = 1 on both routes.
        let tms = two_mode_squeezed(0.5);
        let (a, b) = tms.symplectic_eigenvalues().unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b, 1.0, epsilon = 1e-12);
        let (a, b) = tms.symplectic_eigenvalues_spectral().unwrap();
        assert_relative_eq!(a, 1.0, epsilon = 1e-9);
        assert_relative_eq!(b, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = Matrix4::identity();
        m[(1, 1)] = f64::NAN;
        assert!(matches!(
            CovarianceMatrix::new(m),
            Err(Error::InvalidInput(_))
        ));
        let mut m = Matrix4::identity();
        m[(0, 1)] = 1e-3;
        assert!(
            CovarianceMatrix::new(m).is_err(),
            "asymmetric input accepted"
        );
    }

    #[test]
    fn partial_transpose_examples() {
        let id = CovarianceMatrix::identity();
        assert_eq!(id.partial_transpose().matrix(), Matrix4::identity());

        let c = 0.4;
        let blocks = TwoModeBlocks {
            sigma_l: Matrix2::identity() * 2.0,
            sigma_g: Matrix2::identity() * 2.0,
            sigma_c: Matrix2::identity() * c,
        };
        let pt = CovarianceMatrix::from_blocks(&blocks)
            .unwrap()
            .partial_transpose();
        assert_eq!(pt.blocks().sigma_c, Matrix2::new(c, 0.0, 0.0, -c));

        let nu = two_mode_squeezed(0.5)
            .partial_transpose()
            .min_symplectic_eigenvalue()
            .unwrap();
        assert_relative_eq!(nu, (-1.0f64).exp(), epsilon = 1e-12);
        let (_, nu_spec) = two_mode_squeezed(0.5)
            .partial_transpose()
            .symplectic_eigenvalues_spectral()
            .unwrap();
        assert_relative_eq!(nu_spec, (-1.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn purity_examples() {
        assert_relative_eq!(CovarianceMatrix::identity().purity().unwrap(), 1.0);
        assert_relative_eq!(
            thermal_product(4.0, 1.0).purity().unwrap(),
            0.25,
            epsilon = 1e-15
        );
        let bad = CovarianceMatrix::new(Matrix4::identity() * 0.5).unwrap();
        assert!(bad.purity().is_err());
    }

    #[test]
    fn factored_form_matches_dense() {
        let v = Matrix4::new(
            1.0, 0.2, 0.0, 0.1, //
            0.0, 1.0, 0.3, 0.0, //
            0.1, 0.0, 1.0, 0.2, //
            0.0, 0.4, 0.0, 1.0,
        );
        let ell = Vector4::new(3.0, 3.0, 0.0, 0.5);
        let m = Matrix4::new(
            2.0, 0.1, 0.2, 0.0, //
            0.1, 2.0, 0.0, 0.3, //
            0.2, 0.0, 1.5, 0.1, //
            0.0, 0.3, 0.1, 1.2,
        );
        let f = CovarianceMatrix::from_factors(v, ell, m);
        let e = Matrix4::from_diagonal(&ell.map(f64::exp));
        let dense = v * e * m * e * v.transpose();
        let d = CovarianceMatrix::new(symmetrize(&dense)).unwrap();
        assert_relative_eq!(f.matrix(), dense, max_relative = 1e-13);
        assert_relative_eq!(f.ln_det().unwrap(), d.ln_det().unwrap(), epsilon = 1e-11);
        assert_relative_eq!(
            f.inverse().unwrap(),
            d.inverse().unwrap(),
            max_relative = 1e-9
        );
        let (a1, b1) = f.symplectic_eigenvalues().unwrap();
        let (a2, b2) = d.symplectic_eigenvalues_spectral().unwrap();
        assert_relative_eq!(a1, a2, max_relative = 1e-9);
        assert_relative_eq!(b1, b2, max_relative = 1e-9);
    }

    #[test]
    fn inverse_matches_schur_blocks() {
        let c = two_mode_squeezed(0.3).congruence(&local_rotation(0.4, -1.1));
        let reference = block_inverse(&c.blocks()).unwrap();
        assert_relative_eq!(c.inverse().unwrap(), reference, max_relative = 1e-11);
    }

    /// Random physical state: a symplectic transform of a thermal product.
    fn random_state(nu1: f64, nu2: f64, r: f64, phases: [f64; 4]) -> CovarianceMatrix {
        thermal_product(nu1, nu2)
            .congruence(&local_rotation(phases[0], phases[1]))
            .congruence(&squeezer(r, phases[2]))
            .congruence(&beam_splitter(phases[3]))
    }

    fn squeezer(r: f64, r2: f64) -> Matrix4<f64> {
        Matrix4::from_diagonal(&Vector4::new(r.exp(), (-r).exp(), r2.exp(), (-r2).exp()))
    }

    fn beam_splitter(theta: f64) -> Matrix4<f64> {
        let (s, c) = theta.sin_cos();
        let mut m = Matrix4::identity() * c;
        m[(0, 2)] = s;
        m[(1, 3)] = s;
        m[(2, 0)] = -s;
        m[(3, 1)] = -s;
        m
    }

    proptest! {
        #[test]
        fn det_equals_squared_product_of_symplectic_eigenvalues(
            nu1 in 1.0f64..5.0, nu2 in 1.0f64..5.0, r in -0.8f64..0.8,
            p0 in 0.0f64..6.3, p1 in 0.0f64..6.3, p2 in -0.8f64..0.8, p3 in 0.0f64..6.3,
        ) {
            let c = random_state(nu1, nu2, r, [p0, p1, p2, p3]);
            let (a, b) = c.symplectic_eigenvalues().unwrap();
            let det = c.matrix().determinant();
            prop_assert!(((a * b).powi(2) - det).abs() <= 1e-9 * det);
            // Both computational routes agree.
            let (sa, sb) = c.symplectic_eigenvalues_spectral().unwrap();
            prop_assert!((a - sa).abs() <= 1e-8 * a);
            prop_assert!((b - sb).abs() <= 1e-8 * a);
            // And recover the Williamson spectrum we started from.
            prop_assert!((a - nu1.max(nu2)).abs() <= 1e-8 * a);
            prop_assert!((b - nu1.min(nu2)).abs() <= 1e-8 * a);
        }

        #[test]
        fn partial_transpose_is_involution(
            nu1 in 1.0f64..5.0, nu2 in 1.0f64..5.0, r in -0.8f64..0.8,
            p0 in 0.0f64..6.3, p1 in 0.0f64..6.3, p3 in 0.0f64..6.3,
        ) {
            let c = random_state(nu1, nu2, r, [p0, p1, 0.1, p3]);
            prop_assert_eq!(c.partial_transpose().partial_transpose().matrix(), c.matrix());
        }

        #[test]
        fn spectrum_invariant_under_local_rotations(
            nu1 in 1.0f64..5.0, nu2 in 1.0f64..5.0, r in -0.8f64..0.8,
            a in 0.0f64..6.3, b in 0.0f64..6.3,
        ) {
            let c = random_state(nu1, nu2, r, [0.3, 0.2, 0.1, 0.7]);
            let rotated = c.congruence(&local_rotation(a, b));
            let (x0, y0) = c.symplectic_eigenvalues().unwrap();
            let (x1, y1) = rotated.symplectic_eigenvalues().unwrap();
            prop_assert!((x0 - x1).abs() <= 1e-10 * x0);
            prop_assert!((y0 - y1).abs() <= 1e-10 * x0);
        }

        #[test]
        fn blocks_round_trip(
            a in 1.0f64..4.0, b in 1.0f64..4.0, c in -0.9f64..0.9, d in -0.9f64..0.9,
        ) {
            let blocks = TwoModeBlocks {
                sigma_l: Matrix2::identity() * a,
                sigma_g: Matrix2::identity() * b,
                sigma_c: Matrix2::new(c, d, -d, c),
            };
            let cov = CovarianceMatrix::from_blocks(&blocks).unwrap();
            prop_assert_eq!(cov.blocks(), blocks);
        }
    }
}
