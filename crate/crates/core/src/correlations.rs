//! Entropies, mutual information and Gaussian discord of two-mode states.
//!
//! All logarithms are natural. Rényi-2 entropies are `½ ln det σ`; von
//! Neumann entropies use `f(ν) = ((ν+1)/2) ln((ν+1)/2) − ((ν−1)/2) ln((ν−1)/2)`
//! summed over symplectic eigenvalues.
//!
//! Discord with a Gaussian measurement of covariance `σ_M` on mode G is
//! `D_LG = S_G − S + S(σ_{L|G})` with the conditional covariance
//! `σ_{L|G} = σ_L − σ_C (σ_G + σ_M)⁻¹ σ_Cᵀ`. Its determinant is evaluated as
//! `det(σ + 0⊕σ_M) / det(σ_G + σ_M)`, which only needs `σ⁻¹` and log
//! determinants and so stays accurate for strongly growing states where the
//! Schur complement itself cancels catastrophically.

use log::debug;
use nalgebra::{Matrix2, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_state::{CovarianceMatrix, Mode, PHYSICALITY_TOL};
use crate::linalg::{det2, inv2, log_add_exp, rotation, softplus, symmetrize};

/// Values in `(−NEGATIVE_CLAMP, 0)` are rounding noise and clamp to zero;
/// anything more negative is an error.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EntropyKind {
    #[default]
    Renyi2,
    VonNeumann,
}

/// Direction of a discord: `LG` measures G and quantifies correlations of L
/// as seen through G, `GL` the converse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    LG,
    GL,
}

impl Direction {
    pub fn measured(self) -> Mode {
        match self {
            Direction::LG => Mode::G,
            Direction::GL => Mode::L,
        }
    }
}

/// Single-mode Gaussian measurement with covariance
/// `R(φ) diag(e^{2r}, e^{−2r}) R(φ)ᵀ`; `r = 0` is heterodyne.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMeasurement {
    pub r: f64,
    pub phi: f64,
    pub target: Mode,
}

impl GaussianMeasurement {
    pub fn heterodyne(target: Mode) -> Self {
        Self {
            r: 0.0,
            phi: 0.0,
            target,
        }
    }

    pub fn covariance(&self) -> Matrix2<f64> {
        let rot = rotation(self.phi);
        let d = Matrix2::new((2.0 * self.r).exp(), 0.0, 0.0, (-2.0 * self.r).exp());
        symmetrize(&(rot * d * rot.transpose()))
    }

    /// `σ_M − 1` without cancellation at small `r`.
    fn covariance_minus_identity(&self) -> Matrix2<f64> {
        let rot = rotation(self.phi);
        let d = Matrix2::new((2.0 * self.r).exp_m1(), 0.0, 0.0, (-2.0 * self.r).exp_m1());
        symmetrize(&(rot * d * rot.transpose()))
    }

    fn embedded(&self) -> Matrix4<f64> {
        let mut m = Matrix4::zeros();
        let o = self.target.offset();
        m.fixed_view_mut::<2, 2>(o, o).copy_from(&self.covariance());
        m
    }
}

/// Correlation measures of one state at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRecord {
    pub t: f64,
    pub s: f64,
    pub s_l: f64,
    pub s_g: f64,
    pub i: f64,
    pub d_lg: f64,
    pub d_gl: f64,
    pub nu_pt_min: f64,
}

/// Applies the negative-clamp policy to a quantity that must be `≥ 0`.
pub fn clamp_nonnegative(value: f64, what: &str) -> Result<f64> {
    if value >= 0.0 {
        Ok(value)
    } else if value > -NEGATIVE_CLAMP {
        debug!("clamped {what} = {value:e} to 0");
        Ok(0.0)
    } else {
        Err(Error::InvalidState(format!(
            "{what} = {value:e} is negative beyond rounding"
        )))
    }
}

/// `f(ν)` from `ln ν`.
fn von_neumann_term(ln_nu: f64) -> Result<f64> {
    if ln_nu < -PHYSICALITY_TOL {
        return Err(Error::InvalidState(format!(
            "symplectic eigenvalue {:e} < 1",
            ln_nu.exp()
        )));
    }
    let nu = ln_nu.max(0.0).exp();
    if nu > 1e4 {
        // Large-ν expansion; the direct formula cancels to ~1e-12 here.
        return Ok(ln_nu - std::f64::consts::LN_2 + 1.0 - (-2.0 * ln_nu).exp() / 6.0);
    }
    let p = 0.5 * (nu + 1.0);
    let m = 0.5 * (nu - 1.0);
    let tail = if m > 0.0 { m * m.ln() } else { 0.0 };
    Ok(p * p.ln() - tail)
}

/// Entropy from `ln det` of a single-mode covariance (`ν = sqrt(det)`).
fn single_mode_entropy_from_ln_det(ln_det: f64, kind: EntropyKind) -> Result<f64> {
    if ln_det < -2.0 * PHYSICALITY_TOL {
        return Err(Error::InvalidState(format!(
            "single-mode det = {:e} < 1",
            ln_det.exp()
        )));
    }
    match kind {
        EntropyKind::Renyi2 => Ok(0.5 * ln_det.max(0.0)),
        EntropyKind::VonNeumann => von_neumann_term(0.5 * ln_det),
    }
}

/// Entropy of a single-mode covariance block.
pub fn entropy_single_mode(block: &Matrix2<f64>, kind: EntropyKind) -> Result<f64> {
    let d = det2(block);
    if !(d.is_finite() && d > 0.0) {
        return Err(Error::InvalidState(format!(
            "single-mode det = {d:e} is not positive"
        )));
    }
    single_mode_entropy_from_ln_det(d.ln(), kind)
}

/// Joint entropy of the two-mode state.
pub fn entropy(cov: &CovarianceMatrix, kind: EntropyKind) -> Result<f64> {
    match kind {
        EntropyKind::Renyi2 => {
            let ln_det = cov.ln_det()?;
            if ln_det < -4.0 * PHYSICALITY_TOL {
                return Err(Error::InvalidState(format!(
                    "det σ = {:e} < 1",
                    ln_det.exp()
                )));
            }
            Ok(0.5 * ln_det.max(0.0))
        }
        EntropyKind::VonNeumann => {
            let (a, b) = cov.ln_symplectic_eigenvalues()?;
            Ok(von_neumann_term(a)? + von_neumann_term(b)?)
        }
    }
}

/// Entropy of the reduced state of `mode`.
pub fn local_entropy(cov: &CovarianceMatrix, mode: Mode, kind: EntropyKind) -> Result<f64> {
    single_mode_entropy_from_ln_det(cov.ln_det_local(mode)?, kind)
}

/// `I = S_L + S_G − S`, clamped per [`clamp_nonnegative`].
pub fn mutual_information(cov: &CovarianceMatrix, kind: EntropyKind) -> Result<f64> {
    let s = entropy(cov, kind)?;
    let s_l = local_entropy(cov, Mode::L, kind)?;
    let s_g = local_entropy(cov, Mode::G, kind)?;
    clamp_nonnegative((s_l + s_g) - s, "mutual information")
}

/// Conditional covariance of the unmeasured mode after measuring
/// `meas.target`, computed as `[((σ + Π)⁻¹)_{uu}]⁻¹` with `Π` the embedded
/// measurement covariance. Equal to the Schur complement
/// ([`conditional_covariance_schur`]) but built from the bounded `σ⁻¹`.
pub fn conditional_covariance(
    cov: &CovarianceMatrix,
    meas: &GaussianMeasurement,
) -> Result<Matrix2<f64>> {
    let p = cov.inverse()?;
    let shifted_inv = (Matrix4::identity() + p * meas.embedded())
        .try_inverse()
        .ok_or_else(|| Error::InvalidState("σ + σ_M is singular".into()))?
        * p;
    let u = meas.target.other().offset();
    let block = symmetrize(&shifted_inv.fixed_view::<2, 2>(u, u).into_owned());
    inv2(&block)
        .map(|m| symmetrize(&m))
        .ok_or_else(|| Error::InvalidState("conditional precision block is singular".into()))
}

/// `σ_u − σ_C (σ_m + σ_M)⁻¹ σ_Cᵀ` on the dense matrix, with closed-form 2×2
/// inverses. Reference for [`conditional_covariance`].
pub fn conditional_covariance_schur(
    cov: &CovarianceMatrix,
    meas: &GaussianMeasurement,
) -> Result<Matrix2<f64>> {
    let b = cov.blocks();
    let (measured, unmeasured, cross) = match meas.target {
        Mode::G => (b.sigma_g, b.sigma_l, b.sigma_c),
        Mode::L => (b.sigma_l, b.sigma_g, b.sigma_c.transpose()),
    };
    let inv = inv2(&(measured + meas.covariance()))
        .ok_or_else(|| Error::InvalidState("σ_m + σ_M is singular".into()))?;
    Ok(symmetrize(&(unmeasured - cross * inv * cross.transpose())))
}

/// Quantities shared by every discord evaluation on one state.
struct DiscordContext {
    inverse: Matrix4<f64>,
    ln_det: f64,
    kind: EntropyKind,
    measured: Mode,
    /// `S_measured − S`
    entropy_gap: f64,
    measured_block: Matrix2<f64>,
    measured_scale: f64,
}

impl DiscordContext {
    fn new(cov: &CovarianceMatrix, direction: Direction, kind: EntropyKind) -> Result<Self> {
        let measured = direction.measured();
        let block = cov.block(measured, measured);
        let entropy_gap = local_entropy(cov, measured, kind)? - entropy(cov, kind)?;
        Ok(Self {
            inverse: cov.inverse()?,
            ln_det: cov.ln_det()?,
            kind,
            measured,
            entropy_gap,
            measured_block: block.mantissa,
            measured_scale: block.log_scale,
        })
    }

    /// `ln det σ_{u|m}` for a measurement of covariance `sm` on the measured mode.
    fn ln_det_conditional(&self, sm: &Matrix2<f64>) -> Result<f64> {
        let mut pi = Matrix4::zeros();
        let o = self.measured.offset();
        pi.fixed_view_mut::<2, 2>(o, o).copy_from(sm);
        let rel = (Matrix4::identity() + self.inverse * pi).determinant();
        let s = self.measured_scale;
        let local = det2(&(self.measured_block + sm * (-2.0 * s).exp()));
        if !(rel > 0.0 && local > 0.0 && rel.is_finite() && local.is_finite()) {
            return Err(Error::InvalidState(
                "non-positive determinant in discord".into(),
            ));
        }
        Ok(self.ln_det + rel.ln() - (local.ln() + 4.0 * s))
    }

    fn discord(&self, sm: &Matrix2<f64>) -> Result<f64> {
        let cond = single_mode_entropy_from_ln_det(self.ln_det_conditional(sm)?, self.kind)?;
        Ok(self.entropy_gap + cond)
    }

    fn clamped(&self, sm: &Matrix2<f64>) -> Result<f64> {
        clamp_nonnegative(self.discord(sm)?, "discord")
    }
}

/// Discord for a given Gaussian measurement; `meas.target` must be the mode
/// measured in `direction`.
pub fn discord_with_measurement(
    cov: &CovarianceMatrix,
    direction: Direction,
    meas: &GaussianMeasurement,
    kind: EntropyKind,
) -> Result<f64> {
    if meas.target != direction.measured() {
        return Err(Error::InvalidInput(format!(
            "direction {direction:?} measures {:?}, got a measurement on {:?}",
            direction.measured(),
            meas.target
        )));
    }
    DiscordContext::new(cov, direction, kind)?.clamped(&meas.covariance())
}

/// Discord with a heterodyne measurement (`σ_M = 1`).
pub fn discord_heterodyne(
    cov: &CovarianceMatrix,
    direction: Direction,
    kind: EntropyKind,
) -> Result<f64> {
    DiscordContext::new(cov, direction, kind)?.clamped(&Matrix2::identity())
}

/// Search settings for [`discord_minimized`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizerGrid {
    pub n_r: usize,
    pub n_phi: usize,
    pub r_max: f64,
    /// Simplex size at which the local refinement stops.
    pub tol: f64,
}

impl Default for MinimizerGrid {
    fn default() -> Self {
        Self {
            n_r: 64,
            n_phi: 32,
            r_max: 2.0,
            tol: 1e-10,
        }
    }
}

/// Minimum of the discord over Gaussian measurements: a grid over
/// `(r, φ) ∈ [0, r_max] × [0, π)` followed by Nelder–Mead refinement in
/// `(u, φ)` with `r = min(|u|, r_max)`, so `r = 0` is an interior point.
/// Deterministic.
pub fn discord_minimized(
    cov: &CovarianceMatrix,
    direction: Direction,
    kind: EntropyKind,
    grid: &MinimizerGrid,
) -> Result<(f64, GaussianMeasurement)> {
    if grid.n_r < 2 || grid.n_phi < 1 || !(grid.r_max > 0.0) {
        return Err(Error::InvalidInput(format!("bad minimizer grid {grid:?}")));
    }
    let ctx = DiscordContext::new(cov, direction, kind)?;
    let target = direction.measured();
    let meas = |u: f64, phi: f64| GaussianMeasurement {
        r: u.abs().min(grid.r_max),
        phi,
        target,
    };
    // The conditional entropy is increasing in det σ_{u|m} for both entropy
    // kinds, so the search runs on the log-determinant measured from its
    // heterodyne value.
    let relative = RelativeToHeterodyne::new(cov, target)?;
    let objective = |x: [f64; 2]| {
        let m = meas(x[0], x[1]);
        let v = match &relative {
            Some(h) => h.ln_det_ratio(&m),
            None => ctx.ln_det_conditional(&m.covariance()).ok(),
        };
        v.unwrap_or(f64::INFINITY)
    };

    let dr = grid.r_max / (grid.n_r - 1) as f64;
    let dphi = std::f64::consts::PI / grid.n_phi as f64;
    let mut best = ([0.0, 0.0], f64::INFINITY);
    for i in 0..grid.n_r {
        for j in 0..grid.n_phi {
            let x = [i as f64 * dr, j as f64 * dphi];
            let v = objective(x);
            if v < best.1 {
                best = (x, v);
            }
        }
    }
    let (x, fx) = nelder_mead(&objective, best.0, [dr, dphi], grid.tol, 2000);
    // ties keep the grid point, so flat objectives report heterodyne
    let x = if fx < best.1 { x } else { best.0 };
    let m = meas(x[0], x[1].rem_euclid(std::f64::consts::PI));
    Ok((ctx.clamped(&m.covariance())?, m))
}

/// `ln det σ_{u|M} − ln det σ_{u|het}` from the exact difference
/// `σ_{u|M} − σ_{u|het} = C (σ_m + 1)⁻¹ (σ_M − 1) (σ_m + σ_M)⁻¹ Cᵀ`.
/// With `σ_M − 1` built from `expm1` this keeps relative precision near
/// `r = 0` however large σ is; the difference of full log-determinants
/// loses the measurement dependence to rounding once `D` is tiny.
struct RelativeToHeterodyne {
    /// `σ_{u|het}⁻¹ C (σ_m + 1)⁻¹`
    left: Matrix2<f64>,
    ct: Matrix2<f64>,
    sigma_m: Matrix2<f64>,
}

impl RelativeToHeterodyne {
    fn new(cov: &CovarianceMatrix, measured: Mode) -> Result<Option<Self>> {
        let b = cov.blocks();
        let (sigma_m, c) = match measured {
            Mode::G => (b.sigma_g, b.sigma_c),
            Mode::L => (b.sigma_l, b.sigma_c.transpose()),
        };
        let het = conditional_covariance(cov, &GaussianMeasurement::heterodyne(measured))?;
        let built = inv2(&het)
            .zip(inv2(&(sigma_m + Matrix2::identity())))
            .map(|(h, m)| Self {
                left: h * c * m,
                ct: c.transpose(),
                sigma_m,
            });
        Ok(built.filter(|h| h.left.iter().chain(h.sigma_m.iter()).all(|v| v.is_finite())))
    }

    fn ln_det_ratio(&self, meas: &GaussianMeasurement) -> Option<f64> {
        let delta = meas.covariance_minus_identity();
        let k = self.left * delta * inv2(&(self.sigma_m + Matrix2::identity() + delta))? * self.ct;
        let arg = k.trace() + det2(&k);
        (arg > -1.0 && arg.is_finite()).then(|| arg.ln_1p())
    }
}

/// Minimal 2-D Nelder–Mead with standard coefficients.
fn nelder_mead(
    f: &dyn Fn([f64; 2]) -> f64,
    x0: [f64; 2],
    step: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut s = [x0, [x0[0] + step[0], x0[1]], [x0[0], x0[1] + step[1]]];
    let mut v = s.map(f);
    let add =
        |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    for _ in 0..max_iter {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        s = idx.map(|k| s[k]);
        v = idx.map(|k| v[k]);
        let size = (1..3)
            .map(|k| (s[k][0] - s[0][0]).abs().max((s[k][1] - s[0][1]).abs()))
            .fold(0.0, f64::max);
        if size < tol {
            break;
        }
        let centroid = [(s[0][0] + s[1][0]) / 2.0, (s[0][1] + s[1][1]) / 2.0];
        let xr = add(centroid, s[2], -1.0);
        let fr = f(xr);
        if fr < v[0] {
            let xe = add(centroid, s[2], -2.0);
            let fe = f(xe);
            (s[2], v[2]) = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < v[1] {
            (s[2], v[2]) = (xr, fr);
        } else {
            let xc = if fr < v[2] {
                add(centroid, xr, 0.5)
            } else {
                add(centroid, s[2], 0.5)
            };
            let fc = f(xc);
            if fc < v[2].min(fr) {
                (s[2], v[2]) = (xc, fc);
            } else {
                for k in 1..3 {
                    s[k] = add(s[0], s[k], 0.5);
                    v[k] = f(s[k]);
                }
            }
        }
    }
    let k = (0..3).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0);
    (s[k], v[k])
}

/// Smallest symplectic eigenvalue of the partial transpose; `≥ 1` iff the
/// state is separable.
pub fn ppt_min_eigenvalue(cov: &CovarianceMatrix) -> Result<f64> {
    cov.partial_transpose().min_symplectic_eigenvalue()
}

/// Right-hand side of the heterodyne discord identity
/// `D = ln(1 + (e^I − 1)/(e^{S_m} + 1))` in Rényi-2 entropies, with `S_m`
/// the entropy of the measured mode. Evaluated as
/// `ln(e^{S_m} + e^I) − ln(1 + e^{S_m})`.
pub fn central_identity_rhs(cov: &CovarianceMatrix, direction: Direction) -> Result<f64> {
    let kind = EntropyKind::Renyi2;
    let i = mutual_information(cov, kind)?;
    let s_m = local_entropy(cov, direction.measured(), kind)?;
    Ok(log_add_exp(s_m, i) - softplus(s_m))
}

/// Approximate discord `ln(1 + e^{−(S − S_L)} − e^{−S_G})`.
pub fn approx_identity_rhs(s: f64, s_l: f64, s_g: f64) -> Result<f64> {
    let x = (-(s - s_l)).exp() - (-s_g).exp();
    if !(x > -1.0) {
        return Err(Error::Domain(format!(
            "approximate discord undefined: 1 + e^-(S-S_L) - e^-S_G = {:e} ≤ 0",
            1.0 + x
        )));
    }
    Ok(x.ln_1p())
}

/// Every correlation measure of one state.
pub fn correlation_record(
    t: f64,
    cov: &CovarianceMatrix,
    kind: EntropyKind,
) -> Result<CorrelationRecord> {
    let s = entropy(cov, kind)?;
    let s_l = local_entropy(cov, Mode::L, kind)?;
    let s_g = local_entropy(cov, Mode::G, kind)?;
    Ok(CorrelationRecord {
        t,
        s,
        s_l,
        s_g,
        i: clamp_nonnegative((s_l + s_g) - s, "mutual information")?,
        d_lg: discord_heterodyne(cov, Direction::LG, kind)?,
        d_gl: discord_heterodyne(cov, Direction::GL, kind)?,
        nu_pt_min: ppt_min_eigenvalue(cov)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian_state::{
        local_rotation, thermal_product, two_mode_squeezed, TwoModeBlocks,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        let id = CovarianceMatrix::identity();
        assert_eq!(entropy(&id, EntropyKind::Renyi2).unwrap(), 0.0);
        assert_eq!(entropy(&id, EntropyKind::VonNeumann).unwrap(), 0.0);
        let three = Matrix2::identity() * 3.0;
        assert_relative_eq!(
            entropy_single_mode(&three, EntropyKind::Renyi2).unwrap(),
            3f64.ln(),
            epsilon = 1e-15
        );
        // f(3) = 2 ln 2
        assert_relative_eq!(
            entropy_single_mode(&three, EntropyKind::VonNeumann).unwrap(),
            2.0 * 2f64.ln(),
            epsilon = 1e-15
        );
        assert!(entropy_single_mode(&(Matrix2::identity() * 0.5), EntropyKind::Renyi2).is_err());
    }

    #[test]
    fn von_neumann_matches_thermal_occupation_sum() {
        // Thermal state with mean occupation n̄: ν = 2n̄ + 1 and
        // S = (n̄+1) ln(n̄+1) − n̄ ln n̄ = −Σ p_n ln p_n.
        for nbar in [0.3, 1.0, 7.5, 300.0] {
            let q = nbar / (nbar + 1.0);
            let mut direct = 0.0;
            let mut p: f64 = 1.0 / (nbar + 1.0);
            for _ in 0..2_000_000 {
                if p < 1e-300 {
                    break;
                }
                direct -= p * p.ln();
                p *= q;
            }
            let nu = 2.0 * nbar + 1.0;
            let s =
                entropy_single_mode(&(Matrix2::identity() * nu), EntropyKind::VonNeumann).unwrap();
            assert_relative_eq!(s, direct, max_relative = 1e-9);
        }
        // Large-ν branch against the closed form.
        let nbar: f64 = 1e6;
        let s = entropy_single_mode(
            &(Matrix2::identity() * (2.0 * nbar + 1.0)),
            EntropyKind::VonNeumann,
        )
        .unwrap();
        let closed = (nbar + 1.0) * (nbar + 1.0).ln() - nbar * nbar.ln();
        assert_relative_eq!(s, closed, max_relative = 1e-9);
    }

    #[test]
    fn mutual_information_examples() {
        assert_eq!(
            mutual_information(&thermal_product(3.0, 2.0), EntropyKind::Renyi2).unwrap(),
            0.0
        );
        let i = mutual_information(&two_mode_squeezed(0.5), EntropyKind::Renyi2).unwrap();
        assert_relative_eq!(i, 2.0 * 1f64.cosh().ln(), epsilon = 1e-12);
    }

    #[test]
    fn conditional_covariance_examples() {
        let het = GaussianMeasurement::heterodyne(Mode::G);
        let prod = thermal_product(3.0, 2.0);
        assert_relative_eq!(
            conditional_covariance(&prod, &het).unwrap(),
            Matrix2::identity() * 3.0,
            epsilon = 1e-13
        );
        let tms = two_mode_squeezed(0.8);
        assert_relative_eq!(
            conditional_covariance(&tms, &het).unwrap(),
            Matrix2::identity(),
            epsilon = 1e-12
        );
        assert_relative_eq!(
            conditional_covariance_schur(&tms, &het).unwrap(),
            Matrix2::identity(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn discord_examples() {
        let prod = thermal_product(3.0, 2.0);
        for dir in [Direction::LG, Direction::GL] {
            assert!(
                discord_heterodyne(&prod, dir, EntropyKind::Renyi2)
                    .unwrap()
                    .abs()
                    < 1e-14
            );
            let (v, _) =
                discord_minimized(&prod, dir, EntropyKind::Renyi2, &MinimizerGrid::default())
                    .unwrap();
            assert!(v.abs() < 1e-12);
        }
        // Pure entangled state: D = S_G, above ln 2 once r is large enough,
        // and the PPT test agrees.
        let tms = two_mode_squeezed(0.5);
        let d = discord_heterodyne(&tms, Direction::LG, EntropyKind::Renyi2).unwrap();
        assert_relative_eq!(d, 1f64.cosh().ln(), epsilon = 1e-12);
        assert!(d < 2f64.ln());
        let tms = two_mode_squeezed(1.0);
        assert!(discord_heterodyne(&tms, Direction::LG, EntropyKind::Renyi2).unwrap() > 2f64.ln());
        assert!(ppt_min_eigenvalue(&tms).unwrap() < 1.0);
    }

    #[test]
    fn ppt_examples() {
        assert_relative_eq!(
            ppt_min_eigenvalue(&CovarianceMatrix::identity()).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        assert_relative_eq!(
            ppt_min_eigenvalue(&two_mode_squeezed(0.5)).unwrap(),
            (-1f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn optimizer_beats_heterodyne_on_phase_sensitive_state() {
        let c = 0.9;
        let cov = CovarianceMatrix::from_blocks(&TwoModeBlocks {
            sigma_l: Matrix2::identity() * 2.0,
            sigma_g: Matrix2::identity() * 2.0,
            sigma_c: Matrix2::new(c, 0.0, 0.0, 0.0),
        })
        .unwrap();
        let het = discord_heterodyne(&cov, Direction::LG, EntropyKind::Renyi2).unwrap();
        let (min, arg) = discord_minimized(
            &cov,
            Direction::LG,
            EntropyKind::Renyi2,
            &MinimizerGrid::default(),
        )
        .unwrap();
        assert!(min < het - 1e-3, "min {min} het {het}");
        assert!(arg.r > 0.1);
        // Brute force on a finer grid cannot do better than the refined minimum.
        let fine = MinimizerGrid {
            n_r: 200,
            n_phi: 200,
            ..MinimizerGrid::default()
        };
        let mut brute = f64::INFINITY;
        for i in 0..fine.n_r {
            for j in 0..fine.n_phi {
                let m = GaussianMeasurement {
                    r: fine.r_max * i as f64 / (fine.n_r - 1) as f64,
                    phi: std::f64::consts::PI * j as f64 / fine.n_phi as f64,
                    target: Mode::G,
                };
                brute = brute.min(
                    discord_with_measurement(&cov, Direction::LG, &m, EntropyKind::Renyi2).unwrap(),
                );
            }
        }
        assert!(min <= brute + 1e-12);
    }

    #[test]
    fn relative_objective_matches_direct_difference() {
        let cov = random_state(2.0, 3.0, 0.6, 0.4, [0.3, 1.1]);
        for dir in [Direction::LG, Direction::GL] {
            let ctx = DiscordContext::new(&cov, dir, EntropyKind::Renyi2).unwrap();
            let rel = RelativeToHeterodyne::new(&cov, dir.measured())
                .unwrap()
                .unwrap();
            let het = ctx.ln_det_conditional(&Matrix2::identity()).unwrap();
            for (r, phi) in [(0.0, 0.0), (0.3, 0.7), (1.5, 2.0)] {
                let m = GaussianMeasurement {
                    r,
                    phi,
                    target: dir.measured(),
                };
                let direct = ctx.ln_det_conditional(&m.covariance()).unwrap() - het;
                assert_relative_eq!(rel.ln_det_ratio(&m).unwrap(), direct, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn heterodyne_found_on_large_weakly_discordant_state() {
        // phase-covariant state with entries ~1e12 and D ~ 1e-12
        let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let cov = CovarianceMatrix::from_blocks(&TwoModeBlocks {
            sigma_l: Matrix2::identity() * 2444086307194.1914,
            sigma_g: Matrix2::identity() * 2216950461690.2813,
            sigma_c: j * 1918012066118.1274,
        })
        .unwrap();
        for dir in [Direction::LG, Direction::GL] {
            let (_, arg) =
                discord_minimized(&cov, dir, EntropyKind::Renyi2, &MinimizerGrid::default())
                    .unwrap();
            assert!(arg.r < 1e-6, "{dir:?}: r = {}", arg.r);
        }
    }

    #[test]
    fn approx_rhs() {
        assert!(approx_identity_rhs(800.0, 1.0, 800.0).unwrap().abs() < 1e-300);
        assert_relative_eq!(
            approx_identity_rhs(2.0, 2.0, 2f64.ln()).unwrap(),
            1.5f64.ln(),
            epsilon = 1e-15
        );
        assert!(matches!(
            approx_identity_rhs(10.0, 10.0, -1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn clamp_policy() {
        assert_eq!(clamp_nonnegative(-1e-12, "x").unwrap(), 0.0);
        assert_eq!(clamp_nonnegative(0.5, "x").unwrap(), 0.5);
        assert!(clamp_nonnegative(-1e-6, "x").is_err());
    }

    fn random_state(a: f64, b: f64, r: f64, th: f64, phases: [f64; 2]) -> CovarianceMatrix {
        let (s, c) = th.sin_cos();
        let mut bs = Matrix4::identity() * c;
        bs[(0, 2)] = s;
        bs[(1, 3)] = s;
        bs[(2, 0)] = -s;
        bs[(3, 1)] = -s;
        let sq = Matrix4::from_diagonal(&nalgebra::Vector4::new(r.exp(), (-r).exp(), 1.0, 1.0));
        thermal_product(a, b)
            .congruence(&sq)
            .congruence(&bs)
            .congruence(&local_rotation(phases[0], phases[1]))
    }

    proptest! {
        #[test]
        fn measurement_does_not_increase_conditional_uncertainty(
            a in 1.0f64..4.0, b in 1.0f64..4.0, r in -1.0f64..1.0, th in 0.0f64..1.5,
            p0 in 0.0f64..6.3, p1 in 0.0f64..6.3, mr in 0.0f64..2.0, mphi in 0.0f64..std::f64::consts::PI,
        ) {
            let cov = random_state(a, b, r, th, [p0, p1]);
            for target in [Mode::G, Mode::L] {
                let m = GaussianMeasurement { r: mr, phi: mphi, target };
                let cond = conditional_covariance(&cov, &m).unwrap();
                let schur = conditional_covariance_schur(&cov, &m).unwrap();
                prop_assert!((cond - schur).abs().max() < 1e-10 * schur.abs().max());
                let local = cov.blocks();
                let local = local.local(target.other());
                prop_assert!(det2(&cond) <= det2(local) + 1e-12);
            }
        }

        #[test]
        fn discords_bounded_by_mutual_information(
            a in 1.0f64..4.0, b in 1.0f64..4.0, r in -1.0f64..1.0, th in 0.0f64..1.5,
            p0 in 0.0f64..6.3, p1 in 0.0f64..6.3,
        ) {
            let cov = random_state(a, b, r, th, [p0, p1]);
            let rec = correlation_record(0.0, &cov, EntropyKind::Renyi2).unwrap();
            prop_assert!(rec.d_lg >= 0.0 && rec.d_gl >= 0.0);
            prop_assert!(rec.d_lg <= rec.i + 1e-9 && rec.d_gl <= rec.i + 1e-9);
        }
    }
}
