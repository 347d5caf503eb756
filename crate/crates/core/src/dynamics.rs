//! Time evolution of the covariance matrix under `dσ/dt = Yσ + σYᵀ + 4D`
//! and of the mean field under `dψ/dt = −iHψ`.
//!
//! [`propagate_exact`] uses the Van Loan construction: with
//! `A = [[Y, 4D], [0, −Yᵀ]]` and `e^{At} = [[F, G], [0, ·]]`,
//! `σ(t) = F σ₀ Fᵀ + G Fᵀ`. When the drift spectrum is real and split
//! (`λ± = a ± s`, `s > 0`) the solution spreads over scales `e^{2λ±t}` and a
//! dense result loses every direction that is not the fastest one. In that
//! case the same solution is written in the (real) eigenbasis of `Y`, where
//! it is diagonal in time, and returned in factored form (see
//! [`CovarianceMatrix`]). The dense route is still taken whenever the split
//! is too small to matter, in particular near and at the exceptional point
//! where `Y` is defective.

use nalgebra::{Complex, Matrix2, Matrix4, SMatrix, Vector2, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian_state::{CovarianceMatrix, GaussianState, PHYSICALITY_TOL};
use crate::linalg::symmetrize;
use crate::model::{
    build_diffusion, build_drift, build_mean_field_hamiltonian, spectral_abscissa, Complex64,
    SystemParams,
};

pub const DEFAULT_RK4_STEP: f64 = 1e-3;

/// `σ(t)` from `σ₀` by the exact propagator.
pub fn propagate_exact(
    params: &SystemParams,
    sigma0: &CovarianceMatrix,
    t: f64,
) -> Result<CovarianceMatrix> {
    check_time(t)?;
    if t == 0.0 || (params.scale() == 0.0 && params.g() == 0.0) {
        return Ok(sigma0.clone());
    }
    match EigenPropagator::new(params) {
        // A factored input has already lost its small directions in dense
        // form, so it stays on the eigenbasis route.
        Some(ep) if sigma0.is_factored() || ep.worth_splitting(params, t) => {
            ep.propagate(sigma0, t)
        }
        _ => propagate_van_loan(params, sigma0, t),
    }
}

/// Dense Van Loan propagation; the reference for [`propagate_exact`].
pub fn propagate_van_loan(
    params: &SystemParams,
    sigma0: &CovarianceMatrix,
    t: f64,
) -> Result<CovarianceMatrix> {
    check_time(t)?;
    let s0 = sigma0.matrix();
    let overflow = || Error::Overflow {
        time: t,
        exponent: 2.0 * spectral_abscissa(params) * t + 2.0 * sigma0.max_log_scale(),
    };
    if s0.iter().any(|x| !x.is_finite()) {
        return Err(overflow());
    }
    let (f, g) = van_loan_blocks(params, t);
    let sigma = symmetrize(&(f * s0 * f.transpose() + g * f.transpose()));
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(overflow());
    }
    CovarianceMatrix::new(sigma)
}

/// `(F, G)` blocks of `exp(t·[[Y, 4D], [0, −Yᵀ]])`.
fn van_loan_blocks(params: &SystemParams, t: f64) -> (Matrix4<f64>, Matrix4<f64>) {
    let y = build_drift(params).0;
    let d = build_diffusion(params).0;
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    a.fixed_view_mut::<4, 4>(0, 0).copy_from(&(y * t));
    a.fixed_view_mut::<4, 4>(0, 4).copy_from(&(d * (4.0 * t)));
    a.fixed_view_mut::<4, 4>(4, 4)
        .copy_from(&(-y.transpose() * t));
    let e = a.exp();
    (
        e.fixed_view::<4, 4>(0, 0).into_owned(),
        e.fixed_view::<4, 4>(0, 4).into_owned(),
    )
}

/// Propagator in the real eigenbasis of `Y` for a real, split spectrum.
struct EigenPropagator {
    basis: Matrix4<f64>,
    basis_inv: Matrix4<f64>,
    rates: Vector4<f64>,
    /// `V⁻¹ (4D) V⁻ᵀ`
    noise: Matrix4<f64>,
    split: f64,
}

impl EigenPropagator {
    fn new(params: &SystemParams) -> Option<Self> {
        let (g, gl, gg) = (params.g(), params.gamma_l(), params.gamma_g());
        let disc = params.mean_rate().powi(2) - g * g;
        if disc <= 0.0 {
            return None;
        }
        let split = disc.sqrt();
        let a = params.rate_imbalance();
        let i = Complex64::i();
        let mut basis = Matrix4::zeros();
        let mut rates = Vector4::zeros();
        for (k, lambda) in [a + split, a - split].into_iter().enumerate() {
            // Both rows of (A − λ)u = 0 with A = −iH give a candidate; take
            // the better-conditioned one (one of them vanishes when g = 0).
            let u1 = Vector2::new(-i * g, Complex64::new(lambda + gl, 0.0));
            let u2 = Vector2::new(Complex64::new(lambda - gg, 0.0), -i * g);
            let u = if u1.norm() >= u2.norm() { u1 } else { u2 };
            let u = u / Complex64::new(u.norm(), 0.0);
            basis.set_column(2 * k, &realify(&u));
            basis.set_column(2 * k + 1, &realify(&(u * i)));
            rates[2 * k] = lambda;
            rates[2 * k + 1] = lambda;
        }
        let basis_inv = basis.try_inverse()?;
        let d4 = build_diffusion(params).0 * 4.0;
        let noise = symmetrize(&(basis_inv * d4 * basis_inv.transpose()));
        Some(Self {
            basis,
            basis_inv,
            rates,
            noise,
            split,
        })
    }

    /// The split pays off once `e^{4st}` outgrows the conditioning of the
    /// eigenbasis, which degrades like `scale/s` towards the EP.
    fn worth_splitting(&self, params: &SystemParams, t: f64) -> bool {
        4.0 * self.split * t > 2.0 * (params.scale() / self.split).ln() + 1.0
    }

    fn propagate(&self, sigma0: &CovarianceMatrix, t: f64) -> Result<CovarianceMatrix> {
        let (b0, l0, m0) = sigma0.factors();
        // σ₀ = V diag(e^{ℓ₀}) C diag(e^{ℓ₀}) Vᵀ
        let (c, ell0) = if *b0 == self.basis {
            (*m0, *l0)
        } else {
            let (b, s) = sigma0.scaled_matrix();
            (
                self.basis_inv * b * self.basis_inv.transpose(),
                Vector4::repeat(s),
            )
        };
        let ell =
            Vector4::from_fn(|i, _| (ell0[i] + self.rates[i] * t).max(self.rates[i].max(0.0) * t));
        let core = Matrix4::from_fn(|i, j| {
            let rho = self.rates[i] + self.rates[j];
            let kappa = ell[i] + ell[j];
            let homogeneous = (ell0[i] + ell0[j] + rho * t - kappa).exp() * c[(i, j)];
            homogeneous + self.noise[(i, j)] * scaled_growth_integral(rho, kappa, t)
        });
        if core.iter().chain(ell.iter()).any(|x| !x.is_finite()) {
            return Err(Error::Overflow {
                time: t,
                exponent: 2.0 * ell.max(),
            });
        }
        Ok(CovarianceMatrix::from_factors(self.basis, ell, core))
    }
}

/// `e^{−κ} ∫₀ᵗ e^{ρs} ds`, assuming `κ ≥ max(ρt, 0)`.
fn scaled_growth_integral(rho: f64, kappa: f64, t: f64) -> f64 {
    let x = rho * t;
    if x.abs() < 1e-12 {
        (-kappa).exp() * t * (1.0 + 0.5 * x)
    } else if rho > 0.0 {
        (x - kappa).exp() * (-(-x).exp_m1()) / rho
    } else {
        (-kappa).exp() * x.exp_m1() / rho
    }
}

/// Quadrature vector of a complex amplitude pair, `√2 (Re u₀, Im u₀, Re u₁, Im u₁)`.
fn realify(u: &Vector2<Complex64>) -> Vector4<f64> {
    Vector4::new(u[0].re, u[0].im, u[1].re, u[1].im) * std::f64::consts::SQRT_2
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "time must be finite and ≥ 0, got {t}"
        )))
    }
}

fn lyapunov_rhs(y: &Matrix4<f64>, d4: &Matrix4<f64>, s: &Matrix4<f64>) -> Matrix4<f64> {
    y * s + s * y.transpose() + d4
}

/// Classical fixed-step RK4 on the covariance equation; the last step is
/// shortened to land on `t`.
pub fn propagate_rk4(
    params: &SystemParams,
    sigma0: &CovarianceMatrix,
    t: f64,
    step: f64,
) -> Result<CovarianceMatrix> {
    check_time(t)?;
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::InvalidInput(format!(
            "rk4 step must be > 0, got {step}"
        )));
    }
    if t == 0.0 {
        return Ok(sigma0.clone());
    }
    let y = build_drift(params).0;
    let d4 = build_diffusion(params).0 * 4.0;
    let mut s = sigma0.matrix();
    let n_full = (t / step).floor() as u64;
    let rest = t - n_full as f64 * step;
    let mut steps: Vec<(u64, f64)> = vec![(n_full, step)];
    if rest > step * 1e-12 {
        steps.push((1, rest));
    }
    for (count, h) in steps {
        for _ in 0..count {
            let k1 = lyapunov_rhs(&y, &d4, &s);
            let k2 = lyapunov_rhs(&y, &d4, &(s + k1 * (0.5 * h)));
            let k3 = lyapunov_rhs(&y, &d4, &(s + k2 * (0.5 * h)));
            let k4 = lyapunov_rhs(&y, &d4, &(s + k3 * h));
            s = symmetrize(&(s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)));
        }
    }
    if s.iter().any(|x| !x.is_finite()) {
        return Err(Error::Overflow {
            time: t,
            exponent: 2.0 * spectral_abscissa(params) * t,
        });
    }
    CovarianceMatrix::new(s)
}

/// `ψ(t) = e^{−iHt} ψ₀` for `ψ = (⟨a_L⟩, ⟨a_G⟩)`.
pub fn evolve_mean_field(
    params: &SystemParams,
    psi0: &Vector2<Complex64>,
    t: f64,
) -> Vector2<Complex64> {
    let h = build_mean_field_hamiltonian(params).0;
    let generator: Matrix2<Complex64> = h * Complex::new(0.0, -t);
    generator.exp() * psi0
}

/// Quadrature means `(x_L, p_L, x_G, p_G)` of a mean-field amplitude pair.
pub fn quadrature_means(psi: &Vector2<Complex64>) -> Vector4<f64> {
    realify(psi)
}

pub fn mean_field_amplitudes(mean: &Vector4<f64>) -> Vector2<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Vector2::new(
        Complex::new(mean[0] * r, mean[1] * r),
        Complex::new(mean[2] * r, mean[3] * r),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Integrator {
    Exact,
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub t_final: f64,
    pub n_samples: usize,
    pub integrator: Integrator,
    pub rk4_step: f64,
    /// Tolerance on `ν_min ≥ 1` enforced at every sample.
    pub physicality_tol: f64,
}

impl TrajectoryConfig {
    pub fn new(t_final: f64, n_samples: usize) -> Self {
        Self {
            t_final,
            n_samples,
            integrator: Integrator::Exact,
            rk4_step: DEFAULT_RK4_STEP,
            physicality_tol: PHYSICALITY_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::InvalidInput(format!(
                "t_final must be > 0, got {}",
                self.t_final
            )));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidInput(format!(
                "n_samples must be ≥ 2, got {}",
                self.n_samples
            )));
        }
        if !(self.rk4_step.is_finite() && self.rk4_step > 0.0 && self.rk4_step <= self.t_final) {
            return Err(Error::InvalidInput(format!(
                "rk4_step must lie in (0, t_final], got {}",
                self.rk4_step
            )));
        }
        if !(self.physicality_tol.is_finite() && self.physicality_tol >= 0.0) {
            return Err(Error::InvalidInput("physicality_tol must be ≥ 0".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_samples - 1) as f64;
        (0..self.n_samples)
            .map(|k| {
                if k + 1 == self.n_samples {
                    self.t_final
                } else {
                    self.t_final * k as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GaussianState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &GaussianState)> {
        self.times.iter().copied().zip(self.states.iter())
    }
}

/// Samples `n_samples` states uniformly on `[0, t_final]`. The exact
/// integrator restarts from `t = 0` for every sample; RK4 continues from the
/// previous one.
pub fn sample_trajectory(
    params: &SystemParams,
    state0: &GaussianState,
    cfg: &TrajectoryConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let times = cfg.times();
    let psi0 = mean_field_amplitudes(&state0.mean);
    let mut states = Vec::with_capacity(times.len());
    let mut prev: Option<(f64, CovarianceMatrix)> = None;
    for &t in &times {
        let cov = match (cfg.integrator, &prev) {
            (Integrator::Exact, _) => propagate_exact(params, &state0.cov, t)?,
            (Integrator::Rk4, None) => propagate_rk4(params, &state0.cov, t, cfg.rk4_step)?,
            (Integrator::Rk4, Some((t_prev, c))) => {
                propagate_rk4(params, c, t - t_prev, cfg.rk4_step)?
            }
        };
        cov.check_physical(cfg.physicality_tol, t)?;
        let mean = if state0.mean == Vector4::zeros() {
            Vector4::zeros()
        } else {
            let m = quadrature_means(&evolve_mean_field(params, &psi0, t));
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Overflow {
                    time: t,
                    exponent: spectral_abscissa(params) * t,
                });
            }
            m
        };
        prev = Some((t, cov.clone()));
        states.push(GaussianState::new(mean, cov));
    }
    Ok(Trajectory { times, states })
}

/// Unique solution of `Yσ + σYᵀ + 4D = 0`, from the Kronecker form
/// `(1⊗Y + Y⊗1) vec σ = −vec 4D`. Exists only when no two drift eigenvalues
/// sum to zero; it is the long-time limit only when `Y` is stable.
pub fn stationary_covariance(params: &SystemParams) -> Result<CovarianceMatrix> {
    let y = build_drift(params).0;
    let d4 = build_diffusion(params).0 * 4.0;
    let id = Matrix4::<f64>::identity();
    let k = id.kronecker(&y) + y.kronecker(&id);
    let rhs = -SMatrix::<f64, 16, 1>::from_column_slice(d4.as_slice());
    let sol = k
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Domain("drift spectrum admits no stationary covariance".into()))?;
    let sigma = Matrix4::from_column_slice(sol.as_slice());
    if sigma.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(
            "drift spectrum admits no stationary covariance".into(),
        ));
    }
    CovarianceMatrix::new(symmetrize(&sigma))
}

/// Max-entry norm of `Yσ + σYᵀ + 4D`.
pub fn lyapunov_residual(params: &SystemParams, sigma: &Matrix4<f64>) -> f64 {
    let y = build_drift(params).0;
    let d4 = build_diffusion(params).0 * 4.0;
    lyapunov_rhs(&y, &d4, sigma).abs().max()
}
