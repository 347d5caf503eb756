//! Brute-force check of the Gaussian layer: the master equation
//!
//! ```text
//! dρ/dt = −i[g(a_L†a_G + a_G†a_L), ρ] + 2γ_L D[a_L]ρ + 2γ_G D[a_G†]ρ
//! D[A]ρ = AρA† − ½{A†A, ρ}
//! ```
//!
//! integrated in a two-mode Fock basis truncated at `n ≤ N` per mode. Basis
//! index is `n_L·(N+1) + n_G`. Ladder operators act by index shifts on the
//! dense `ρ`; no operator or superoperator matrix is ever formed.
//!
//! Truncation makes `a a†` equal `diag(1, …, N, 0)`, which keeps the
//! dissipator trace preserving. Occupation is pumped by the gain bath, so
//! every run watches the population of the top level and fails once it
//! exceeds `leak_tol`.

use log::debug;
use nalgebra::{DMatrix, Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::gaussian_state::{CovarianceMatrix, GaussianState, Mode};
use crate::model::{Complex64, SystemParams};

pub const DEFAULT_STEP: f64 = 2e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockConfig {
    pub cutoff: usize,
    pub alpha_l: Complex64,
    pub alpha_g: Complex64,
    pub leak_tol: f64,
}

impl FockConfig {
    pub fn vacuum(cutoff: usize, leak_tol: f64) -> Self {
        Self {
            cutoff,
            alpha_l: Complex64::new(0.0, 0.0),
            alpha_g: Complex64::new(0.0, 0.0),
            leak_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(Error::InvalidInput(format!(
                "Fock cutoff must be ≥ 2, got {}",
                self.cutoff
            )));
        }
        if !(self.leak_tol > 0.0 && self.leak_tol < 1.0) {
            return Err(Error::InvalidInput(format!(
                "leak_tol must lie in (0, 1), got {}",
                self.leak_tol
            )));
        }
        if !(self.alpha_l.re.is_finite()
            && self.alpha_l.im.is_finite()
            && self.alpha_g.re.is_finite()
            && self.alpha_g.im.is_finite())
        {
            return Err(Error::InvalidInput("non-finite coherent amplitude".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    cutoff: usize,
    rho: DMatrix<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ladder {
    Lower(Mode),
    Raise(Mode),
}

impl DensityOperator {
    pub fn new(cutoff: usize, rho: DMatrix<Complex64>) -> Result<Self> {
        let d = (cutoff + 1) * (cutoff + 1);
        if rho.nrows() != d || rho.ncols() != d {
            return Err(Error::InvalidInput(format!(
                "ρ must be {d}×{d} for cutoff {cutoff}"
            )));
        }
        Ok(Self { cutoff, rho })
    }

    /// `|α_L⟩ ⊗ |α_G⟩`, truncated and renormalised.
    pub fn coherent(cutoff: usize, alpha_l: Complex64, alpha_g: Complex64) -> Self {
        let cl = coherent_amplitudes(cutoff, alpha_l);
        let cg = coherent_amplitudes(cutoff, alpha_g);
        let psi: Vec<Complex64> = cl
            .iter()
            .flat_map(|a| cg.iter().map(move |b| a * b))
            .collect();
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        let d = psi.len();
        let rho = DMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm);
        Self { cutoff, rho }
    }

    /// Product of diagonal states with the given Fock populations.
    pub fn diagonal_product(cutoff: usize, pop_l: &[f64], pop_g: &[f64]) -> Result<Self> {
        if pop_l.len() != cutoff + 1 || pop_g.len() != cutoff + 1 {
            return Err(Error::InvalidInput(
                "population vectors must have cutoff + 1 entries".into(),
            ));
        }
        let d = (cutoff + 1) * (cutoff + 1);
        let mut rho = DMatrix::zeros(d, d);
        for (a, pa) in pop_l.iter().enumerate() {
            for (b, pb) in pop_g.iter().enumerate() {
                let k = a * (cutoff + 1) + b;
                rho[(k, k)] = Complex64::new(pa * pb, 0.0);
            }
        }
        Ok(Self { cutoff, rho })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.rho
    }

    fn dim1(&self) -> usize {
        self.cutoff + 1
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    /// `Tr ρ²` for Hermitian `ρ`.
    pub fn purity(&self) -> f64 {
        self.rho.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.rho - self.rho.adjoint())
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Checks Hermiticity (1e-10), unit trace (1e-8) and positivity (1e-8).
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("ρ not Hermitian: {herm:e}")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidState(format!("Tr ρ = {tr}")));
        }
        let min_ev = self
            .rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_ev < -1e-8 {
            return Err(Error::InvalidState(format!("ρ has eigenvalue {min_ev:e}")));
        }
        Ok(())
    }

    /// Population with `n_L = N` or `n_G = N`.
    pub fn top_level_population(&self) -> f64 {
        let n = self.cutoff;
        let m = self.dim1();
        (0..m * m)
            .filter(|k| k / m == n || k % m == n)
            .map(|k| self.rho[(k, k)].re)
            .sum()
    }

    pub fn reduced(&self, mode: Mode) -> DMatrix<Complex64> {
        let m = self.dim1();
        DMatrix::from_fn(m, m, |a, b| {
            (0..m)
                .map(|n| match mode {
                    Mode::L => self.rho[(a * m + n, b * m + n)],
                    Mode::G => self.rho[(n * m + a, n * m + b)],
                })
                .sum()
        })
    }

    /// `⟨O⟩ = Tr(O ρ)` for a product of ladder operators, rightmost applied first.
    fn expect(&self, ops: &[Ladder]) -> Complex64 {
        let mut x = self.rho.clone();
        for op in ops.iter().rev() {
            x = left(self.cutoff, *op, &x);
        }
        x.trace()
    }
}

fn coherent_amplitudes(cutoff: usize, alpha: Complex64) -> Vec<Complex64> {
    let mut c = Vec::with_capacity(cutoff + 1);
    let mut term = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=cutoff {
        if n > 0 {
            term = term * alpha / (n as f64).sqrt();
        }
        c.push(term);
    }
    c
}

fn mode_parts(cutoff: usize, k: usize, mode: Mode) -> (usize, usize) {
    let m = cutoff + 1;
    let n = match mode {
        Mode::L => k / m,
        Mode::G => k % m,
    };
    let stride = match mode {
        Mode::L => m,
        Mode::G => 1,
    };
    (n, stride)
}

/// `A X` for a truncated ladder operator `A`.
fn left(cutoff: usize, op: Ladder, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = x.nrows();
    let mut out = DMatrix::zeros(d, x.ncols());
    for i in 0..d {
        let (src, amp) = match op {
            // a|n+1⟩ = sqrt(n+1)|n⟩, so (aX)_i = sqrt(n_i+1) X_{i+stride}
            Ladder::Lower(mode) => {
                let (n, stride) = mode_parts(cutoff, i, mode);
                if n == cutoff {
                    continue;
                }
                (i + stride, ((n + 1) as f64).sqrt())
            }
            Ladder::Raise(mode) => {
                let (n, stride) = mode_parts(cutoff, i, mode);
                if n == 0 {
                    continue;
                }
                (i - stride, (n as f64).sqrt())
            }
        };
        for c in 0..x.ncols() {
            out[(i, c)] = x[(src, c)] * amp;
        }
    }
    out
}

/// `X A` for a truncated ladder operator `A`.
fn right(cutoff: usize, x: &DMatrix<Complex64>, op: Ladder) -> DMatrix<Complex64> {
    let d = x.ncols();
    let mut out = DMatrix::zeros(x.nrows(), d);
    for j in 0..d {
        let (src, amp) = match op {
            // (X a)_{·j} = sqrt(n_j) X_{·, j−stride}
            Ladder::Lower(mode) => {
                let (n, stride) = mode_parts(cutoff, j, mode);
                if n == 0 {
                    continue;
                }
                (j - stride, (n as f64).sqrt())
            }
            Ladder::Raise(mode) => {
                let (n, stride) = mode_parts(cutoff, j, mode);
                if n == cutoff {
                    continue;
                }
                (j + stride, ((n + 1) as f64).sqrt())
            }
        };
        for r in 0..x.nrows() {
            out[(r, j)] = x[(r, src)] * amp;
        }
    }
    out
}

/// Right-hand side of the master equation.
pub fn lindblad_rhs(params: &SystemParams, rho: &DensityOperator) -> DMatrix<Complex64> {
    let n = rho.cutoff;
    let m = n + 1;
    let x = &rho.rho;
    let d = x.nrows();
    let (al, ag) = (Ladder::Lower(Mode::L), Ladder::Lower(Mode::G));
    let (al_d, ag_d) = (Ladder::Raise(Mode::L), Ladder::Raise(Mode::G));

    // H ρ with H = g(a_L† a_G + a_G† a_L)
    let h_rho = (left(n, al_d, &left(n, ag, x)) + left(n, ag_d, &left(n, al, x)))
        * Complex64::new(params.g(), 0.0);
    let mut out = (&h_rho - h_rho.adjoint()) * Complex64::new(0.0, -1.0);

    // Diagonal parts of the anticommutators: n_L for loss, a_G a_G† (truncated) for gain.
    let loss = 2.0 * params.gamma_l();
    let gain = 2.0 * params.gamma_g();
    let weight = |k: usize| {
        let nl = (k / m) as f64;
        let ng = k % m;
        let aad = if ng == n { 0.0 } else { (ng + 1) as f64 };
        -0.5 * (loss * nl + gain * aad)
    };
    let w: Vec<f64> = (0..d).map(weight).collect();
    for i in 0..d {
        for j in 0..d {
            out[(i, j)] += x[(i, j)] * (w[i] + w[j]);
        }
    }
    if loss > 0.0 {
        out += right(n, &left(n, al, x), al_d) * Complex64::new(loss, 0.0);
    }
    if gain > 0.0 {
        out += right(n, &left(n, ag_d, x), ag) * Complex64::new(gain, 0.0);
    }
    out
}

/// States at each of `times` (ascending, `≥ 0`) from the configured
/// coherent start, by RK4 with Hermitisation and trace renormalisation after
/// every step.
pub fn integrate_samples(
    params: &SystemParams,
    cfg: &FockConfig,
    times: &[f64],
    step: f64,
) -> Result<Vec<DensityOperator>> {
    cfg.validate()?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidInput(format!("step must be > 0, got {step}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidInput(
            "sample times must be ascending and ≥ 0".into(),
        ));
    }
    let mut state = DensityOperator::coherent(cfg.cutoff, cfg.alpha_l, cfg.alpha_g);
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    let mut max_drift: f64 = 0.0;
    for &target in times {
        while now < target {
            let h = step.min(target - now);
            let h = if target - (now + h) < 1e-12 * step {
                target - now
            } else {
                h
            };
            rk4_step(params, &mut state, h);
            now += h;
            state.rho = (&state.rho + state.rho.adjoint()) * Complex64::new(0.5, 0.0);
            let tr = state.trace().re;
            max_drift = max_drift.max((tr - 1.0).abs());
            state.rho /= Complex64::new(tr, 0.0);
            let leak = state.top_level_population();
            if leak > cfg.leak_tol {
                return Err(Error::Truncation {
                    time: now,
                    population: leak,
                    leak_tol: cfg.leak_tol,
                });
            }
        }
        out.push(state.clone());
    }
    debug!("Fock integration: max per-step trace renormalisation {max_drift:e}");
    Ok(out)
}

pub fn integrate(
    params: &SystemParams,
    cfg: &FockConfig,
    t: f64,
    step: f64,
) -> Result<DensityOperator> {
    Ok(integrate_samples(params, cfg, &[t], step)?.remove(0))
}

fn rk4_step(params: &SystemParams, state: &mut DensityOperator, h: f64) {
    let n = state.cutoff;
    let at = |x: DMatrix<Complex64>| DensityOperator { cutoff: n, rho: x };
    let hc = |v: f64| Complex64::new(v, 0.0);
    let k1 = lindblad_rhs(params, state);
    let k2 = lindblad_rhs(params, &at(&state.rho + &k1 * hc(0.5 * h)));
    let k3 = lindblad_rhs(params, &at(&state.rho + &k2 * hc(0.5 * h)));
    let k4 = lindblad_rhs(params, &at(&state.rho + &k3 * hc(h)));
    state.rho += (k1 + k2 * hc(2.0) + k3 * hc(2.0) + k4) * hc(h / 6.0);
}

/// Mean vector and covariance from normal-ordered moments, using the
/// canonical commutator for the symmetric parts.
pub fn extract_moments(rho: &DensityOperator) -> Result<GaussianState> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    // X_i = u_i b + ū_i b†: x = (b + b†)/√2, p = (b − b†)/(i√2)
    let quad = [
        (Mode::L, Complex64::new(s, 0.0)),
        (Mode::L, Complex64::new(0.0, -s)),
        (Mode::G, Complex64::new(s, 0.0)),
        (Mode::G, Complex64::new(0.0, -s)),
    ];
    let idx = |m: Mode| if m == Mode::L { 0 } else { 1 };
    let modes = [Mode::L, Mode::G];
    let first: Vec<Complex64> = modes
        .iter()
        .map(|&m| rho.expect(&[Ladder::Lower(m)]))
        .collect();
    // nn[k][l] = ⟨b_k† b_l⟩, mm[k][l] = ⟨b_k b_l⟩
    let mut nn = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut mm = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (k, &mk) in modes.iter().enumerate() {
        for (l, &ml) in modes.iter().enumerate() {
            nn[k][l] = rho.expect(&[Ladder::Raise(mk), Ladder::Lower(ml)]);
            mm[k][l] = rho.expect(&[Ladder::Lower(mk), Ladder::Lower(ml)]);
        }
    }
    let mean = Vector4::from_fn(|i, _| {
        let (m, u) = quad[i];
        2.0 * (u * first[idx(m)]).re
    });
    let sigma = Matrix4::from_fn(|i, j| {
        let (mi, ui) = quad[i];
        let (mj, uj) = quad[j];
        let (k, l) = (idx(mi), idx(mj));
        let delta = if k == l { 1.0 } else { 0.0 };
        let sym = ui * uj * mm[k][l] * 2.0
            + ui * uj.conj() * (nn[l][k] * 2.0 + delta)
            + ui.conj() * uj * (nn[k][l] * 2.0 + delta)
            + ui.conj() * uj.conj() * mm[k][l].conj() * 2.0;
        0.5 * sym.re * 2.0 - 2.0 * mean[i] * mean[j]
    });
    Ok(GaussianState::new(
        mean,
        CovarianceMatrix::new(crate::linalg::symmetrize(&sigma))?,
    ))
}

/// Rényi-2 entropies `(S, S_L, S_G)` of the Fock state.
pub fn renyi2_entropies(rho: &DensityOperator) -> (f64, f64, f64) {
    let purity = |m: &DMatrix<Complex64>| m.iter().map(|c| c.norm_sqr()).sum::<f64>();
    (
        -rho.purity().ln(),
        -purity(&rho.reduced(Mode::L)).ln(),
        -purity(&rho.reduced(Mode::G)).ln(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordEstimate {
    pub value: f64,
    /// Monte-Carlo standard error of the conditional-entropy average.
    pub std_error: f64,
    pub samples: usize,
}

/// Rényi-2 discord `D_LG = S_G − S + E_β[S(ρ_{L|β})]` with the conditional
/// states of a heterodyne (coherent-state) measurement on G. Outcomes are
/// drawn from a Gaussian with the Husimi covariance of the Gaussian
/// reference state `reference_g` (the G block of σ) and reweighted to the
/// Fock state's own outcome density. Deterministic for a fixed `seed`.
pub fn heterodyne_discord_mc(
    rho: &DensityOperator,
    reference_g: &nalgebra::Matrix2<f64>,
    samples: usize,
    seed: u64,
) -> Result<DiscordEstimate> {
    if samples < 2 {
        return Err(Error::InvalidInput(
            "need at least two Monte-Carlo samples".into(),
        ));
    }
    let m = rho.dim1();
    let (s, _, s_g) = renyi2_entropies(rho);
    // Proposal: Re β, Im β with covariance (σ_G + 1)/4.
    let cov = (reference_g + nalgebra::Matrix2::identity()) / 4.0;
    let chol = cov
        .cholesky()
        .ok_or_else(|| Error::InvalidInput("reference block not positive definite".into()))?;
    let l = chol.l();
    let cov_inv = chol.inverse();
    let norm_q = 1.0 / (2.0 * std::f64::consts::PI * cov.determinant().sqrt());
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut weights = Vec::with_capacity(samples);
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        let z = nalgebra::Vector2::new(normal.sample(&mut rng), normal.sample(&mut rng));
        let v = l * z;
        let beta = Complex64::new(v[0], v[1]);
        let q = norm_q * (-0.5 * (v.transpose() * cov_inv * v)[(0, 0)]).exp();
        let c = coherent_amplitudes(rho.cutoff, beta);
        // ρ̃_L = ⟨β|_G ρ |β⟩_G
        let cond = DMatrix::from_fn(m, m, |a, b| {
            let mut acc = Complex64::new(0.0, 0.0);
            for n1 in 0..m {
                for n2 in 0..m {
                    acc += c[n1].conj() * rho.rho[(a * m + n1, b * m + n2)] * c[n2];
                }
            }
            acc
        });
        let p = cond.trace().re;
        if !(p > 0.0) {
            continue;
        }
        let purity = cond.iter().map(|x| x.norm_sqr()).sum::<f64>() / (p * p);
        weights.push(p / std::f64::consts::PI / q);
        values.push(-purity.ln());
    }
    let wsum: f64 = weights.iter().sum();
    let mean = weights.iter().zip(&values).map(|(w, v)| w * v).sum::<f64>() / wsum;
    let var = weights
        .iter()
        .zip(&values)
        .map(|(w, v)| (w / wsum).powi(2) * (v - mean).powi(2))
        .sum::<f64>();
    Ok(DiscordEstimate {
        value: s_g - s + mean,
        std_error: var.sqrt(),
        samples: values.len(),
    })
}
