//! Regime classification, long-time asymptotic formulas and the fitting
//! tools used to check them.
//!
//! The drift has two distinct eigenvalues `λ± = a ± sqrt(γ̄² − g²)` with
//! `a = (γ_G − γ_L)/2` and `γ̄ = (γ_L + γ_G)/2`, each doubly degenerate.
//! Their product is `g² − γ_Lγ_G`, so the `(γ_L, γ_G)` plane splits along
//! three curves: the balanced line `γ_L = γ_G`, the coalescence line
//! `γ_L + γ_G = 2g` and the hyperbola `γ_Lγ_G = g²`.
//!
//! | region | fixed point     | where                                  |
//! |--------|-----------------|----------------------------------------|
//! | I      | unstable spiral | `γ_G > γ_L`, `γ_L + γ_G < 2g`           |
//! | II     | unstable node   | `γ_G > γ_L`, `γ_L + γ_G > 2g`, `γ_Lγ_G < g²` |
//! | III    | stable spiral   | `γ_G < γ_L`, `γ_L + γ_G < 2g`           |
//! | IV     | stable node     | `γ_G < γ_L`, `γ_L + γ_G > 2g`, `γ_Lγ_G < g²` |
//! | V      | saddle          | `γ_Lγ_G > g²` (either side of the balanced line) |

use nalgebra::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::correlations::{correlation_record, CorrelationRecord, EntropyKind};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::{drift_eigenvalues, Complex64, SystemParams};

/// Default relative width of the bands around the boundary curves.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PtPhase {
    Unbroken,
    Exceptional,
    Broken,
    NotApplicable,
}

impl PtPhase {
    pub fn label(self) -> &'static str {
        match self {
            PtPhase::Unbroken => "UP",
            PtPhase::Exceptional => "EP",
            PtPhase::Broken => "BP",
            PtPhase::NotApplicable => "n/a",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    I,
    II,
    III,
    IV,
    V,
    Boundary,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::III => "III",
            Region::IV => "IV",
            Region::V => "V",
            Region::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FixedPoint {
    StableSpiral,
    StableNode,
    UnstableSpiral,
    UnstableNode,
    Saddle,
    Center,
    Degenerate,
}

impl FixedPoint {
    pub fn label(self) -> &'static str {
        match self {
            FixedPoint::StableSpiral => "stable_spiral",
            FixedPoint::StableNode => "stable_node",
            FixedPoint::UnstableSpiral => "unstable_spiral",
            FixedPoint::UnstableNode => "unstable_node",
            FixedPoint::Saddle => "saddle",
            FixedPoint::Center => "center",
            FixedPoint::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClass {
    pub on_pt_line: bool,
    pub pt_phase: PtPhase,
    pub region: Region,
    pub fixed_point: FixedPoint,
    /// `λ+`, `λ-` with `Re λ+ ≥ Re λ-`.
    pub lambda: [Complex64; 2],
}

fn rate_scale(params: &SystemParams) -> f64 {
    params.scale().max(params.g()).max(f64::MIN_POSITIVE)
}

/// Classification from the drift eigenvalues. Points within `tol` (relative
/// to the largest rate) of a boundary are labelled [`Region::Boundary`].
pub fn classify(params: &SystemParams, tol: f64) -> RegimeClass {
    let scale = rate_scale(params);
    let band = tol * scale;
    let lambda = drift_eigenvalues(params);
    let g = params.g();

    let on_pt_line = (params.gamma_l() - params.gamma_g()).abs() <= band;
    let pt_phase = if !on_pt_line {
        PtPhase::NotApplicable
    } else if (params.mean_rate() - g).abs() <= band {
        PtPhase::Exceptional
    } else if params.mean_rate() < g {
        PtPhase::Unbroken
    } else {
        PtPhase::Broken
    };

    let (region, fixed_point) = if (lambda[0] - lambda[1]).norm() <= band {
        (Region::Boundary, FixedPoint::Degenerate)
    } else if lambda[0].im != 0.0 {
        let re = lambda[0].re;
        if re.abs() <= band {
            (Region::Boundary, FixedPoint::Center)
        } else if re > 0.0 {
            (Region::I, FixedPoint::UnstableSpiral)
        } else {
            (Region::III, FixedPoint::StableSpiral)
        }
    } else {
        let (hi, lo) = (lambda[0].re, lambda[1].re);
        if hi.abs() <= band || lo.abs() <= band {
            (Region::Boundary, FixedPoint::Degenerate)
        } else if lo > 0.0 {
            (Region::II, FixedPoint::UnstableNode)
        } else if hi < 0.0 {
            (Region::IV, FixedPoint::StableNode)
        } else {
            (Region::V, FixedPoint::Saddle)
        }
    };
    RegimeClass {
        on_pt_line,
        pt_phase,
        region,
        fixed_point,
        lambda,
    }
}

/// Region from the three boundary curves alone, without eigenvalues.
pub fn region_from_boundaries(params: &SystemParams, tol: f64) -> Region {
    let scale = rate_scale(params);
    let (gl, gg, g) = (params.gamma_l(), params.gamma_g(), params.g());
    let hyperbola = gl * gg - g * g;
    if hyperbola.abs() <= tol * scale * scale {
        return Region::Boundary;
    }
    if hyperbola > 0.0 {
        return Region::V;
    }
    let balance = gg - gl;
    let ep_line = gl + gg - 2.0 * g;
    if balance.abs() <= tol * scale || ep_line.abs() <= tol * scale {
        return Region::Boundary;
    }
    match (balance > 0.0, ep_line < 0.0) {
        (true, true) => Region::I,
        (true, false) => Region::II,
        (false, true) => Region::III,
        (false, false) => Region::IV,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantity {
    I,
    DLG,
    DGL,
    S,
    SL,
    SG,
}

impl Quantity {
    pub fn of(self, rec: &CorrelationRecord) -> f64 {
        match self {
            Quantity::I => rec.i,
            Quantity::DLG => rec.d_lg,
            Quantity::DGL => rec.d_gl,
            Quantity::S => rec.s,
            Quantity::SL => rec.s_l,
            Quantity::SG => rec.s_g,
        }
    }
}

/// Functional forms. Coefficients:
/// `Constant [c]`, `PowerLawDecay [A, p]` for `A t^p` (`p < 0` for decay),
/// `LinearGrowth [slope, intercept]`, `LogGrowth [A, B]` for `A ln t + B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Form {
    Constant,
    PowerLawDecay,
    LinearGrowth,
    LogGrowth,
}

impl Form {
    pub fn label(self) -> &'static str {
        match self {
            Form::Constant => "constant",
            Form::PowerLawDecay => "power_law",
            Form::LinearGrowth => "linear",
            Form::LogGrowth => "log",
        }
    }

    pub fn evaluate(self, coefficients: &[f64], t: f64) -> f64 {
        let c = |k: usize| coefficients.get(k).copied().unwrap_or(0.0);
        match self {
            Form::Constant => c(0),
            Form::PowerLawDecay => c(0) * t.powf(c(1)),
            Form::LinearGrowth => c(0) * t + c(1),
            Form::LogGrowth => c(0) * t.ln() + c(1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPrediction {
    pub quantity: Quantity,
    pub form: Form,
    pub coefficients: Vec<f64>,
}

impl AsymptoticPrediction {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.form.evaluate(&self.coefficients, t)
    }
}

/// Long-time predictions for one PT-line phase, evaluated at `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticValues {
    pub t: f64,
    pub mutual_information: f64,
    pub discord_lg: f64,
    pub discord_gl: f64,
    pub predictions: Vec<AsymptoticPrediction>,
}

impl AsymptoticValues {
    fn from_predictions(t: f64, predictions: Vec<AsymptoticPrediction>) -> Self {
        let at = |q: Quantity| {
            predictions
                .iter()
                .find(|p| p.quantity == q)
                .map_or(f64::NAN, |p| p.evaluate(t))
        };
        Self {
            t,
            mutual_information: at(Quantity::I),
            discord_lg: at(Quantity::DLG),
            discord_gl: at(Quantity::DGL),
            predictions,
        }
    }
}

fn require_phase(params: &SystemParams, want: PtPhase, t: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidInput(format!(
            "asymptotic time must be > 0, got {t}"
        )));
    }
    let class = classify(params, BOUNDARY_TOL);
    if class.pt_phase != want {
        return Err(Error::PhaseMismatch {
            expected: want.label(),
            actual: format!(
                "{} (γ_L={}, γ_G={}, g={})",
                class.pt_phase.label(),
                params.gamma_l(),
                params.gamma_g(),
                params.g()
            ),
        });
    }
    Ok(params.mean_rate())
}

/// Unbroken phase: `I → ln(g²/(g² − γ²))`, `D ≈ γ/(2g²t)` in both directions.
pub fn asymptotic_up(params: &SystemParams, t: f64) -> Result<AsymptoticValues> {
    let gamma = require_phase(params, PtPhase::Unbroken, t)?;
    let g2 = params.g().powi(2);
    let decay = vec![gamma / (2.0 * g2), -1.0];
    Ok(AsymptoticValues::from_predictions(
        t,
        vec![
            AsymptoticPrediction {
                quantity: Quantity::I,
                form: Form::Constant,
                coefficients: vec![(g2 / (g2 - gamma * gamma)).ln()],
            },
            AsymptoticPrediction {
                quantity: Quantity::DLG,
                form: Form::PowerLawDecay,
                coefficients: decay.clone(),
            },
            AsymptoticPrediction {
                quantity: Quantity::DGL,
                form: Form::PowerLawDecay,
                coefficients: decay,
            },
        ],
    ))
}

/// Broken phase: stationary discords (see [`stationary_discord`]) and
/// `I ≈ 2Ωt`, `Ω = sqrt(γ² − g²)`.
pub fn asymptotic_bp(params: &SystemParams, t: f64) -> Result<AsymptoticValues> {
    let gamma = require_phase(params, PtPhase::Broken, t)?;
    let omega = (gamma * gamma - params.g().powi(2)).sqrt();
    let (d_lg, d_gl) = stationary_discord(params)?;
    Ok(AsymptoticValues::from_predictions(
        t,
        vec![
            AsymptoticPrediction {
                quantity: Quantity::I,
                form: Form::LinearGrowth,
                coefficients: vec![2.0 * omega, 0.0],
            },
            AsymptoticPrediction {
                quantity: Quantity::DLG,
                form: Form::Constant,
                coefficients: vec![d_lg],
            },
            AsymptoticPrediction {
                quantity: Quantity::DGL,
                form: Form::Constant,
                coefficients: vec![d_gl],
            },
        ],
    ))
}

/// Exceptional point: `I ≈ ln(4g²t²/3)`, `D ≈ 1/(gt)`.
pub fn asymptotic_ep(params: &SystemParams, t: f64) -> Result<AsymptoticValues> {
    require_phase(params, PtPhase::Exceptional, t)?;
    let g = params.g();
    let decay = vec![1.0 / g, -1.0];
    Ok(AsymptoticValues::from_predictions(
        t,
        vec![
            AsymptoticPrediction {
                quantity: Quantity::I,
                form: Form::LogGrowth,
                coefficients: vec![2.0, (4.0 * g * g / 3.0).ln()],
            },
            AsymptoticPrediction {
                quantity: Quantity::DLG,
                form: Form::PowerLawDecay,
                coefficients: decay.clone(),
            },
            AsymptoticPrediction {
                quantity: Quantity::DGL,
                form: Form::PowerLawDecay,
                coefficients: decay,
            },
        ],
    ))
}

/// Long-time discords on the balanced line:
/// `D_LG = ln((γ(γ+Ω) + g²)/(2γ²))`, `D_GL = ln((γ(3γ+Ω) − g²)/(2γ²))` for
/// `γ > g`, and zero for `γ ≤ g`.
pub fn stationary_discord(params: &SystemParams) -> Result<(f64, f64)> {
    let class = classify(params, BOUNDARY_TOL);
    if !class.on_pt_line {
        return Err(Error::PhaseMismatch {
            expected: "balanced gain and loss",
            actual: format!("γ_L={}, γ_G={}", params.gamma_l(), params.gamma_g()),
        });
    }
    let gamma = params.mean_rate();
    let g2 = params.g().powi(2);
    if gamma <= params.g() {
        return Ok((0.0, 0.0));
    }
    let omega = (gamma * gamma - g2).sqrt();
    let two_g2 = 2.0 * gamma * gamma;
    Ok((
        ((gamma * (gamma + omega) + g2) / two_g2).ln(),
        ((gamma * (3.0 * gamma + omega) - g2) / two_g2).ln(),
    ))
}

/// Least-squares line `y = slope·x + intercept`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::DegenerateWindow {
            points: n.min(y.len()),
        });
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateWindow { points: n });
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// `y ≈ A x^p` by regression of `ln y` on `ln x`; returns `(p, A)`.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (p, c) = linear_regression(&lx, &ly)?;
    Ok((p, c.exp()))
}

/// Relative spread below which a series counts as constant.
pub const CONSTANT_SPREAD: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub form: Form,
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual in `y`.
    pub rms: f64,
    /// Every candidate that could be fitted, with its residual.
    pub candidates: Vec<(Form, Vec<f64>, f64)>,
}

impl ScalingFit {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.form.evaluate(&self.coefficients, t)
    }
}

fn rms_residual(form: Form, coefficients: &[f64], t: &[f64], y: &[f64]) -> f64 {
    let ss: f64 = t
        .iter()
        .zip(y)
        .map(|(&a, &b)| (form.evaluate(coefficients, a) - b).powi(2))
        .sum();
    (ss / t.len() as f64).sqrt()
}

/// Fits constant, power-law, linear and logarithmic forms to the samples
/// with `t ∈ [window.0, window.1]` and returns the best. A series whose
/// relative spread is below [`CONSTANT_SPREAD`] is reported as constant;
/// otherwise the smallest RMS residual in `y` wins.
pub fn fit_series(times: &[f64], values: &[f64], window: (f64, f64)) -> Result<ScalingFit> {
    let (t, y): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window.0 && **t <= window.1)
        .map(|(a, b)| (*a, *b))
        .unzip();
    if t.len() < 4 {
        return Err(Error::DegenerateWindow { points: t.len() });
    }
    if !(window.0 > 0.0) {
        return Err(Error::InvalidInput("fit window must start at t > 0".into()));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });

    let mut candidates = Vec::new();
    let constant = vec![mean];
    candidates.push((
        Form::Constant,
        constant.clone(),
        rms_residual(Form::Constant, &constant, &t, &y),
    ));
    if let Ok((p, a)) = power_law_fit(&t, &y) {
        let c = vec![a, p];
        candidates.push((
            Form::PowerLawDecay,
            c.clone(),
            rms_residual(Form::PowerLawDecay, &c, &t, &y),
        ));
    }
    let (slope, icpt) = linear_regression(&t, &y)?;
    let c = vec![slope, icpt];
    candidates.push((
        Form::LinearGrowth,
        c.clone(),
        rms_residual(Form::LinearGrowth, &c, &t, &y),
    ));
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let (a, b) = linear_regression(&lt, &y)?;
    let c = vec![a, b];
    candidates.push((
        Form::LogGrowth,
        c.clone(),
        rms_residual(Form::LogGrowth, &c, &t, &y),
    ));

    let best = if hi - lo <= CONSTANT_SPREAD * mean.abs() {
        candidates[0].clone()
    } else {
        candidates[1..]
            .iter()
            .min_by(|a, b| a.2.total_cmp(&b.2))
            .cloned()
            .expect("at least the linear candidate")
    };
    Ok(ScalingFit {
        form: best.0,
        coefficients: best.1,
        rms: best.2,
        candidates,
    })
}

pub fn correlation_records(traj: &Trajectory, kind: EntropyKind) -> Result<Vec<CorrelationRecord>> {
    traj.iter()
        .map(|(t, s)| correlation_record(t, &s.cov, kind))
        .collect()
}

/// [`fit_series`] applied to one correlation quantity of a trajectory.
pub fn fit_longtime_scaling(
    traj: &Trajectory,
    quantity: Quantity,
    window: (f64, f64),
    kind: EntropyKind,
) -> Result<ScalingFit> {
    let records = correlation_records(traj, kind)?;
    let values: Vec<f64> = records.iter().map(|r| quantity.of(r)).collect();
    fit_series(&traj.times, &values, window)
}

/// Mean of the piecewise-linear interpolant over `[t0, t1]`.
pub fn window_average(times: &[f64], values: &[f64], t0: f64, t1: f64) -> Result<f64> {
    if !(t1 > t0) || times.len() != values.len() || times.len() < 2 {
        return Err(Error::InvalidInput("bad averaging window".into()));
    }
    if t0 < times[0] || t1 > times[times.len() - 1] {
        return Err(Error::InvalidInput(format!(
            "window [{t0}, {t1}] outside the sampled range"
        )));
    }
    let interp = |k: usize, t: f64| {
        let w = (t - times[k]) / (times[k + 1] - times[k]);
        values[k] + w * (values[k + 1] - values[k])
    };
    let mut integral = 0.0;
    for k in 0..times.len() - 1 {
        let a = times[k].max(t0);
        let b = times[k + 1].min(t1);
        if b > a {
            integral += 0.5 * (interp(k, a) + interp(k, b)) * (b - a);
        }
    }
    Ok(integral / (t1 - t0))
}

/// Average over the largest whole number of `period`s that fits in
/// `[t0, t1]`, aligned to `t1`.
pub fn period_average(times: &[f64], values: &[f64], t0: f64, t1: f64, period: f64) -> Result<f64> {
    let n = ((t1 - t0) / period).floor();
    if !(n >= 1.0) {
        return Err(Error::InvalidInput(format!(
            "window shorter than one period {period}"
        )));
    }
    window_average(times, values, t1 - n * period, t1)
}

/// Angular frequency of the strongest oscillation in a uniformly sampled
/// series: mean removed, Hann window, zero-padded FFT, parabolic
/// interpolation of the peak.
pub fn dominant_frequency(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 8 || values.len() != n {
        return Err(Error::DegenerateWindow { points: n });
    }
    let dt = (times[n - 1] - times[0]) / (n - 1) as f64;
    if times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0))
    {
        return Err(Error::InvalidInput(
            "dominant_frequency needs uniform sampling".into(),
        ));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); padded];
    for (k, v) in values.iter().enumerate() {
        let hann = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64).cos();
        buf[k] = Complex::new((v - mean) * hann, 0.0);
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf[..padded / 2].iter().map(|c| c.norm()).collect();
    let k = (1..mag.len() - 1)
        .max_by(|&a, &b| mag[a].total_cmp(&mag[b]))
        .ok_or(Error::DegenerateWindow { points: n })?;
    let (a, b, c) = (mag[k - 1], mag[k], mag[k + 1]);
    let denom = a - 2.0 * b + c;
    let shift = if denom != 0.0 {
        0.5 * (a - c) / denom
    } else {
        0.0
    };
    Ok(2.0 * std::f64::consts::PI * (k as f64 + shift) / (padded as f64 * dt))
}

/// Fitted entropy scalings on the balanced line together with the
/// combinations that carry the physics: `S − S_G`, `S − S_L` and
/// `S_L + S_G − S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyFitReport {
    pub phase: PtPhase,
    pub s: ScalingFit,
    pub s_l: ScalingFit,
    pub s_g: ScalingFit,
    pub s_minus_s_g: ScalingFit,
    pub s_minus_s_l: ScalingFit,
    pub local_sum_minus_s: ScalingFit,
}

pub fn balanced_line_entropy_fits(
    params: &SystemParams,
    traj: &Trajectory,
    window: (f64, f64),
    kind: EntropyKind,
) -> Result<EntropyFitReport> {
    let class = classify(params, BOUNDARY_TOL);
    if !class.on_pt_line {
        return Err(Error::PhaseMismatch {
            expected: "balanced gain and loss",
            actual: format!("γ_L={}, γ_G={}", params.gamma_l(), params.gamma_g()),
        });
    }
    let records = correlation_records(traj, kind)?;
    let series = |f: &dyn Fn(&CorrelationRecord) -> f64| -> Result<ScalingFit> {
        let v: Vec<f64> = records.iter().map(f).collect();
        fit_series(&traj.times, &v, window)
    };
    Ok(EntropyFitReport {
        phase: class.pt_phase,
        s: series(&|r| r.s)?,
        s_l: series(&|r| r.s_l)?,
        s_g: series(&|r| r.s_g)?,
        s_minus_s_g: series(&|r| r.s - r.s_g)?,
        s_minus_s_l: series(&|r| r.s - r.s_l)?,
        local_sum_minus_s: series(&|r| (r.s_l + r.s_g) - r.s)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn p(g: f64, gl: f64, gg: f64) -> SystemParams {
        SystemParams::new(g, gl, gg).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = classify(&p(1.0, 0.5, 0.5), BOUNDARY_TOL);
        assert!(c.on_pt_line);
        assert_eq!(c.pt_phase, PtPhase::Unbroken);
        assert_eq!(c.fixed_point, FixedPoint::Center);
        assert_eq!(c.lambda[0].re, 0.0);

        let c = classify(&p(1.0, 1.0, 1.0), BOUNDARY_TOL);
        assert_eq!(c.pt_phase, PtPhase::Exceptional);
        assert_eq!(c.fixed_point, FixedPoint::Degenerate);

        let c = classify(&p(1.0, 3.0, 1.0), BOUNDARY_TOL);
        assert!(!c.on_pt_line);
        assert_eq!(c.region, Region::V);
        assert_eq!(c.fixed_point, FixedPoint::Saddle);
        assert_relative_eq!(c.lambda[0].re, -1.0 + 3f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(c.lambda[1].re, -1.0 - 3f64.sqrt(), epsilon = 1e-15);

        assert_eq!(classify(&p(1.0, 1.5, 1.5), BOUNDARY_TOL).region, Region::V);
        assert_eq!(
            classify(&p(1.0, 0.0, 0.0), BOUNDARY_TOL).fixed_point,
            FixedPoint::Center
        );
        assert_eq!(classify(&p(1.0, 0.2, 1.0), BOUNDARY_TOL).region, Region::I);
        assert_eq!(classify(&p(1.0, 0.1, 2.5), BOUNDARY_TOL).region, Region::II);
        assert_eq!(
            classify(&p(1.0, 1.0, 0.2), BOUNDARY_TOL).region,
            Region::III
        );
        assert_eq!(classify(&p(1.0, 2.5, 0.1), BOUNDARY_TOL).region, Region::IV);
    }

    #[test]
    fn eigenvalues_match_generic_solver() {
        for (gl, gg) in [(0.3, 1.9), (2.0, 0.1), (1.5, 1.5), (0.4, 0.4), (3.0, 1.0)] {
            let params = p(1.0, gl, gg);
            let y = crate::model::build_drift(&params).0;
            let mut numeric: Vec<f64> = y.complex_eigenvalues().iter().map(|z| z.re).collect();
            numeric.sort_by(f64::total_cmp);
            let c = classify(&params, BOUNDARY_TOL);
            assert!(
                (numeric[3] - c.lambda[0].re).abs() < 1e-8,
                "{gl} {gg}: {numeric:?} vs {:?}",
                c.lambda
            );
            assert!(
                (numeric[0] - c.lambda[1].re).abs() < 1e-8,
                "{gl} {gg}: {numeric:?} vs {:?}",
                c.lambda
            );
        }
    }

    #[test]
    fn grid_agreement() {
        let n = 50;
        let mut compared = 0;
        for i in 1..=n {
            for j in 1..=n {
                let params = p(1.0, 3.0 * i as f64 / n as f64, 3.0 * j as f64 / n as f64);
                let a = classify(&params, BOUNDARY_TOL).region;
                let b = region_from_boundaries(&params, BOUNDARY_TOL);
                if a != Region::Boundary && b != Region::Boundary {
                    assert_eq!(a, b, "{params:?}");
                    compared += 1;
                }
            }
        }
        assert!(compared > 2400, "{compared}");
    }

    #[test]
    fn asymptotic_formula_examples() {
        let up = asymptotic_up(&SystemParams::pt_line(1.0, 0.5).unwrap(), 100.0).unwrap();
        assert_relative_eq!(up.mutual_information, (4.0f64 / 3.0).ln(), epsilon = 1e-15);
        assert_relative_eq!(up.discord_lg, 0.0025, epsilon = 1e-15);
        let tiny = asymptotic_up(&SystemParams::pt_line(1.0, 1e-8).unwrap(), 1.0).unwrap();
        assert!(tiny.mutual_information < 1e-15);

        let bp = asymptotic_bp(&SystemParams::pt_line(1.0, 1.5).unwrap(), 40.0).unwrap();
        assert!((bp.discord_lg - 0.0907).abs() < 1e-4);
        assert!((bp.discord_gl - 0.5010).abs() < 1e-4);
        assert_relative_eq!(
            bp.mutual_information,
            2.0 * 1.25f64.sqrt() * 40.0,
            epsilon = 1e-12
        );
        let (_, d_gl) = stationary_discord(&SystemParams::pt_line(1.0, 1e6).unwrap()).unwrap();
        assert!((d_gl - 2f64.ln()).abs() < 1e-6);

        let ep = asymptotic_ep(&SystemParams::pt_line(1.0, 1.0).unwrap(), 10.0).unwrap();
        assert_relative_eq!(
            ep.mutual_information,
            (400.0f64 / 3.0).ln(),
            epsilon = 1e-13
        );
        let ep = asymptotic_ep(&SystemParams::pt_line(1.0, 1.0).unwrap(), 100.0).unwrap();
        assert_relative_eq!(ep.discord_lg, 0.01, epsilon = 1e-15);
        let up = asymptotic_up(&SystemParams::pt_line(1.0, 0.5).unwrap(), 100.0).unwrap();
        assert_relative_eq!(ep.discord_lg / up.discord_lg, 2.0 / 0.5, epsilon = 1e-12);
    }

    #[test]
    fn phase_mismatch() {
        let bp = SystemParams::pt_line(1.0, 1.5).unwrap();
        assert!(matches!(
            asymptotic_up(&bp, 1.0),
            Err(Error::PhaseMismatch { .. })
        ));
        assert!(matches!(
            asymptotic_ep(&bp, 1.0),
            Err(Error::PhaseMismatch { .. })
        ));
        let up = SystemParams::pt_line(1.0, 0.5).unwrap();
        assert!(matches!(
            asymptotic_bp(&up, 1.0),
            Err(Error::PhaseMismatch { .. })
        ));
        assert!(stationary_discord(&p(1.0, 1.0, 2.0)).is_err());
        assert_eq!(stationary_discord(&up).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn critical_onset_is_square_root() {
        let eps: Vec<f64> = (0..20).map(|k| 1e-4 * 1.5f64.powi(k)).collect();
        let d: Vec<f64> = eps
            .iter()
            .map(|e| {
                stationary_discord(&SystemParams::pt_line(1.0, 1.0 + e).unwrap())
                    .unwrap()
                    .1
            })
            .collect();
        let (exp, _) = power_law_fit(&eps, &d).unwrap();
        assert!((exp - 0.5).abs() < 0.02, "{exp}");
    }

    #[test]
    fn fit_selects_generating_form() {
        let t: Vec<f64> = (0..100).map(|k| 10.0 + k as f64).collect();
        let check = |y: Vec<f64>, form: Form| {
            let fit = fit_series(&t, &y, (10.0, 200.0)).unwrap();
            assert_eq!(fit.form, form, "{fit:?}");
            fit
        };
        let fit = check(t.iter().map(|v| 0.3 / v).collect(), Form::PowerLawDecay);
        assert_relative_eq!(fit.coefficients[1], -1.0, epsilon = 1e-12);
        let fit = check(
            t.iter().map(|v| 2.2 * v + 1.0).collect(),
            Form::LinearGrowth,
        );
        assert_relative_eq!(fit.coefficients[0], 2.2, epsilon = 1e-12);
        check(
            t.iter().map(|v| 2.0 * v.ln() - 0.3).collect(),
            Form::LogGrowth,
        );
        check(
            t.iter().map(|v| 0.5 + 1e-4 * (-v).exp()).collect(),
            Form::Constant,
        );
        assert!(matches!(
            fit_series(&t, &t, (10.0, 12.0)),
            Err(Error::DegenerateWindow { points: 3 })
        ));
    }

    #[test]
    fn averages_and_frequency() {
        let t: Vec<f64> = (0..=4000).map(|k| k as f64 * 0.05).collect();
        let w = 3f64.sqrt();
        let y: Vec<f64> = t.iter().map(|v| 0.3 + 0.1 * (w * v).cos()).collect();
        let period = 2.0 * std::f64::consts::PI / w;
        let avg = period_average(&t, &y, 80.0, 100.0, period).unwrap();
        assert!((avg - 0.3).abs() < 1e-5);
        assert_relative_eq!(
            window_average(&t, &t, 10.0, 20.0).unwrap(),
            15.0,
            epsilon = 1e-12
        );
        let f = dominant_frequency(&t, &y).unwrap();
        assert!((f - w).abs() < 1e-3 * w, "{f}");
    }
}
