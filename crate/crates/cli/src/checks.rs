//! Acceptance checks. Each numbered criterion yields one or more [`Check`]s
//! with its tolerance pinned here; a criterion that errors is reported as a
//! failed check and does not stop the others.

use std::f64::consts::{LN_2, PI};

use ptg_core::correlations::{
    central_identity_rhs, correlation_record, discord_heterodyne, discord_minimized,
    ppt_min_eigenvalue, CorrelationRecord, Direction, EntropyKind, MinimizerGrid,
};
use ptg_core::dynamics::{propagate_exact, propagate_rk4, sample_trajectory, TrajectoryConfig};
use ptg_core::fock_oracle::{
    extract_moments, integrate_samples, renyi2_entropies, FockConfig, DEFAULT_STEP,
};
use ptg_core::gaussian_state::{CovarianceMatrix, GaussianState, Mode};
use ptg_core::model::SystemParams;
use ptg_core::pt_analysis::{
    balanced_line_entropy_fits, classify, dominant_frequency, fit_series, linear_regression,
    period_average, power_law_fit, region_from_boundaries, stationary_discord, EntropyFitReport,
    Form, BOUNDARY_TOL,
};
use ptg_core::{correlations, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::linspace;

pub const ALL_CRITERIA: [u8; 13] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13];

/// Leak tolerance for the Fock comparison. At cutoff 12 the top level holds
/// about 5e-5 of the population by t = 2, so the oracle's 1e-6 default
/// would abort the run at t ≈ 0.7.
pub const FOCK_LEAK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `|measured − expected| ≤ tolerance`
    Within,
    /// `measured ≤ expected + tolerance`
    AtMost,
    /// `measured ≥ expected − tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub criterion: u8,
    pub check_name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Check {
    pub fn new(
        criterion: u8,
        name: &str,
        measured: f64,
        expected: f64,
        tolerance: f64,
        comparison: Comparison,
    ) -> Self {
        let pass = match comparison {
            Comparison::Within => (measured - expected).abs() <= tolerance,
            Comparison::AtMost => measured <= expected + tolerance,
            Comparison::AtLeast => measured >= expected - tolerance,
        };
        Self {
            criterion,
            check_name: name.to_owned(),
            measured,
            expected,
            tolerance,
            comparison,
            pass,
            error: None,
        }
    }

    fn within(criterion: u8, name: &str, measured: f64, expected: f64, tolerance: f64) -> Self {
        Self::new(
            criterion,
            name,
            measured,
            expected,
            tolerance,
            Comparison::Within,
        )
    }

    fn at_most(criterion: u8, name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(
            criterion,
            name,
            measured,
            bound,
            tolerance,
            Comparison::AtMost,
        )
    }

    fn at_least(criterion: u8, name: &str, measured: f64, bound: f64, tolerance: f64) -> Self {
        Self::new(
            criterion,
            name,
            measured,
            bound,
            tolerance,
            Comparison::AtLeast,
        )
    }

    fn errored(criterion: u8, err: &ptg_core::Error) -> Self {
        Self {
            criterion,
            check_name: format!("c{criterion:02}_error"),
            measured: f64::NAN,
            expected: f64::NAN,
            tolerance: f64::NAN,
            comparison: Comparison::Within,
            pass: false,
            error: Some(err.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub all_pass: bool,
}

impl Summary {
    pub fn of(checks: &[Check]) -> Self {
        let passed = checks.iter().filter(|c| c.pass).count();
        Self {
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
            all_pass: passed == checks.len(),
        }
    }
}

/// Fitted entropy growth laws on the balanced line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyScalings {
    pub phase: String,
    pub gamma_over_g: f64,
    pub window: (f64, f64),
    pub fits: EntropyFitReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub scalings: Vec<EntropyScalings>,
    pub summary: Summary,
}

/// Runs the selected criteria in parallel; checks come back in criterion
/// order.
pub fn run_criteria(criteria: &[u8]) -> Vec<Check> {
    criteria
        .par_iter()
        .map(|&c| criterion(c).unwrap_or_else(|e| vec![Check::errored(c, &e)]))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

pub fn criterion(c: u8) -> Result<Vec<Check>> {
    match c {
        1 => up_mutual_information(),
        2 => up_discord_decay(),
        3 => bp_stationary_discord(),
        4 => bp_information_slope(),
        5 => ep_scalings(),
        6 => central_identity(),
        7 => heterodyne_optimality(),
        8 => zero_entanglement(),
        9 => ep_critical_exponent(),
        10 => phase_diagram(),
        11 => dual_integrators(),
        12 => fock_oracle(),
        13 => threshold_consistency(),
        _ => Err(ptg_core::Error::InvalidInput(format!("no criterion {c}"))),
    }
}

pub fn report(criteria: &[u8], with_scalings: bool) -> Report {
    let checks = run_criteria(criteria);
    let scalings = if with_scalings {
        entropy_scalings().unwrap_or_else(|e| {
            log::warn!("entropy scaling fits failed: {e}");
            Vec::new()
        })
    } else {
        Vec::new()
    };
    let summary = Summary::of(&checks);
    Report {
        checks,
        scalings,
        summary,
    }
}

const KIND: EntropyKind = EntropyKind::Renyi2;

fn pt(gamma: f64) -> Result<SystemParams> {
    SystemParams::pt_line(1.0, gamma)
}

fn records(params: &SystemParams, times: &[f64]) -> Result<Vec<CorrelationRecord>> {
    times
        .iter()
        .map(|&t| {
            correlation_record(
                t,
                &propagate_exact(params, &CovarianceMatrix::identity(), t)?,
                KIND,
            )
        })
        .collect()
}

fn column(recs: &[CorrelationRecord], f: impl Fn(&CorrelationRecord) -> f64) -> Vec<f64> {
    recs.iter().map(f).collect()
}

fn up_mutual_information() -> Result<Vec<Check>> {
    let gamma = 0.5;
    let times = linspace(0.0, 100.0, 4001);
    let recs = records(&pt(gamma)?, &times)?;
    let i = column(&recs, |r| r.i);

    // frequency from the part past the initial transient
    let start = times.iter().position(|&t| t >= 20.0).unwrap_or(0);
    let omega = dominant_frequency(&times[start..], &i[start..])?;
    let expected_omega = 2.0 * (1.0 - gamma * gamma).sqrt();
    let avg = period_average(&times, &i, 80.0, 100.0, 2.0 * PI / omega)?;
    let limit = (4.0f64 / 3.0).ln();
    Ok(vec![
        Check::within(
            1,
            "c01_up_mutual_information_period_average",
            avg,
            limit,
            0.02 * limit,
        ),
        Check::within(
            1,
            "c01_up_mutual_information_frequency",
            omega,
            expected_omega,
            0.05 * expected_omega,
        ),
    ])
}

fn up_discord_decay() -> Result<Vec<Check>> {
    let gamma = 0.5;
    let times = linspace(50.0, 500.0, 451);
    let recs = records(&pt(gamma)?, &times)?;
    let d = column(&recs, |r| r.d_lg);
    let (slope, _) = power_law_fit(&times, &d)?;
    let prefactor = 500.0 * d[d.len() - 1];
    let expected = gamma / 2.0;
    Ok(vec![
        Check::within(2, "c02_up_discord_loglog_slope", slope, -1.0, 0.05),
        Check::within(
            2,
            "c02_up_discord_prefactor_t500",
            prefactor,
            expected,
            0.05 * expected,
        ),
    ])
}

fn bp_stationary_discord() -> Result<Vec<Check>> {
    let rec = records(&pt(1.5)?, &[40.0])?[0];
    Ok(vec![
        Check::within(3, "c03_bp_discord_lg_t40", rec.d_lg, 0.0907, 1e-3),
        Check::within(3, "c03_bp_discord_gl_t40", rec.d_gl, 0.5010, 1e-3),
    ])
}

fn bp_information_slope() -> Result<Vec<Check>> {
    let gamma: f64 = 1.5;
    let times = linspace(20.0, 40.0, 401);
    let recs = records(&pt(gamma)?, &times)?;
    let (slope, _) = linear_regression(&times, &column(&recs, |r| r.i))?;
    let expected = 2.0 * (gamma * gamma - 1.0).sqrt();
    Ok(vec![Check::within(
        4,
        "c04_bp_mutual_information_slope",
        slope,
        expected,
        0.01 * expected,
    )])
}

/// The sample furthest from `target`.
fn worst(values: impl Iterator<Item = f64>, target: f64) -> f64 {
    values.fold(target, |w, v| {
        if (v - target).abs() > (w - target).abs() || v.is_nan() {
            v
        } else {
            w
        }
    })
}

fn ep_scalings() -> Result<Vec<Check>> {
    let p = pt(1.0)?;
    let times = linspace(200.0, 1000.0, 81);
    let recs = records(&p, &times)?;
    let lg = worst(recs.iter().map(|r| r.t * r.d_lg), 1.0);
    let gl = worst(recs.iter().map(|r| r.t * r.d_gl), 1.0);
    let t = 500.0;
    let i = records(&p, &[t])?[0].i;
    Ok(vec![
        Check::within(5, "c05_ep_gt_discord_lg_worst", lg, 1.0, 0.05),
        Check::within(5, "c05_ep_gt_discord_gl_worst", gl, 1.0, 0.05),
        Check::within(
            5,
            "c05_ep_mutual_information_t500",
            i,
            (4.0 * t * t / 3.0).ln(),
            0.05,
        ),
    ])
}

type Sampled = (SystemParams, Vec<(f64, CovarianceMatrix)>);

/// Trajectories from the vacuum: UP, EP, BP on the balanced line and one
/// point in each of the regions I–V, 26 samples each including `t = 0`.
fn sampled_states() -> Result<Vec<Sampled>> {
    let points = [
        (0.5, 0.5, 100.0),
        (1.0, 1.0, 200.0),
        (1.5, 1.5, 40.0),
        (0.2, 1.0, 40.0),
        (0.1, 2.5, 40.0),
        (0.8, 0.4, 40.0),
        (2.5, 0.1, 40.0),
        (2.0, 1.0, 40.0),
    ];
    points
        .iter()
        .map(|&(gl, gg, t_final)| {
            let p = SystemParams::new(1.0, gl, gg)?;
            let states = linspace(0.0, t_final, 26)
                .into_iter()
                .map(|t| Ok((t, propagate_exact(&p, &CovarianceMatrix::identity(), t)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok((p, states))
        })
        .collect()
}

fn nonzero_time_states(set: &[Sampled]) -> impl Iterator<Item = &CovarianceMatrix> {
    set.iter()
        .flat_map(|(_, s)| s.iter().filter(|(t, _)| *t > 0.0).map(|(_, c)| c))
}

const DIRECTIONS: [Direction; 2] = [Direction::LG, Direction::GL];

fn central_identity() -> Result<Vec<Check>> {
    let set = sampled_states()?;
    let mut worst_residual: f64 = 0.0;
    let mut n = 0;
    for cov in nonzero_time_states(&set) {
        n += 1;
        for dir in DIRECTIONS {
            let d = discord_heterodyne(cov, dir, KIND)?;
            let rhs = central_identity_rhs(cov, dir)?;
            worst_residual = worst_residual.max((d - rhs).abs() / d.max(1.0));
        }
    }
    Ok(vec![
        Check::within(6, "c06_identity_state_count", n as f64, 200.0, 0.0),
        Check::at_most(
            6,
            "c06_identity_max_scaled_residual",
            worst_residual,
            0.0,
            1e-10,
        ),
    ])
}

fn heterodyne_optimality() -> Result<Vec<Check>> {
    let set = sampled_states()?;
    let grid = MinimizerGrid::default();
    let states: Vec<&CovarianceMatrix> = nonzero_time_states(&set).collect();
    let per_state = states
        .par_iter()
        .map(|cov| {
            let mut r: f64 = 0.0;
            let mut gap: f64 = 0.0;
            for dir in DIRECTIONS {
                let (v, m) = discord_minimized(cov, dir, KIND, &grid)?;
                let het = discord_heterodyne(cov, dir, KIND)?;
                r = r.max(m.r);
                gap = gap.max((het - v).abs());
            }
            Ok((r, gap))
        })
        .collect::<Result<Vec<_>>>()?;
    let r = per_state.iter().map(|x| x.0).fold(0.0, f64::max);
    let gap = per_state.iter().map(|x| x.1).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most(7, "c07_minimizer_max_squeezing_r", r, 0.0, 1e-3),
        Check::at_most(7, "c07_minimized_vs_heterodyne_max_gap", gap, 0.0, 1e-9),
    ])
}

fn zero_entanglement() -> Result<Vec<Check>> {
    let set = sampled_states()?;
    let mut min_nu = f64::INFINITY;
    for (_, states) in &set {
        for (_, cov) in states {
            min_nu = min_nu.min(ppt_min_eigenvalue(cov)?);
        }
    }
    Ok(vec![Check::at_least(
        8,
        "c08_min_partial_transpose_eigenvalue",
        min_nu,
        1.0,
        1e-9,
    )])
}

/// Long-time discord of the balanced line, evaluated at `max(60, 40/Ω)`.
fn long_time_discord(gamma: f64, dir: Direction) -> Result<f64> {
    let omega = (gamma * gamma - 1.0).max(0.0).sqrt();
    let t = if omega > 0.0 {
        (40.0 / omega).max(60.0)
    } else {
        60.0
    };
    discord_heterodyne(
        &propagate_exact(&pt(gamma)?, &CovarianceMatrix::identity(), t)?,
        dir,
        KIND,
    )
}

fn ep_critical_exponent() -> Result<Vec<Check>> {
    let n = 12;
    let (lo, hi) = (1e-3f64.ln(), 5e-2f64.ln());
    let xs: Vec<f64> = linspace(lo, hi, n).into_iter().map(f64::exp).collect();
    let d = xs
        .iter()
        .map(|x| long_time_discord(1.0 + x, Direction::GL))
        .collect::<Result<Vec<_>>>()?;
    let (p, _) = power_law_fit(&xs, &d)?;
    Ok(vec![Check::within(
        9,
        "c09_ep_discord_gl_exponent",
        p,
        0.5,
        0.05,
    )])
}

fn phase_diagram() -> Result<Vec<Check>> {
    let axis: Vec<f64> = (1..=50).map(|k| 3.0 * k as f64 / 50.0).collect();
    let band = 1e-6;
    let (mut agree, mut total) = (0usize, 0usize);
    for &gl in &axis {
        for &gg in &axis {
            if (gl - gg).abs() <= band
                || (gl + gg - 2.0).abs() <= band
                || (gl * gg - 1.0).abs() <= band
            {
                continue;
            }
            let p = SystemParams::new(1.0, gl, gg)?;
            total += 1;
            if classify(&p, BOUNDARY_TOL).region == region_from_boundaries(&p, BOUNDARY_TOL) {
                agree += 1;
            }
        }
    }
    let mut checks = vec![Check::at_least(
        10,
        "c10_grid_classification_agreement",
        agree as f64 / total.max(1) as f64,
        1.0,
        0.0,
    )];

    // region V: saddle
    let p = SystemParams::new(1.0, 2.0, 1.0)?;
    let times = linspace(0.0, 60.0, 121);
    let recs = records(&p, &times)?;
    let fit = fit_series(&times, &column(&recs, |r| r.i), (30.0, 60.0))?;
    checks.push(Check::at_least(
        10,
        "c10_region_v_information_form_is_linear",
        if fit.form == Form::LinearGrowth {
            1.0
        } else {
            0.0
        },
        1.0,
        0.0,
    ));
    let at = |t: f64| recs.iter().find(|r| r.t == t).copied();
    let (r50, r60) = (at(50.0), at(60.0));
    let drift = match (r50, r60) {
        (Some(a), Some(b)) => {
            ((b.d_lg - a.d_lg).abs() / b.d_lg).max((b.d_gl - a.d_gl).abs() / b.d_gl)
        }
        _ => f64::NAN,
    };
    checks.push(Check::at_most(
        10,
        "c10_region_v_discord_relative_drift_50_60",
        drift,
        0.0,
        1e-6,
    ));
    checks.push(Check::at_least(
        10,
        "c10_region_v_discord_nonzero",
        r60.map_or(f64::NAN, |r| r.d_lg.min(r.d_gl)),
        1e-3,
        0.0,
    ));

    for (name, gl, gg) in [
        ("c10_region_i_discord_t60", 0.2, 1.0),
        ("c10_region_ii_discord_t60", 0.1, 2.5),
    ] {
        let r = records(&SystemParams::new(1.0, gl, gg)?, &[60.0])?[0];
        checks.push(Check::at_most(10, name, r.d_lg.max(r.d_gl), 0.0, 1e-3));
    }
    Ok(checks)
}

fn dual_integrators() -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points: Vec<SystemParams> = (0..10)
        .map(|_| {
            let g = rng.random_range(0.5..1.5);
            let gl = rng.random_range(0.0..2.0) * g;
            let gg = rng.random_range(0.0..2.0) * g;
            SystemParams::new(g, gl, gg)
        })
        .collect::<Result<_>>()?;
    // Dense RK4 states at the fast-growing points are too ill-conditioned
    // for the physicality check, so the integrators are compared entrywise
    // without going through `sample_trajectory`.
    let errors = points
        .par_iter()
        .map(|p| {
            let times = linspace(0.0, 20.0 / p.g(), 21);
            let step = 1e-3 / p.g();
            let mut rk4 = CovarianceMatrix::identity();
            let mut worst: f64 = 0.0;
            for w in times.windows(2) {
                rk4 = propagate_rk4(p, &rk4, w[1] - w[0], step)?;
                let exact = propagate_exact(p, &CovarianceMatrix::identity(), w[1])?.matrix();
                worst = worst.max((exact - rk4.matrix()).abs().max() / exact.abs().max());
            }
            Ok(worst)
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errors.iter().copied().fold(0.0, f64::max);
    Ok(vec![Check::at_most(
        11,
        "c11_exact_vs_rk4_max_relative_error",
        worst,
        0.0,
        1e-6,
    )])
}

fn fock_oracle() -> Result<Vec<Check>> {
    let p = SystemParams::new(1.0, 0.5, 0.3)?;
    let cfg = FockConfig::vacuum(12, FOCK_LEAK_TOL);
    let times = linspace(0.0, 2.0, 9);
    let states = integrate_samples(&p, &cfg, &times, DEFAULT_STEP)?;
    let (mut cov_err, mut ent_err, mut leak): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for (&t, rho) in times.iter().zip(&states) {
        let gauss = propagate_exact(&p, &CovarianceMatrix::identity(), t)?;
        let fock = extract_moments(rho)?.cov;
        cov_err = cov_err.max((fock.matrix() - gauss.matrix()).abs().max());
        let (s, s_l, s_g) = renyi2_entropies(rho);
        let expected = [
            correlations::entropy(&gauss, KIND)?,
            correlations::local_entropy(&gauss, Mode::L, KIND)?,
            correlations::local_entropy(&gauss, Mode::G, KIND)?,
        ];
        for (a, b) in [s, s_l, s_g].iter().zip(expected) {
            ent_err = ent_err.max((a - b).abs());
        }
        leak = leak.max(rho.top_level_population());
    }
    Ok(vec![
        Check::at_most(12, "c12_fock_covariance_max_abs_diff", cov_err, 0.0, 1e-3),
        Check::at_most(12, "c12_fock_renyi2_max_abs_diff", ent_err, 0.0, 1e-3),
        Check::at_most(
            12,
            "c12_fock_top_level_population",
            leak,
            0.0,
            FOCK_LEAK_TOL,
        ),
    ])
}

fn threshold_consistency() -> Result<Vec<Check>> {
    let gammas = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0, 5.0];
    let times = linspace(0.0, 60.0, 241);
    let maxima = gammas
        .par_iter()
        .map(|&g| {
            let recs = records(&pt(g)?, &times)?;
            Ok(recs.iter().map(|r| r.d_lg.max(r.d_gl)).fold(0.0, f64::max))
        })
        .collect::<Result<Vec<f64>>>()?;
    let max_d = maxima.iter().copied().fold(0.0, f64::max);
    let (_, formula) = stationary_discord(&pt(3.0)?)?;
    let measured = long_time_discord(3.0, Direction::GL)?;
    Ok(vec![
        Check::at_most(13, "c13_pt_line_max_discord", max_d, LN_2, 1e-9),
        Check::within(
            13,
            "c13_gamma3_discord_gl_vs_formula",
            measured,
            formula,
            1e-3,
        ),
        Check::at_most(13, "c13_gamma3_discord_gl_below_ln2", measured, LN_2, 0.0),
    ])
}

/// Entropy growth-law fits for UP, EP and BP.
pub fn entropy_scalings() -> Result<Vec<EntropyScalings>> {
    [
        (0.5, (50.0, 500.0)),
        (1.0, (100.0, 1000.0)),
        (1.5, (20.0, 40.0)),
    ]
    .iter()
    .map(|&(gamma, window)| {
        let p = pt(gamma)?;
        let traj = sample_trajectory(
            &p,
            &GaussianState::vacuum(),
            &TrajectoryConfig::new(window.1, 501),
        )?;
        let fits = balanced_line_entropy_fits(&p, &traj, window, KIND)?;
        Ok(EntropyScalings {
            phase: fits.phase.label().to_owned(),
            gamma_over_g: gamma,
            window,
            fits,
        })
    })
    .collect()
}
