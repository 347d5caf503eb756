//! Command-line flags, the JSON config file and their merge into a
//! [`RunConfig`]. Rates are given in units of `g` and times in units of
//! `1/g`; `--g` fixes the absolute scale.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use ptg_core::correlations::EntropyKind;
use ptg_core::dynamics::{Integrator, TrajectoryConfig, DEFAULT_RK4_STEP};
use ptg_core::fock_oracle::{FockConfig, DEFAULT_STEP};
use ptg_core::model::SystemParams;
use serde::{Deserialize, Serialize};

use crate::checks::ALL_CRITERIA;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Trajectory,
    SweepPtLine,
    PhaseDiagram,
    AsymptoticsCheck,
    OracleCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum EntropyArg {
    #[default]
    Renyi2,
    VonNeumann,
}

impl From<EntropyArg> for EntropyKind {
    fn from(e: EntropyArg) -> Self {
        match e {
            EntropyArg::Renyi2 => EntropyKind::Renyi2,
            EntropyArg::VonNeumann => EntropyKind::VonNeumann,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorArg {
    Exact,
    Rk4,
}

impl From<IntegratorArg> for Integrator {
    fn from(i: IntegratorArg) -> Self {
        match i {
            IntegratorArg::Exact => Integrator::Exact,
            IntegratorArg::Rk4 => Integrator::Rk4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ptg",
    version,
    about = "Correlation dynamics of a gain/loss two-mode bosonic system",
    allow_negative_numbers = true
)]
pub struct Cli {
    /// JSON config file; flags given on the command line take precedence.
    #[arg(long, global = true, display_order = 100)]
    pub config: Option<PathBuf>,
    /// Absolute coupling g (rates are read in units of g, times in units of 1/g).
    #[arg(long, global = true, display_order = 100)]
    pub g: Option<f64>,
    /// Entropy used for S, S_L, S_G, I and D (default: renyi2).
    #[arg(long, global = true, display_order = 100, value_enum)]
    pub entropy: Option<EntropyArg>,
    /// Output file (stdout when absent).
    #[arg(long, short, global = true, display_order = 100)]
    pub output: Option<PathBuf>,
    /// Output format (default: csv; json for asymptotics-check).
    #[arg(long, global = true, display_order = 100, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Correlation measures along one trajectory from the vacuum.
    Trajectory(TrajectoryArgs),
    /// Long-time discords along the balanced line, formula against measurement.
    SweepPtLine(SweepArgs),
    /// Regime classification and long-time correlations on a (gamma_L, gamma_G) grid.
    PhaseDiagram(GridArgs),
    /// Runs the acceptance checks and writes a JSON report.
    AsymptoticsCheck(CheckArgs),
    #[command(hide = true)]
    OracleCheck(OracleArgs),
}

#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct TrajectoryArgs {
    /// Balanced rate: sets gamma_L = gamma_G.
    #[arg(long, conflicts_with_all = ["gamma_l", "gamma_g"])]
    pub gamma: Option<f64>,
    /// Loss rate of mode L, in units of g.
    #[arg(long)]
    pub gamma_l: Option<f64>,
    /// Gain rate of mode G, in units of g.
    #[arg(long)]
    pub gamma_g: Option<f64>,
    /// Final time in units of 1/g [default: 50].
    #[arg(long)]
    pub t_final: Option<f64>,
    /// Number of uniformly spaced samples including t=0 [default: 501].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Covariance propagator [default: exact].
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorArg>,
    /// RK4 step in units of 1/g [default: 1e-3].
    #[arg(long)]
    pub rk4_step: Option<f64>,
}

#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct SweepArgs {
    /// Smallest gamma/g [default: 0.1].
    #[arg(long)]
    pub gamma_min: Option<f64>,
    /// Largest gamma/g [default: 3].
    #[arg(long)]
    pub gamma_max: Option<f64>,
    /// Number of sweep points [default: 30].
    #[arg(long)]
    pub n_gamma: Option<usize>,
    /// Time at which the measured discords are taken, in units of 1/g [default: 60].
    #[arg(long)]
    pub t_eval: Option<f64>,
}

#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct GridArgs {
    /// Grid range of gamma_L/g [default: 0.05..3].
    #[arg(long)]
    pub gamma_l_min: Option<f64>,
    #[arg(long)]
    pub gamma_l_max: Option<f64>,
    /// Grid range of gamma_G/g [default: 0.05..3].
    #[arg(long)]
    pub gamma_g_min: Option<f64>,
    #[arg(long)]
    pub gamma_g_max: Option<f64>,
    /// Points per axis [default: 50].
    #[arg(long)]
    pub n_grid: Option<usize>,
    /// Trajectory length in units of 1/g [default: 60].
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Samples per trajectory [default: 121].
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct CheckArgs {
    /// Criteria to run (default: all).
    #[arg(long = "criterion", value_delimiter = ',')]
    pub criteria: Vec<u8>,
}

#[derive(Debug, Default, Args)]
#[command(allow_negative_numbers = true)]
pub struct OracleArgs {
    #[arg(long)]
    pub gamma_l: Option<f64>,
    #[arg(long)]
    pub gamma_g: Option<f64>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long)]
    pub t_final: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub leak_tol: Option<f64>,
    #[arg(long)]
    pub fock_step: Option<f64>,
}

/// Every setting that can come from a file or a flag. Settings that do not
/// apply to the chosen command are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub command: Option<CommandKind>,
    pub g: Option<f64>,
    pub entropy: Option<EntropyArg>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub gamma: Option<f64>,
    pub gamma_l: Option<f64>,
    pub gamma_g: Option<f64>,
    pub t_final: Option<f64>,
    pub n_samples: Option<usize>,
    pub integrator: Option<IntegratorArg>,
    pub rk4_step: Option<f64>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub n_gamma: Option<usize>,
    pub t_eval: Option<f64>,
    pub gamma_l_min: Option<f64>,
    pub gamma_l_max: Option<f64>,
    pub gamma_g_min: Option<f64>,
    pub gamma_g_max: Option<f64>,
    pub n_grid: Option<usize>,
    pub horizon: Option<f64>,
    pub criteria: Option<Vec<u8>>,
    pub cutoff: Option<usize>,
    pub leak_tol: Option<f64>,
    pub fock_step: Option<f64>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($f:ident),* $(,)?) => {
        Settings { $($f: $top.$f.or($base.$f)),* }
    };
}

impl Settings {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `gamma` is shorthand for equal `gamma_l` and `gamma_g` within one layer.
    fn expand_gamma(mut self) -> Result<Self, CliError> {
        if let Some(gamma) = self.gamma.take() {
            if self.gamma_l.is_some() || self.gamma_g.is_some() {
                return Err(CliError::Config(
                    "`gamma` cannot be combined with `gamma_l`/`gamma_g`".into(),
                ));
            }
            self.gamma_l = Some(gamma);
            self.gamma_g = Some(gamma);
        }
        Ok(self)
    }

    /// Values in `self` win over values in `base`.
    pub fn over(self, base: Settings) -> Result<Settings, CliError> {
        let top = self.expand_gamma()?;
        let base = base.expand_gamma()?;
        Ok(overlay!(top, base;
            command, g, entropy, output, format, gamma, gamma_l, gamma_g, t_final, n_samples,
            integrator, rk4_step, gamma_min, gamma_max, n_gamma, t_eval, gamma_l_min, gamma_l_max,
            gamma_g_min, gamma_g_max, n_grid, horizon, criteria, cutoff, leak_tol, fock_step,
        ))
    }
}

impl Cli {
    pub fn kind(&self) -> CommandKind {
        match self.command {
            CommandArgs::Trajectory(_) => CommandKind::Trajectory,
            CommandArgs::SweepPtLine(_) => CommandKind::SweepPtLine,
            CommandArgs::PhaseDiagram(_) => CommandKind::PhaseDiagram,
            CommandArgs::AsymptoticsCheck(_) => CommandKind::AsymptoticsCheck,
            CommandArgs::OracleCheck(_) => CommandKind::OracleCheck,
        }
    }

    /// The flags as a settings layer.
    pub fn settings(&self) -> Settings {
        let mut s = Settings {
            command: Some(self.kind()),
            g: self.g,
            entropy: self.entropy,
            output: self.output.clone(),
            format: self.format,
            ..Settings::default()
        };
        match &self.command {
            CommandArgs::Trajectory(a) => {
                s.gamma = a.gamma;
                s.gamma_l = a.gamma_l;
                s.gamma_g = a.gamma_g;
                s.t_final = a.t_final;
                s.n_samples = a.samples;
                s.integrator = a.integrator;
                s.rk4_step = a.rk4_step;
            }
            CommandArgs::SweepPtLine(a) => {
                s.gamma_min = a.gamma_min;
                s.gamma_max = a.gamma_max;
                s.n_gamma = a.n_gamma;
                s.t_eval = a.t_eval;
            }
            CommandArgs::PhaseDiagram(a) => {
                s.gamma_l_min = a.gamma_l_min;
                s.gamma_l_max = a.gamma_l_max;
                s.gamma_g_min = a.gamma_g_min;
                s.gamma_g_max = a.gamma_g_max;
                s.n_grid = a.n_grid;
                s.horizon = a.horizon;
                s.n_samples = a.samples;
            }
            CommandArgs::AsymptoticsCheck(a) => {
                if !a.criteria.is_empty() {
                    s.criteria = Some(a.criteria.clone());
                }
            }
            CommandArgs::OracleCheck(a) => {
                s.gamma_l = a.gamma_l;
                s.gamma_g = a.gamma_g;
                s.cutoff = a.cutoff;
                s.t_final = a.t_final;
                s.n_samples = a.samples;
                s.leak_tol = a.leak_tol;
                s.fock_step = a.fock_step;
            }
        }
        s
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let flags = self.settings();
        let merged = match &self.config {
            Some(path) => {
                let file = Settings::from_file(path)?;
                if let Some(kind) = file.command {
                    if kind != self.kind() {
                        return Err(CliError::Config(format!(
                            "config file is for {kind:?}, command line asks for {:?}",
                            self.kind()
                        )));
                    }
                }
                flags.over(file)?
            }
            None => flags.over(Settings::default())?,
        };
        RunConfig::from_settings(self.kind(), &merged)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepJob {
    /// Balanced rates in absolute units.
    pub gammas: Vec<f64>,
    pub t_eval: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridJob {
    pub gamma_l: Vec<f64>,
    pub gamma_g: Vec<f64>,
    pub horizon: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleJob {
    pub params: SystemParams,
    pub fock: FockConfig,
    pub times: Vec<f64>,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Trajectory {
        params: SystemParams,
        trajectory: TrajectoryConfig,
    },
    SweepPtLine(SweepJob),
    PhaseDiagram(GridJob),
    AsymptoticsCheck {
        criteria: Vec<u8>,
    },
    OracleCheck(OracleJob),
}

/// A fully resolved run. All rates and times are absolute.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub job: Job,
    pub g: f64,
    pub entropy: EntropyKind,
    pub output: Option<PathBuf>,
    pub format: Format,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(bad(format!("{name} must be a positive number, got {v}")))
    }
}

fn nonnegative(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(bad(format!(
            "{name} must be a non-negative number, got {v}"
        )))
    }
}

/// `n` evenly spaced points on `[lo, hi]`, ends included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|k| {
                if k + 1 == n {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

fn range(name: &str, lo: f64, hi: f64) -> Result<(f64, f64), CliError> {
    let lo = nonnegative(&format!("{name}_min"), lo)?;
    let hi = nonnegative(&format!("{name}_max"), hi)?;
    if lo > hi {
        return Err(bad(format!("{name}_min = {lo} exceeds {name}_max = {hi}")));
    }
    Ok((lo, hi))
}

impl RunConfig {
    pub fn from_settings(kind: CommandKind, s: &Settings) -> Result<Self, CliError> {
        let g = positive("g", s.g.unwrap_or(1.0))?;
        let params = |gl: f64, gg: f64| -> Result<SystemParams, CliError> {
            let gl = nonnegative("gamma_l", gl)?;
            let gg = nonnegative("gamma_g", gg)?;
            SystemParams::new(g, gl * g, gg * g).map_err(|e| bad(e.to_string()))
        };
        let job = match kind {
            CommandKind::Trajectory => {
                let (gl, gg) = match (s.gamma_l, s.gamma_g) {
                    (Some(a), Some(b)) => (a, b),
                    _ => {
                        return Err(bad(
                            "trajectory needs `gamma` or both `gamma_l` and `gamma_g`",
                        ))
                    }
                };
                let t_final = positive("t_final", s.t_final.unwrap_or(50.0))?;
                let rk4_step = positive("rk4_step", s.rk4_step.unwrap_or(DEFAULT_RK4_STEP))?;
                let mut trajectory = TrajectoryConfig::new(t_final / g, s.n_samples.unwrap_or(501));
                trajectory.integrator = s.integrator.unwrap_or(IntegratorArg::Exact).into();
                trajectory.rk4_step = rk4_step / g;
                trajectory.validate().map_err(|e| bad(e.to_string()))?;
                Job::Trajectory {
                    params: params(gl, gg)?,
                    trajectory,
                }
            }
            CommandKind::SweepPtLine => {
                let lo = positive("gamma_min", s.gamma_min.unwrap_or(0.1))?;
                let hi = positive("gamma_max", s.gamma_max.unwrap_or(3.0))?;
                if lo > hi {
                    return Err(bad(format!("gamma_min = {lo} exceeds gamma_max = {hi}")));
                }
                let n = s.n_gamma.unwrap_or(30);
                if n == 0 {
                    return Err(bad("n_gamma must be ≥ 1"));
                }
                Job::SweepPtLine(SweepJob {
                    gammas: linspace(lo, hi, n).into_iter().map(|x| x * g).collect(),
                    t_eval: positive("t_eval", s.t_eval.unwrap_or(60.0))? / g,
                })
            }
            CommandKind::PhaseDiagram => {
                let (l0, l1) = range(
                    "gamma_l",
                    s.gamma_l_min.unwrap_or(0.05),
                    s.gamma_l_max.unwrap_or(3.0),
                )?;
                let (g0, g1) = range(
                    "gamma_g",
                    s.gamma_g_min.unwrap_or(0.05),
                    s.gamma_g_max.unwrap_or(3.0),
                )?;
                let n = s.n_grid.unwrap_or(50);
                if n == 0 {
                    return Err(bad("n_grid must be ≥ 1"));
                }
                let n_samples = s.n_samples.unwrap_or(121);
                if n_samples < 8 {
                    return Err(bad("phase-diagram needs at least 8 samples per trajectory"));
                }
                Job::PhaseDiagram(GridJob {
                    gamma_l: linspace(l0, l1, n).into_iter().map(|x| x * g).collect(),
                    gamma_g: linspace(g0, g1, n).into_iter().map(|x| x * g).collect(),
                    horizon: positive("horizon", s.horizon.unwrap_or(60.0))? / g,
                    n_samples,
                })
            }
            CommandKind::AsymptoticsCheck => {
                let criteria = s.criteria.clone().unwrap_or_else(|| ALL_CRITERIA.to_vec());
                if let Some(c) = criteria.iter().find(|c| !ALL_CRITERIA.contains(c)) {
                    return Err(bad(format!("unknown criterion {c}")));
                }
                Job::AsymptoticsCheck { criteria }
            }
            CommandKind::OracleCheck => {
                let t_final = positive("t_final", s.t_final.unwrap_or(2.0))?;
                let n = s.n_samples.unwrap_or(9);
                if n < 2 {
                    return Err(bad("oracle-check needs at least 2 samples"));
                }
                let fock = FockConfig::vacuum(s.cutoff.unwrap_or(12), s.leak_tol.unwrap_or(1e-4));
                fock.validate().map_err(|e| bad(e.to_string()))?;
                Job::OracleCheck(OracleJob {
                    params: params(s.gamma_l.unwrap_or(0.5), s.gamma_g.unwrap_or(0.3))?,
                    fock,
                    times: linspace(0.0, t_final / g, n),
                    step: positive("fock_step", s.fock_step.unwrap_or(DEFAULT_STEP))? / g,
                })
            }
        };
        Ok(RunConfig {
            job,
            g,
            entropy: s.entropy.unwrap_or_default().into(),
            output: s.output.clone(),
            format: s.format.unwrap_or(match kind {
                CommandKind::AsymptoticsCheck => Format::Json,
                _ => Format::Csv,
            }),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("ptg").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_file_values() {
        let file = Settings {
            gamma_l: Some(0.3),
            gamma_g: Some(0.3),
            t_final: Some(10.0),
            n_samples: Some(11),
            ..Settings::default()
        };
        let cli = parse(&["trajectory", "--gamma", "0.5"]);
        let merged = cli.settings().over(file).unwrap();
        let cfg = RunConfig::from_settings(CommandKind::Trajectory, &merged).unwrap();
        match cfg.job {
            Job::Trajectory { params, trajectory } => {
                assert_eq!(params.gamma_l(), 0.5);
                assert_eq!(params.gamma_g(), 0.5);
                assert_eq!(trajectory.t_final, 10.0);
                assert_eq!(trajectory.n_samples, 11);
            }
            other => panic!("unexpected job {other:?}"),
        }
    }

    #[test]
    fn g_scales_rates_and_times() {
        let cli = parse(&[
            "--g",
            "2",
            "trajectory",
            "--gamma-l",
            "0.5",
            "--gamma-g",
            "1.5",
            "--t-final",
            "10",
        ]);
        let cfg = cli.resolve().unwrap();
        match cfg.job {
            Job::Trajectory { params, trajectory } => {
                assert_eq!(
                    (params.g(), params.gamma_l(), params.gamma_g()),
                    (2.0, 1.0, 3.0)
                );
                assert_eq!(trajectory.t_final, 5.0);
            }
            other => panic!("unexpected job {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values() {
        for args in [
            &["--g", "0", "trajectory", "--gamma", "0.5"][..],
            &["trajectory"][..],
            &["trajectory", "--gamma", "-1"][..],
            &["sweep-pt-line", "--gamma-min", "0"][..],
            &["asymptotics-check", "--criterion", "14"][..],
        ] {
            let err = parse(args).resolve().unwrap_err();
            assert!(matches!(err, CliError::Config(_)), "{args:?}: {err}");
        }
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let err = serde_json::from_str::<Settings>(r#"{"gama": 0.5}"#).unwrap_err();
        assert!(err.to_string().contains("unknown field"));
    }

    #[test]
    fn gamma_conflicts_within_a_layer() {
        let s = Settings {
            gamma: Some(0.5),
            gamma_l: Some(0.2),
            ..Settings::default()
        };
        assert!(s.over(Settings::default()).is_err());
    }

    #[test]
    fn linspace_hits_both_ends() {
        let v = linspace(0.1, 3.0, 30);
        assert_eq!(v.len(), 30);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[29], 3.0);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
