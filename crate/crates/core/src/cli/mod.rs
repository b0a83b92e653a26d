//! Command-line front end: model registry, exponent pipeline and the
//! `solve`, `les`, `sweep` and `convergence` commands, all emitting CSV.

mod args;
mod commands;
mod config;
mod csv_out;

pub use args::{run, Cli, Command, CommonArgs, ConvergenceArgs, SweepArgs};
pub use commands::{cmd_convergence, cmd_les, cmd_solve, cmd_sweep, oracle_exponents, CommandOutput, SWEEP_EXPONENTS};
pub use config::{
    normalize_key, parse_config_text, read_config_file, InitKind, ModelKind, ModelParams, OracleKind, RunConfig,
    SweepRange, Vary, DEFAULT_GRID_STEP, DEFAULT_M, DEFAULT_ORACLE_M, DEFAULT_SOLVE_T, DEFAULT_T, DEFAULT_TRANSIENT,
};
pub use csv_out::format_number;

use std::f64::consts::PI;

use thiserror::Error;

use crate::discretize::{
    build_coupled_system, build_dde_system, build_re_system, DiscreteSystem, Discretization, DiscretizeError,
};
use crate::dqr::{dqr_lyapunov, DqrConfig, DqrError, LyapunovRun};
use crate::linalg::Matrix;
use crate::linearize::{linearize_along, reference_trajectory, LinearizeError, ReferenceOptions, REFERENCE_MARGIN};
use crate::models::{
    cannibalism_re, linear_dde, logistic_daphnia, quad_re, quad_re_periodic_solution, zero_re, ModelError, ReModel,
    QUAD_RE_HOPF_GAMMA,
};
use crate::odeint::{IntegrationError, Trajectory};
use crate::oracle::OracleError;

/// Errors split by exit status: configuration (1) and numerical (2).
#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<DiscretizeError> for CliError {
    fn from(e: DiscretizeError) -> Self {
        match e {
            DiscretizeError::DegreeTooSmall { .. } | DiscretizeError::Spectral(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DqrError> for CliError {
    fn from(e: DqrError) -> Self {
        match e {
            DqrError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<LinearizeError> for CliError {
    fn from(e: LinearizeError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidProblem(_) => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Argument(_) | OracleError::IncompatibleGrid { .. } => CliError::Config(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// A collocated model ready for integration.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub system: DiscreteSystem,
    /// The renewal equation, for models that are one.
    pub re_model: Option<ReModel>,
    /// Labelled equilibria as collocated states.
    pub equilibria: Vec<(String, Vec<f64>)>,
    pub initial: Vec<f64>,
    /// `A(t)` does not depend on the reference state.
    pub linear: bool,
}

impl PreparedModel {
    pub fn equilibrium(&self, label: &str) -> Result<&[f64], CliError> {
        self.equilibria.iter().find(|(l, _)| l == label).map(|(_, w)| w.as_slice()).ok_or_else(|| {
            let labels: Vec<&str> = self.equilibria.iter().map(|(l, _)| l.as_str()).collect();
            CliError::Config(format!("no equilibrium '{label}' (available: {})", labels.join(", ")))
        })
    }
}

/// Default constant initial value for renewal components.
pub const DEFAULT_INITIAL_VALUE: f64 = 0.2;

/// Builds the collocated system and initial state for `cfg`.
pub fn prepare(cfg: &RunConfig) -> Result<PreparedModel, CliError> {
    prepare_with_degree(cfg, cfg.mx, cfg.my)
}

/// As [`prepare`] with explicit collocation degrees.
pub fn prepare_with_degree(cfg: &RunConfig, mx: usize, my: usize) -> Result<PreparedModel, CliError> {
    let p = &cfg.params;
    let opts = Discretization::default();
    let (system, re_model, labelled, linear) = match p.kind {
        ModelKind::Quad | ModelKind::Cannibalism | ModelKind::Zero => {
            let model = match p.kind {
                ModelKind::Quad => quad_re(p.get("gamma"))?,
                ModelKind::Cannibalism => cannibalism_re(p.get("gamma"), p.get("a_mat"), p.get("a_max"))?,
                _ => zero_re(),
            };
            let sys = build_re_system(&model, mx, opts)?;
            let eq = model.equilibria.iter().map(|e| (e.label.clone(), e.values.clone())).collect::<Vec<_>>();
            (sys, Some(model), eq, false)
        }
        ModelKind::Daphnia => {
            let model = logistic_daphnia(p.get("beta"), p.get("r"), p.get("K"), p.get("gamma"), p.get("a_mat"), p.get("a_max"))?;
            let sys = build_coupled_system(&model, mx, my, opts)?;
            let eq = model.equilibria.iter().map(|e| (e.label.clone(), e.values.clone())).collect();
            (sys, None, eq, false)
        }
        ModelKind::LinearDde => {
            let model = linear_dde(p.get("a"), p.get("b"), p.get("tau"))?;
            let sys = build_dde_system(&model, my, opts)?;
            let eq = model.equilibria.iter().map(|e| (e.label.clone(), e.values.clone())).collect();
            (sys, None, eq, true)
        }
        ModelKind::Diag => {
            let sys = DiscreteSystem::linear("diag", Matrix::from_diag(&[p.get("lambda1"), p.get("lambda2")]))?;
            (sys, None, vec![("trivial".to_string(), vec![0.0])], true)
        }
    };
    let equilibria: Vec<(String, Vec<f64>)> =
        labelled.into_iter().map(|(label, values)| (label, system.equilibrium_state(&values))).collect();
    let mut prepared = PreparedModel { system, re_model, equilibria, initial: Vec::new(), linear };
    prepared.initial = initial_state(cfg, &prepared)?;
    Ok(prepared)
}

fn initial_state(cfg: &RunConfig, prepared: &PreparedModel) -> Result<Vec<f64>, CliError> {
    let sys = &prepared.system;
    match &cfg.init {
        InitKind::Default => {
            let y0 = match cfg.model() {
                ModelKind::Daphnia => {
                    let span = cfg.params.get("a_max") - cfg.params.get("a_mat");
                    1.1 / (cfg.params.get("beta") * span)
                }
                _ => DEFAULT_INITIAL_VALUE,
            };
            Ok(sys.initial_state(&|_| DEFAULT_INITIAL_VALUE, &|_| y0)?)
        }
        InitKind::Periodic => {
            let gamma = cfg.params.get("gamma");
            if cfg.model() != ModelKind::Quad || gamma <= QUAD_RE_HOPF_GAMMA {
                return Err(CliError::Config(format!(
                    "periodic initial data needs model quad with gamma > {QUAD_RE_HOPF_GAMMA}"
                )));
            }
            let phi = |t: f64| quad_re_periodic_solution(gamma, t).unwrap_or(f64::NAN);
            Ok(sys.initial_state(&phi, &|_| 0.0)?)
        }
        InitKind::Equilibrium(label) => Ok(prepared.equilibrium(label)?.to_vec()),
    }
}

/// Reference trajectory and discrete QR run for a prepared model.
pub fn compute_exponents(cfg: &RunConfig, prepared: &PreparedModel, dqr: &DqrConfig) -> Result<LyapunovRun, CliError> {
    let horizon = dqr.t_final + REFERENCE_MARGIN;
    let traj = if prepared.linear {
        Trajectory::constant(0.0, horizon, &vec![0.0; prepared.system.dim()])?
    } else {
        let opts = ReferenceOptions { transient: cfg.transient, horizon, rtol: cfg.rtol, atol: cfg.atol };
        reference_trajectory(&prepared.system, &prepared.initial, opts)?
    };
    let var = linearize_along(prepared.system.clone(), traj)?;
    Ok(dqr_lyapunov(&var, dqr)?)
}

/// Discrete QR settings from a run configuration.
pub fn dqr_config(cfg: &RunConfig) -> DqrConfig {
    DqrConfig {
        t_final: cfg.t_final,
        le_tol: cfg.dqr_tol,
        seed: cfg.seed,
        initial_frame: cfg.frame,
        num_exponents: cfg.exponents,
        ..DqrConfig::default()
    }
}

/// Dominant exponent once the one closest to zero (the trivial exponent of
/// a periodic or chaotic attractor) is set aside.
pub fn dominant_nontrivial(exponents: &[f64]) -> f64 {
    let Some(skip) = exponents.iter().enumerate().min_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).map(|(i, _)| i) else {
        return f64::NAN;
    };
    exponents.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).fold(f64::NAN, f64::max)
}

/// Oracle regime chosen automatically from the model parameters.
pub fn auto_oracle(cfg: &RunConfig) -> Result<OracleKind, CliError> {
    let p = &cfg.params;
    let eq = |s: &str| Ok(OracleKind::Equilibrium(s.to_string()));
    match p.kind {
        ModelKind::Diag | ModelKind::Zero | ModelKind::LinearDde => eq("trivial"),
        ModelKind::Quad => {
            let g = p.get("gamma");
            if g <= 1.0 {
                eq("trivial")
            } else if g < QUAD_RE_HOPF_GAMMA {
                eq("nontrivial")
            } else if g < QUAD_RE_PERIOD_DOUBLING {
                Ok(OracleKind::Periodic)
            } else {
                Err(CliError::Config(format!("no oracle for quad beyond gamma = {QUAD_RE_PERIOD_DOUBLING}")))
            }
        }
        ModelKind::Cannibalism => {
            let g = p.get("gamma");
            if g <= 1.0 {
                eq("trivial")
            } else if g.ln() < 1.0 + PI / 2.0 {
                eq("nontrivial")
            } else {
                Err(CliError::Config("no oracle for cannibalism beyond its Hopf point".into()))
            }
        }
        ModelKind::Daphnia => {
            let beta_c = crate::models::daphnia_transcritical_beta(p.get("K"), p.get("a_mat"), p.get("a_max"));
            if p.get("beta") < beta_c {
                eq("consumer-free")
            } else {
                eq("nontrivial")
            }
        }
    }
}

/// First period doubling of the periodic branch of `quad_re`.
pub const QUAD_RE_PERIOD_DOUBLING: f64 = 4.32;
