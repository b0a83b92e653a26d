//! Run configuration: defaults, `key=value` files and flag overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::dqr::{InitialFrame, DEFAULT_LE_TOL, DEFAULT_SEED};
use crate::odeint::{DEFAULT_ATOL, DEFAULT_RTOL};

use super::CliError;

/// Shipped models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// `quad_re(γ)`.
    Quad,
    /// Egg cannibalism renewal equation.
    Cannibalism,
    /// Logistic Daphnia (coupled RE/DDE).
    Daphnia,
    /// `f ≡ 0` renewal equation.
    Zero,
    /// Synthetic `z' = diag(λ1, λ2) z`.
    Diag,
    /// `y' = a y(t) + b y(t − τ)`.
    LinearDde,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] =
        [ModelKind::Quad, ModelKind::Cannibalism, ModelKind::Daphnia, ModelKind::Zero, ModelKind::Diag, ModelKind::LinearDde];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Quad => "quad",
            ModelKind::Cannibalism => "cannibalism",
            ModelKind::Daphnia => "daphnia",
            ModelKind::Zero => "zero",
            ModelKind::Diag => "diag",
            ModelKind::LinearDde => "linear-dde",
        }
    }

    /// Parameter names with their defaults.
    pub fn parameters(self) -> &'static [(&'static str, f64)] {
        match self {
            ModelKind::Quad => &[("gamma", 4.0)],
            ModelKind::Cannibalism => &[("gamma", 10.0), ("a_mat", 1.0), ("a_max", 3.0)],
            ModelKind::Daphnia => &[("beta", 1.2), ("r", 1.0), ("K", 1.0), ("gamma", 1.0), ("a_mat", 3.0), ("a_max", 4.0)],
            ModelKind::Zero => &[],
            ModelKind::Diag => &[("lambda1", 1.0), ("lambda2", -2.0)],
            ModelKind::LinearDde => &[("a", -1.0), ("b", 0.5), ("tau", 1.0)],
        }
    }

    /// Accepts `log_gamma` as an alias setting `gamma = e^{log_gamma}`.
    pub fn accepts_parameter(self, key: &str) -> bool {
        let has_gamma = self.parameters().iter().any(|(k, _)| *k == "gamma");
        (key == "log_gamma" && has_gamma) || self.parameters().iter().any(|(k, _)| *k == key)
    }
}

impl FromStr for ModelKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == norm)
            .ok_or_else(|| CliError::Config(format!("unknown model '{s}' (expected one of {})", model_names())))
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn model_names() -> String {
    ModelKind::ALL.iter().map(|m| m.name()).collect::<Vec<_>>().join(", ")
}

/// Model parameters after defaults and overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    values: BTreeMap<String, f64>,
}

impl ModelParams {
    pub fn defaults(kind: ModelKind) -> Self {
        let values = kind.parameters().iter().map(|(k, v)| (k.to_string(), *v)).collect();
        ModelParams { kind, values }
    }

    pub fn get(&self, key: &str) -> f64 {
        self.values[key]
    }

    /// Sets a parameter, resolving `log_gamma`.
    pub fn set(&mut self, key: &str, value: f64) -> Result<(), CliError> {
        if !self.kind.accepts_parameter(key) {
            return Err(CliError::Config(format!("parameter '{key}' is not used by model {}", self.kind)));
        }
        if !value.is_finite() {
            return Err(CliError::Config(format!("parameter '{key}' must be finite")));
        }
        if key == "log_gamma" {
            self.values.insert("gamma".into(), value.exp());
        } else {
            self.values.insert(key.to_string(), value);
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.values.iter().map(|(k, v)| (k.as_str(), *v))
    }

    /// `gamma=4;a_mat=1` style summary.
    pub fn summary(&self) -> String {
        self.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

/// Initial data for trajectories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitKind {
    /// Constant 0.2 for RE components; the Daphnia resource starts 10%
    /// above its nontrivial equilibrium value.
    Default,
    /// Exact periodic solution of `quad_re` (beyond the Hopf point).
    Periodic,
    /// A model equilibrium by label.
    Equilibrium(String),
}

impl FromStr for InitKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "default" => Ok(InitKind::Default),
            "periodic" => Ok(InitKind::Periodic),
            other => match other.strip_prefix("equilibrium:") {
                Some(label) if !label.is_empty() => Ok(InitKind::Equilibrium(label.to_string())),
                _ => Err(CliError::Config(format!(
                    "unknown initial data '{s}' (expected default, periodic or equilibrium:<label>)"
                ))),
            },
        }
    }
}

/// Which reference value a convergence study compares against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleKind {
    /// Chosen from the model and parameters.
    Auto,
    Equilibrium(String),
    Periodic,
}

impl FromStr for OracleKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "auto" => Ok(OracleKind::Auto),
            "periodic" => Ok(OracleKind::Periodic),
            other => match other.strip_prefix("equilibrium:") {
                Some(label) if !label.is_empty() => Ok(OracleKind::Equilibrium(label.to_string())),
                _ => Err(CliError::Config(format!(
                    "unknown oracle '{s}' (expected auto, periodic or equilibrium:<label>)"
                ))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    M,
    T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRange {
    pub param: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    /// `start, start + step, …` up to `stop` (inclusive within rounding).
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub mx: usize,
    pub my: usize,
    pub t_final: f64,
    pub transient: f64,
    pub dqr_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    /// Number of exponents tracked; `None` means all.
    pub exponents: Option<usize>,
    pub frame: InitialFrame,
    pub init: InitKind,
    /// Output grid spacing for `solve`.
    pub grid_step: f64,
    pub full_state: bool,
    pub sweep: Option<SweepRange>,
    pub vary: Option<Vary>,
    pub values: Vec<f64>,
    pub oracle: OracleKind,
    /// Collocation degree of the equilibrium oracle.
    pub oracle_m: usize,
}

pub const DEFAULT_T: f64 = 1000.0;
pub const DEFAULT_SOLVE_T: f64 = 500.0;
pub const DEFAULT_TRANSIENT: f64 = 200.0;
pub const DEFAULT_M: usize = 15;
pub const DEFAULT_GRID_STEP: f64 = 0.05;
pub const DEFAULT_ORACLE_M: usize = 40;

impl RunConfig {
    pub fn new(kind: ModelKind) -> Self {
        RunConfig {
            params: ModelParams::defaults(kind),
            mx: DEFAULT_M,
            my: DEFAULT_M,
            t_final: DEFAULT_T,
            transient: DEFAULT_TRANSIENT,
            dqr_tol: DEFAULT_LE_TOL,
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_ATOL,
            seed: DEFAULT_SEED,
            out: None,
            exponents: None,
            frame: InitialFrame::Random,
            init: InitKind::Default,
            grid_step: DEFAULT_GRID_STEP,
            full_state: false,
            sweep: None,
            vary: None,
            values: Vec::new(),
            oracle: OracleKind::Auto,
            oracle_m: DEFAULT_ORACLE_M,
        }
    }

    pub fn model(&self) -> ModelKind {
        self.params.kind
    }

    /// Builds a configuration from `key → value` strings. `T` defaults to
    /// `default_t` when absent.
    pub fn from_map(map: &BTreeMap<String, String>, default_t: f64) -> Result<Self, CliError> {
        let model: ModelKind = map
            .get("model")
            .ok_or_else(|| CliError::Config("no model given (use --model or a config file)".into()))?
            .parse()?;
        let mut cfg = RunConfig::new(model);
        cfg.t_final = default_t;
        let mut sweep = (None, None, None, None);
        // log_gamma last so an explicit gamma in the same source cannot undo it.
        let mut entries: Vec<(&String, &String)> = map.iter().collect();
        entries.sort_by_key(|(k, _)| k.as_str() == "log_gamma");
        for (key, raw) in entries {
            let value = raw.trim();
            match key.as_str() {
                "model" => {}
                "MX" => cfg.mx = parse(key, value)?,
                "MY" => cfg.my = parse(key, value)?,
                "T" => cfg.t_final = parse(key, value)?,
                "transient" => cfg.transient = parse(key, value)?,
                "dqr_tol" => cfg.dqr_tol = parse(key, value)?,
                "rtol" => cfg.rtol = parse(key, value)?,
                "atol" => cfg.atol = parse(key, value)?,
                "seed" => cfg.seed = parse(key, value)?,
                "out" => cfg.out = Some(PathBuf::from(value)),
                "exponents" => {
                    cfg.exponents = if value == "all" { None } else { Some(parse(key, value)?) };
                }
                "frame" => {
                    cfg.frame = match value {
                        "random" => InitialFrame::Random,
                        "identity" => InitialFrame::Identity,
                        _ => return Err(CliError::Config(format!("frame must be random or identity, got '{value}'"))),
                    }
                }
                "init" => cfg.init = value.parse()?,
                "grid_step" => cfg.grid_step = parse(key, value)?,
                "full_state" => cfg.full_state = parse(key, value)?,
                "param" => sweep.0 = Some(value.to_string()),
                "start" => sweep.1 = Some(parse::<f64>(key, value)?),
                "stop" => sweep.2 = Some(parse::<f64>(key, value)?),
                "step" => sweep.3 = Some(parse::<f64>(key, value)?),
                "vary" => {
                    cfg.vary = Some(match value {
                        "M" | "m" => Vary::M,
                        "T" | "t" => Vary::T,
                        _ => return Err(CliError::Config(format!("vary must be M or T, got '{value}'"))),
                    })
                }
                "values" => {
                    cfg.values = value
                        .split(',')
                        .map(|v| parse::<f64>(key, v.trim()))
                        .collect::<Result<Vec<_>, _>>()?;
                }
                "oracle" => cfg.oracle = value.parse()?,
                "oracle_M" => cfg.oracle_m = parse(key, value)?,
                other => {
                    let v: f64 = parse(other, value)?;
                    cfg.params.set(other, v)?;
                }
            }
        }
        cfg.sweep = match sweep {
            (None, None, None, None) => None,
            (Some(param), Some(start), Some(stop), Some(step)) => Some(SweepRange { param, start, stop, step }),
            _ => return Err(CliError::Config("a sweep needs param, start, stop and step".into())),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = [
            ("T", self.t_final),
            ("dqr-tol", self.dqr_tol),
            ("rtol", self.rtol),
            ("atol", self.atol),
            ("grid-step", self.grid_step),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.transient >= 0.0 && self.transient.is_finite()) {
            return Err(CliError::Config(format!("transient must be non-negative, got {}", self.transient)));
        }
        if self.mx < 2 {
            return Err(CliError::Config(format!("MX must be at least 2, got {}", self.mx)));
        }
        if self.my < 1 {
            return Err(CliError::Config(format!("MY must be at least 1, got {}", self.my)));
        }
        if self.oracle_m < 2 {
            return Err(CliError::Config(format!("oracle-M must be at least 2, got {}", self.oracle_m)));
        }
        if self.exponents == Some(0) {
            return Err(CliError::Config("exponents must be at least 1".into()));
        }
        if let Some(s) = &self.sweep {
            if !self.model().accepts_parameter(&s.param) {
                return Err(CliError::Config(format!("model {} has no parameter '{}'", self.model(), s.param)));
            }
            if !(s.step > 0.0 && s.stop >= s.start && s.start.is_finite() && s.stop.is_finite()) {
                return Err(CliError::Config(format!(
                    "sweep range must satisfy start <= stop and step > 0 (got {}..{} step {})",
                    s.start, s.stop, s.step
                )));
            }
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(CliError::Config("convergence values must be positive".into()));
        }
        Ok(())
    }

    /// Parameters with `key` replaced (for sweeps).
    pub fn with_param(&self, key: &str, value: f64) -> Result<RunConfig, CliError> {
        let mut cfg = self.clone();
        cfg.params.set(key, value)?;
        Ok(cfg)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value.parse().map_err(|_| CliError::Config(format!("invalid value '{value}' for {key}")))
}

/// Normalizes a key: surrounding whitespace removed, `-` becomes `_`.
/// The case-sensitive keys `MX`, `MY`, `T`, `K`, `oracle_M` are kept.
pub fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key=value, got '{line}'", lineno + 1)))?;
        let key = normalize_key(k);
        if key.is_empty() {
            return Err(CliError::Config(format!("config line {}: empty key", lineno + 1)));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text)
}
