use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{read_config_file, DEFAULT_SOLVE_T, DEFAULT_T};
use super::{cmd_convergence, cmd_les, cmd_solve, cmd_sweep, CliError, CommandOutput, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "lyapdelay", version, about = "Lyapunov exponents of renewal and delay equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the collocated system and sample the solution.
    Solve(CommonArgs),
    /// Lyapunov exponents along the attractor reached from the initial data.
    Les(CommonArgs),
    /// Leading exponents over a parameter range.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Exponent errors against an oracle while varying M or T.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        conv: ConvergenceArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// quad, cannibalism, daphnia, zero, diag or linear-dde.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Sets gamma to exp(log-gamma).
    #[arg(long, allow_hyphen_values = true)]
    pub log_gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub r: Option<f64>,
    #[arg(long = "K", allow_hyphen_values = true)]
    pub k: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_mat: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_max: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<f64>,
    /// Collocation degree of the renewal component.
    #[arg(long = "MX")]
    pub mx: Option<usize>,
    /// Collocation degree of the delay-differential component.
    #[arg(long = "MY")]
    pub my: Option<usize>,
    /// Final time (default 500 for solve, 1000 otherwise).
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Discarded transient before the exponent window (default 200).
    #[arg(long)]
    pub transient: Option<f64>,
    /// Tolerance on the per-step exponent increments (default 1e-6).
    #[arg(long)]
    pub dqr_tol: Option<f64>,
    /// Integrator relative tolerance (default 1e-6).
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Integrator absolute tolerance (default 1e-7).
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of exponents to compute, or "all".
    #[arg(long)]
    pub exponents: Option<String>,
    /// Initial frame: random or identity.
    #[arg(long)]
    pub frame: Option<String>,
    /// Initial data: default, periodic or equilibrium:<label>.
    #[arg(long)]
    pub init: Option<String>,
    /// Output grid spacing for solve (default 0.05).
    #[arg(long)]
    pub grid_step: Option<f64>,
    /// Also print every collocation unknown (solve).
    #[arg(long)]
    pub full_state: bool,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// key=value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Parameter to vary (e.g. gamma, log_gamma, beta).
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub stop: Option<f64>,
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ConvergenceArgs {
    /// M or T.
    #[arg(long)]
    pub vary: Option<String>,
    /// Comma-separated list of degrees or final times.
    #[arg(long)]
    pub values: Option<String>,
    /// auto, periodic or equilibrium:<label>.
    #[arg(long)]
    pub oracle: Option<String>,
    /// Collocation degree for the equilibrium oracle (default 40).
    #[arg(long = "oracle-M")]
    pub oracle_m: Option<usize>,
}

fn put<T: ToString>(map: &mut BTreeMap<String, String>, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v.to_string());
    }
}

impl CommonArgs {
    fn overlay(&self, map: &mut BTreeMap<String, String>) {
        put(map, "model", &self.model);
        put(map, "gamma", &self.gamma);
        put(map, "log_gamma", &self.log_gamma);
        put(map, "beta", &self.beta);
        put(map, "r", &self.r);
        put(map, "K", &self.k);
        put(map, "a_mat", &self.a_mat);
        put(map, "a_max", &self.a_max);
        put(map, "lambda1", &self.lambda1);
        put(map, "lambda2", &self.lambda2);
        put(map, "a", &self.a);
        put(map, "b", &self.b);
        put(map, "tau", &self.tau);
        put(map, "MX", &self.mx);
        put(map, "MY", &self.my);
        put(map, "T", &self.t);
        put(map, "transient", &self.transient);
        put(map, "dqr_tol", &self.dqr_tol);
        put(map, "rtol", &self.rtol);
        put(map, "atol", &self.atol);
        put(map, "seed", &self.seed);
        put(map, "exponents", &self.exponents);
        put(map, "frame", &self.frame);
        put(map, "init", &self.init);
        put(map, "grid_step", &self.grid_step);
        if self.full_state {
            map.insert("full_state".into(), "true".into());
        }
        put(map, "out", &self.out.as_ref().map(|p| p.display().to_string()));
    }

    /// Config-file entries overlaid with the flags given here.
    pub fn resolve(&self, extra: &BTreeMap<String, String>, default_t: f64) -> Result<RunConfig, CliError> {
        let mut map = match &self.config {
            Some(path) => read_config_file(path)?,
            None => BTreeMap::new(),
        };
        // A log_gamma from the file must not shadow a gamma flag, and vice versa.
        if self.gamma.is_some() {
            map.remove("log_gamma");
        }
        if self.log_gamma.is_some() {
            map.remove("gamma");
        }
        self.overlay(&mut map);
        map.extend(extra.iter().map(|(k, v)| (k.clone(), v.clone())));
        RunConfig::from_map(&map, default_t)
    }
}

impl SweepArgs {
    fn overlay(&self, map: &mut BTreeMap<String, String>) {
        put(map, "param", &self.param);
        put(map, "start", &self.start);
        put(map, "stop", &self.stop);
        put(map, "step", &self.step);
    }
}

impl ConvergenceArgs {
    fn overlay(&self, map: &mut BTreeMap<String, String>) {
        put(map, "vary", &self.vary);
        put(map, "values", &self.values);
        put(map, "oracle", &self.oracle);
        put(map, "oracle_M", &self.oracle_m);
    }
}

/// Resolves the configuration, runs the command and writes the CSV to
/// `--out` when given. Returns the command output either way.
pub fn run(cli: &Cli) -> Result<CommandOutput, CliError> {
    let mut extra = BTreeMap::new();
    let (cfg, cmd): (RunConfig, fn(&RunConfig) -> Result<CommandOutput, CliError>) = match &cli.command {
        Command::Solve(c) => (c.resolve(&extra, DEFAULT_SOLVE_T)?, cmd_solve),
        Command::Les(c) => (c.resolve(&extra, DEFAULT_T)?, cmd_les),
        Command::Sweep { common, sweep } => {
            sweep.overlay(&mut extra);
            (common.resolve(&extra, DEFAULT_T)?, cmd_sweep)
        }
        Command::Convergence { common, conv } => {
            conv.overlay(&mut extra);
            (common.resolve(&extra, DEFAULT_T)?, cmd_convergence)
        }
    };
    let output = cmd(&cfg)?;
    if let Some(path) = &cfg.out {
        std::fs::write(path, &output.csv)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(output)
}
