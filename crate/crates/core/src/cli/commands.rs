use rayon::prelude::*;

use crate::dqr::DqrConfig;
use crate::linearize::{linearize_along, reference_trajectory, ReferenceOptions};
use crate::models::QUAD_RE_PERIOD;
use crate::odeint::{integrate_fixed_observer, IvpProblem};
use crate::oracle::{equilibrium_les, floquet_les};

use super::csv_out::{format_meta, Table};
use super::{
    auto_oracle, compute_exponents, dqr_config, prepare, prepare_with_degree, CliError, ModelKind, OracleKind,
    RunConfig, Vary,
};

/// CSV text plus warnings meant for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub csv: String,
    pub warnings: Vec<String>,
}

impl CommandOutput {
    fn new(csv: String) -> Self {
        CommandOutput { csv, warnings: Vec::new() }
    }
}

/// Trajectory sampled on `0, grid_step, …, T`.
pub fn cmd_solve(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let prepared = prepare(cfg)?;
    let sys = &prepared.system;
    let count = (cfg.t_final / cfg.grid_step + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=count).map(|i| i as f64 * cfg.grid_step).collect();
    let t_end = times.last().copied().unwrap_or(0.0).max(cfg.t_final);
    let rhs = |t: f64, w: &[f64], out: &mut [f64]| sys.rhs(t, w, out);
    let states = integrate_fixed_observer(
        IvpProblem::new(rhs, 0.0, t_end, prepared.initial.clone()).tolerances(cfg.rtol, cfg.atol),
        &times,
    )?;

    let mut header = vec!["t".to_string()];
    header.extend(sys.observable_names());
    if cfg.full_state {
        header.extend((0..sys.dim()).map(|i| format!("w{i}")));
    }
    let mut table = Table::new(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for (t, w) in times.iter().zip(&states) {
        row.clear();
        row.push(*t);
        row.extend(sys.observables(w));
        if cfg.full_state {
            row.extend_from_slice(w);
        }
        table.numbers(&row)?;
    }
    Ok(CommandOutput::new(table.finish()?))
}

/// Exponents sorted in descending order with run metadata.
pub fn cmd_les(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let prepared = prepare(cfg)?;
    let dqr = dqr_config(cfg);
    let run = compute_exponents(cfg, &prepared, &dqr)?;
    let mut table = Table::new(&["rank".to_string(), "exponent".to_string()])?;
    table.meta("model", cfg.model());
    table.meta("params", cfg.params.summary());
    table.meta("dimension", prepared.system.dim());
    table.meta("MX", cfg.mx);
    table.meta("MY", cfg.my);
    table.meta("T", format_meta(cfg.t_final));
    table.meta("t_final", super::format_number(run.final_time()));
    table.meta("transient", format_meta(cfg.transient));
    table.meta("dqr_tol", format_meta(cfg.dqr_tol));
    table.meta("rtol", format_meta(cfg.rtol));
    table.meta("atol", format_meta(cfg.atol));
    table.meta("seed", cfg.seed);
    table.meta("accepted_steps", run.accepted);
    table.meta("rejected_steps", run.rejected);
    for (i, l) in run.exponents.iter().enumerate() {
        table.row(&[(i + 1).to_string(), super::format_number(*l)])?;
    }
    Ok(CommandOutput::new(table.finish()?))
}

/// Exponents tracked by a sweep point unless `exponents` is set.
pub const SWEEP_EXPONENTS: usize = 4;

/// One row of leading exponents per parameter value; failed points give
/// `NaN` rows and a warning.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let range = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs --param, --start, --stop and --step".into()))?;
    let values = range.values();
    // Validate every point's model parameters before spending compute.
    let configs: Vec<RunConfig> = values.iter().map(|&v| cfg.with_param(&range.param, v)).collect::<Result<_, _>>()?;
    let n = prepare(&configs[0])?.system.dim();
    let p = cfg.exponents.unwrap_or(SWEEP_EXPONENTS).min(n);

    let results: Vec<Result<Vec<f64>, CliError>> = configs
        .par_iter()
        .map(|c| {
            let prepared = prepare(c)?;
            let dqr = DqrConfig { num_exponents: Some(p), ..dqr_config(c) };
            Ok(compute_exponents(c, &prepared, &dqr)?.exponents)
        })
        .collect();

    let mut header = vec![range.param.clone()];
    header.extend((1..=p).map(|i| format!("lambda{i}")));
    let mut table = Table::new(&header)?;
    let mut warnings = Vec::new();
    for (v, res) in values.iter().zip(results) {
        let mut row = vec![*v];
        match res {
            Ok(ex) => row.extend(ex),
            Err(CliError::Config(msg)) => return Err(CliError::Config(msg)),
            Err(e) => {
                warnings.push(format!("{}={v}: {e}", range.param));
                row.extend(std::iter::repeat_n(f64::NAN, p));
            }
        }
        table.numbers(&row)?;
    }
    Ok(CommandOutput { csv: table.finish()?, warnings })
}

/// Leading two oracle exponents for the configured regime.
pub fn oracle_exponents(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let kind = match &cfg.oracle {
        OracleKind::Auto => auto_oracle(cfg)?,
        k => k.clone(),
    };
    let m = cfg.oracle_m;
    match kind {
        OracleKind::Equilibrium(label) => {
            let prepared = prepare_with_degree(cfg, m.max(2), m.max(1))?;
            let state = prepared.equilibrium(&label)?;
            Ok(equilibrium_les(&prepared.system, state)?.exponents)
        }
        OracleKind::Periodic => {
            if cfg.model() != ModelKind::Quad {
                return Err(CliError::Config("the periodic oracle is available for model quad only".into()));
            }
            let mut exact = cfg.clone();
            exact.init = super::InitKind::Periodic;
            let prepared = prepare_with_degree(&exact, m, cfg.my)?;
            let opts = ReferenceOptions { transient: 0.0, horizon: QUAD_RE_PERIOD, rtol: 1e-10, atol: 1e-12 };
            let traj = reference_trajectory(&prepared.system, &prepared.initial, opts)?;
            let var = linearize_along(prepared.system.clone(), traj)?;
            Ok(floquet_les(&var, 0.0, QUAD_RE_PERIOD)?.exponents)
        }
        OracleKind::Auto => unreachable!("resolved above"),
    }
}

/// Errors of the two leading exponents against the oracle while varying
/// the collocation degree or the truncation time.
pub fn cmd_convergence(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let vary = cfg.vary.ok_or_else(|| CliError::Config("convergence needs --vary M or --vary T".into()))?;
    if cfg.values.is_empty() {
        return Err(CliError::Config("convergence needs --values".into()));
    }
    let oracle = oracle_exponents(cfg)?;
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(f64::NAN);

    let rows: Vec<(f64, f64, Vec<f64>)> = match vary {
        Vary::T => {
            let t_max = cfg.values.iter().copied().fold(0.0, f64::max);
            let prepared = prepare(cfg)?;
            let dqr = DqrConfig { t_final: t_max, record_history: true, ..dqr_config(cfg) };
            let run = compute_exponents(cfg, &prepared, &dqr)?;
            cfg.values
                .iter()
                .map(|&t| {
                    let k = run.times.iter().position(|&tk| tk >= t && tk > 0.0).unwrap_or(run.times.len() - 1);
                    let ex = run.exponents_at(t).unwrap_or_else(|| run.exponents.clone());
                    (t, run.times[k], ex)
                })
                .collect()
        }
        Vary::M => {
            let degrees: Vec<usize> = cfg
                .values
                .iter()
                .map(|&v| {
                    if v.fract() != 0.0 || v < 2.0 {
                        Err(CliError::Config(format!("collocation degrees must be integers >= 2, got {v}")))
                    } else {
                        Ok(v as usize)
                    }
                })
                .collect::<Result<_, _>>()?;
            let results: Vec<Result<(f64, f64, Vec<f64>), CliError>> = degrees
                .par_iter()
                .map(|&m| {
                    let mut c = cfg.clone();
                    c.mx = m;
                    c.my = m;
                    let prepared = prepare(&c)?;
                    let run = compute_exponents(&c, &prepared, &dqr_config(&c))?;
                    Ok((m as f64, run.final_time(), run.exponents))
                })
                .collect();
            results.into_iter().collect::<Result<_, _>>()?
        }
    };

    let name = match vary {
        Vary::M => "M",
        Vary::T => "T",
    };
    let header: Vec<String> =
        [name, "t_final", "lambda1", "oracle1", "error1", "lambda2", "oracle2", "error2"].map(String::from).to_vec();
    let mut table = Table::new(&header)?;
    table.meta("model", cfg.model());
    table.meta("params", cfg.params.summary());
    table.meta("oracle_M", cfg.oracle_m);
    for (value, t_reached, ex) in rows {
        let (l1, l2) = (at(&ex, 0), at(&ex, 1));
        let (o1, o2) = (at(&oracle, 0), at(&oracle, 1));
        table.numbers(&[value, t_reached, l1, o1, (l1 - o1).abs(), l2, o2, (l2 - o2).abs()])?;
    }
    Ok(CommandOutput::new(table.finish()?))
}
