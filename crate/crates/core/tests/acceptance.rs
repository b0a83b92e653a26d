//! Acceptance harness: one PASS/FAIL line per criterion, then a nonzero
//! exit status if any criterion failed.
//!
//! Sweep loci use a zero band: an exponent counts as having reached zero
//! once it is at least `-ZERO_BAND`. Above a Hopf point the leading
//! exponent is the trivial one and sits at zero up to DQR noise, so a
//! literal sign test would pick an arbitrary grid point.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lyapdelay::cli::{
    cmd_convergence, cmd_solve, cmd_sweep, compute_exponents, dominant_nontrivial, dqr_config, oracle_exponents,
    prepare, InitKind, RunConfig, DEFAULT_T,
};
use lyapdelay::dqr::{dqr_lyapunov, DqrConfig, InitialFrame};
use lyapdelay::linalg::Matrix;
use lyapdelay::linearize::{linearize_along, reference_trajectory, ConstantCoefficients, ReferenceOptions};
use lyapdelay::models::{quad_re, quad_re_periodic_solution, QUAD_RE_HOPF_GAMMA, QUAD_RE_PERIOD};
use lyapdelay::oracle::{floquet_les, trapezoidal_re_solve};
use num_complex::Complex64;

use common::props;

const ZERO_BAND: f64 = 1e-2;

struct Outcome {
    pass: bool,
    detail: String,
}

type Check = Result<Outcome, String>;

fn outcome(pass: bool, detail: String) -> Check {
    Ok(Outcome { pass, detail })
}

fn config(pairs: &[(&str, &str)]) -> Result<RunConfig, String> {
    let map: BTreeMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    RunConfig::from_map(&map, DEFAULT_T).map_err(|e| e.to_string())
}

/// Data rows of a CSV produced by the CLI layer.
fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().expect("numeric cell")).collect())
        .collect()
}

fn sweep(pairs: &[(&str, &str)]) -> Result<Vec<Vec<f64>>, String> {
    let out = cmd_sweep(&config(pairs)?).map_err(|e| e.to_string())?;
    Ok(rows(&out.csv))
}

/// First parameter value at which `series` reaches the zero band.
fn zero_locus(params: &[f64], series: &[f64]) -> Option<f64> {
    params.iter().zip(series).find(|(_, &l)| l >= -ZERO_BAND).map(|(&p, _)| p)
}

fn first_positive(params: &[f64], series: &[f64]) -> Option<f64> {
    params.iter().zip(series).find(|(_, &l)| l > 0.0).map(|(&p, _)| p)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or("none".into(), |v| format!("{v:.4}"))
}

fn c1_synthetic() -> Check {
    let gen = ConstantCoefficients(Matrix::from_diag(&[1.0, -2.0]));
    let cfg = DqrConfig { le_tol: 1e-10, initial_frame: InitialFrame::Identity, ..DqrConfig::new(100.0) };
    let run = dqr_lyapunov(&gen, &cfg).map_err(|e| e.to_string())?;
    let err = (run.exponents[0] - 1.0).abs().max((run.exponents[1] + 2.0).abs());
    outcome(err <= 1e-8, format!("exponents {:?}, max error {err:.2e} (bound 1e-8)", run.exponents))
}

fn solve_error(mx: usize) -> Result<f64, String> {
    let mx = mx.to_string();
    let cfg = config(&[("model", "quad"), ("gamma", "4"), ("MX", &mx), ("T", "500"), ("init", "periodic")])?;
    let out = cmd_solve(&cfg).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for r in rows(&out.csv) {
        let exact = quad_re_periodic_solution(4.0, r[0]).map_err(|e| e.to_string())?;
        err = err.max((r[1] - exact).abs());
    }
    Ok(err)
}

fn c2_solution() -> Check {
    let e20 = solve_error(20)?;
    let e8 = solve_error(8)?;
    outcome(
        e20 <= 1e-4 && e8 >= 10.0 * e20,
        format!("max error M=20 {e20:.3e} (bound 1e-4), M=8 {e8:.3e} (ratio {:.1}, need >= 10)", e8 / e20),
    )
}

fn trapezoid_error(r: usize) -> Result<f64, String> {
    let model = quad_re(4.0).map_err(|e| e.to_string())?;
    let phi = |t: f64| quad_re_periodic_solution(4.0, t).unwrap_or(f64::NAN);
    let sol = trapezoidal_re_solve(&model, r, &phi, 500.0).map_err(|e| e.to_string())?;
    let mut err = 0.0f64;
    for (t, x) in sol.times().iter().zip(&sol.values) {
        err = err.max((x - quad_re_periodic_solution(4.0, *t).map_err(|e| e.to_string())?).abs());
    }
    Ok(err)
}

fn c3_trapezoid() -> Check {
    let (e1, e2) = (trapezoid_error(32)?, trapezoid_error(64)?);
    let ratio = e1 / e2;
    outcome(
        (3.4..=4.6).contains(&ratio),
        format!("r=32 {e1:.3e}, r=64 {e2:.3e}, ratio {ratio:.3} (window [3.4, 4.6])"),
    )
}

fn c4_equilibrium(gamma: &str) -> Check {
    let cfg = config(&[("model", "quad"), ("gamma", gamma), ("MX", "15"), ("T", "1000")])?;
    let prepared = prepare(&cfg).map_err(|e| e.to_string())?;
    let run = compute_exponents(&cfg, &prepared, &dqr_config(&cfg)).map_err(|e| e.to_string())?;
    let oracle = oracle_exponents(&cfg).map_err(|e| e.to_string())?;
    let err = (run.exponents[0] - oracle[0]).abs();
    outcome(
        err <= 1e-2,
        format!("gamma={gamma}: DQR {:.6}, oracle {:.6}, error {err:.2e} (bound 1e-2)", run.exponents[0], oracle[0]),
    )
}

fn c5_convergence() -> Check {
    let cfg = config(&[
        ("model", "quad"),
        ("gamma", "0.5"),
        ("MX", "15"),
        ("vary", "T"),
        ("values", "250,500,1000,2000"),
    ])?;
    let data = rows(&cmd_convergence(&cfg).map_err(|e| e.to_string())?.csv);
    let pts: Vec<(f64, f64)> = data.iter().map(|r| (r[0].ln(), r[4].ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / pts.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    let errors: Vec<String> = data.iter().map(|r| format!("{:.2e}", r[4])).collect();
    outcome((-1.3..=-0.7).contains(&slope), format!("errors {errors:?}, slope {slope:.3} (window [-1.3, -0.7])"))
}

fn c6_trivial() -> Check {
    let cfg = config(&[("model", "quad"), ("gamma", "4"), ("MX", "15"), ("T", "1000")])?;
    let prepared = prepare(&cfg).map_err(|e| e.to_string())?;
    let run = compute_exponents(&cfg, &prepared, &dqr_config(&cfg)).map_err(|e| e.to_string())?;
    let trivial = run.exponents.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(f64::NAN);

    let mut exact = cfg.clone();
    exact.init = InitKind::Periodic;
    let prepared = prepare(&exact).map_err(|e| e.to_string())?;
    let opts = ReferenceOptions { transient: 0.0, horizon: QUAD_RE_PERIOD, rtol: 1e-10, atol: 1e-12 };
    let traj = reference_trajectory(&prepared.system, &prepared.initial, opts).map_err(|e| e.to_string())?;
    let var = linearize_along(prepared.system.clone(), traj).map_err(|e| e.to_string())?;
    let spectrum = floquet_les(&var, 0.0, QUAD_RE_PERIOD).map_err(|e| e.to_string())?;
    let mu = spectrum.closest_value(Complex64::new(1.0, 0.0)).unwrap_or(Complex64::new(f64::NAN, 0.0));
    let dist = (mu - 1.0).norm();
    outcome(
        trivial.abs() <= 1e-2 && dist <= 1e-3,
        format!(
            "DQR trivial exponent {trivial:.2e} (bound 1e-2), multiplier {:.12} (|mu-1| = {dist:.2e}, bound 1e-3), dominant nontrivial {:.4}",
            mu.re,
            dominant_nontrivial(&run.exponents)
        ),
    )
}

fn c7_hopf() -> Check {
    let data = sweep(&[("model", "quad"), ("param", "gamma"), ("start", "2"), ("stop", "4"), ("step", "0.05")])?;
    let g: Vec<f64> = data.iter().map(|r| r[0]).collect();
    let l1: Vec<f64> = data.iter().map(|r| r[1]).collect();
    let locus = zero_locus(&g, &l1);
    let pass = locus.is_some_and(|x| (x - QUAD_RE_HOPF_GAMMA).abs() <= 0.05 + 1e-9);
    outcome(
        pass,
        format!(
            "lambda1 reaches zero at gamma {} (Hopf {QUAD_RE_HOPF_GAMMA:.4}, tolerance 0.05); first positive value at {}",
            fmt_opt(locus),
            fmt_opt(first_positive(&g, &l1))
        ),
    )
}

fn c8_period_doubling() -> Check {
    let data = sweep(&[("model", "quad"), ("param", "gamma"), ("start", "4.2"), ("stop", "4.6"), ("step", "0.01")])?;
    let g: Vec<f64> = data.iter().map(|r| r[0]).collect();
    let dom: Vec<f64> = data.iter().map(|r| dominant_nontrivial(&r[1..])).collect();
    let locus = zero_locus(&g, &dom);
    let chaotic: Vec<String> =
        g.iter().zip(&dom).filter(|(&x, &d)| x >= 4.55 - 1e-9 && d > 0.0).map(|(x, _)| format!("{x:.2}")).collect();
    let pass = locus.is_some_and(|x| (x - 4.32).abs() <= 0.05 + 1e-9) && !chaotic.is_empty();
    outcome(
        pass,
        format!(
            "dominant nontrivial exponent reaches zero at gamma {} (target 4.32, tolerance 0.05); positive on [4.55, 4.6] at {}",
            fmt_opt(locus),
            chaotic.join(" ")
        ),
    )
}

fn c9_cannibalism() -> Check {
    let data =
        sweep(&[("model", "cannibalism"), ("param", "log_gamma"), ("start", "2"), ("stop", "3"), ("step", "0.02")])?;
    let g: Vec<f64> = data.iter().map(|r| r[0]).collect();
    let l1: Vec<f64> = data.iter().map(|r| r[1]).collect();
    let locus = zero_locus(&g, &l1);
    let hopf = 1.0 + PI / 2.0;
    outcome(
        locus.is_some_and(|x| (x - hopf).abs() <= 0.05 + 1e-9),
        format!(
            "lambda1 reaches zero at log gamma {} (Hopf {hopf:.4}, tolerance 0.05); first positive value at {}",
            fmt_opt(locus),
            fmt_opt(first_positive(&g, &l1))
        ),
    )
}

fn c10_daphnia() -> Check {
    let data = sweep(&[
        ("model", "daphnia"),
        ("a_mat", "3"),
        ("a_max", "4"),
        ("r", "1"),
        ("K", "1"),
        ("gamma", "1"),
        ("param", "beta"),
        ("start", "0.5"),
        ("stop", "1.5"),
        ("step", "0.05"),
    ])?;
    let b: Vec<f64> = data.iter().map(|r| r[0]).collect();
    let l1: Vec<f64> = data.iter().map(|r| r[1]).collect();
    let peaks: Vec<(f64, f64)> =
        (1..l1.len() - 1).filter(|&i| l1[i] > l1[i - 1] && l1[i] > l1[i + 1]).map(|i| (b[i], l1[i])).collect();
    let hit = peaks.iter().find(|(x, v)| (x - 1.0).abs() <= 0.05 + 1e-9 && *v < 0.0);
    outcome(hit.is_some(), format!("local maxima of lambda1 (beta, value): {peaks:?}"))
}

fn c11_properties() -> Check {
    let suites: [(&str, fn() -> props::SuiteResult); 4] = [
        ("qr", props::qr_suite),
        ("spectral", props::spectral_suite),
        ("equilibria", props::equilibrium_suite),
        ("jacobian", props::jacobian_suite),
    ];
    let mut failures = Vec::new();
    for (name, suite) in suites {
        if let Err(e) = suite() {
            failures.push(format!("{name}: {e}"));
        }
    }
    let pass = failures.is_empty();
    outcome(pass, if pass { "qr, spectral, equilibria, jacobian suites pass".into() } else { failures.join("; ") })
}

fn main() {
    let criteria: Vec<(u32, &str, Duration, Box<dyn Fn() -> Check>)> = vec![
        (1, "synthetic exactness", Duration::from_secs(5), Box::new(c1_synthetic)),
        (2, "solution fidelity", Duration::from_secs(120), Box::new(c2_solution)),
        (3, "trapezoidal order", Duration::from_secs(120), Box::new(c3_trapezoid)),
        (4, "equilibrium exponents, gamma=0.5", Duration::from_secs(300), Box::new(|| c4_equilibrium("0.5"))),
        (4, "equilibrium exponents, gamma=3", Duration::from_secs(300), Box::new(|| c4_equilibrium("3"))),
        (5, "linear convergence in 1/T", Duration::MAX, Box::new(c5_convergence)),
        (6, "trivial Floquet exponent", Duration::MAX, Box::new(c6_trivial)),
        (7, "Hopf detection", Duration::MAX, Box::new(c7_hopf)),
        (8, "period-doubling locus", Duration::MAX, Box::new(c8_period_doubling)),
        (9, "cannibalism Hopf", Duration::MAX, Box::new(c9_cannibalism)),
        (10, "Daphnia transcritical signature", Duration::MAX, Box::new(c10_daphnia)),
        (11, "property suites", Duration::from_secs(60), Box::new(c11_properties)),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) if elapsed > budget => (false, format!("{} [over budget {:?}]", o.detail, budget)),
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {id:>2} {name}: {detail} ({:.2} s)",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
