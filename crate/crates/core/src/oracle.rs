//! Independent reference computations: eigenvalues at equilibria, Floquet
//! multipliers of periodic orbits and a second-order trapezoidal solver for
//! renewal equations.

use num_complex::Complex64;
use thiserror::Error;

use crate::discretize::DiscreteSystem;
use crate::dqr::sort_descending;
use crate::linalg::{eigenvalues, matmul_into, LinalgError, Matrix};
use crate::linearize::{CoefficientMatrix, LinearizeError};
use crate::models::ReModel;
use crate::odeint::{integrate_fixed_observer, IntegrationError, IvpProblem};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("state is not an equilibrium (residual {residual:e})")]
    NotEquilibrium { residual: f64 },
    #[error("grid step {h} does not divide the maximal delay {tau2}")]
    IncompatibleGrid { h: f64, tau2: f64 },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error(transparent)]
    Coefficients(#[from] LinearizeError),
}

/// Residual bound accepted by [`equilibrium_les`].
pub const EQUILIBRIUM_RESIDUAL: f64 = 1e-8;

/// Relative size below which a multiplier counts as zero.
pub const ZERO_MULTIPLIER: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Eigenvalues `λ` of a generator; exponents are `Re λ`.
    Generator,
    /// Multipliers `μ = e^{λh}`; exponents are `ln|μ| / h`.
    Multipliers,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub kind: SpectrumKind,
    pub values: Vec<Complex64>,
    /// Sorted in descending order; zero multipliers give `−∞`.
    pub exponents: Vec<f64>,
    /// Time step of the multipliers (`None` for generators).
    pub step: Option<f64>,
    /// Number of multipliers treated as zero.
    pub zero_multipliers: usize,
}

impl SpectrumResult {
    pub fn from_generator(values: Vec<Complex64>) -> Self {
        let exponents = sort_descending(values.iter().map(|z| z.re).collect());
        SpectrumResult { kind: SpectrumKind::Generator, values, exponents, step: None, zero_multipliers: 0 }
    }

    /// Exponents `Re(log μ)/h` of the multipliers `μ` over a step `h`.
    pub fn from_multipliers(values: Vec<Complex64>, h: f64) -> Self {
        let scale = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut zeros = 0;
        let exps = values
            .iter()
            .map(|z| {
                let m = z.norm();
                if m <= ZERO_MULTIPLIER * scale || m == 0.0 {
                    zeros += 1;
                    f64::NEG_INFINITY
                } else {
                    m.ln() / h
                }
            })
            .collect();
        SpectrumResult {
            kind: SpectrumKind::Multipliers,
            values,
            exponents: sort_descending(exps),
            step: Some(h),
            zero_multipliers: zeros,
        }
    }

    pub fn dominant(&self) -> f64 {
        self.exponents[0]
    }

    /// Multiplier closest to `target`.
    pub fn closest_value(&self, target: Complex64) -> Option<Complex64> {
        self.values.iter().copied().min_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()))
    }
}

/// Exponents at an equilibrium: real parts of the eigenvalues of the
/// collocated Jacobian.
pub fn equilibrium_les(system: &DiscreteSystem, equilibrium: &[f64]) -> Result<SpectrumResult, OracleError> {
    if equilibrium.len() != system.dim() {
        return Err(OracleError::Argument(format!(
            "state has length {}, system dimension is {}",
            equilibrium.len(),
            system.dim()
        )));
    }
    let residual = system.rhs_vec(0.0, equilibrium).iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !(residual <= EQUILIBRIUM_RESIDUAL) {
        return Err(OracleError::NotEquilibrium { residual });
    }
    let jac = system.jacobian(0.0, equilibrium);
    Ok(SpectrumResult::from_generator(eigenvalues(&jac)?))
}

/// Floquet exponents from the monodromy matrix over `[t0, t0 + period]`,
/// integrated at `rtol = 1e-9`.
pub fn floquet_les<A: CoefficientMatrix + ?Sized>(gen: &A, t0: f64, period: f64) -> Result<SpectrumResult, OracleError> {
    let monodromy = monodromy_matrix(gen, t0, period)?;
    Ok(SpectrumResult::from_multipliers(eigenvalues(&monodromy)?, period))
}

/// `Φ(t0 + period)` for `Φ' = A(t) Φ`, `Φ(t0) = I`.
pub fn monodromy_matrix<A: CoefficientMatrix + ?Sized>(gen: &A, t0: f64, period: f64) -> Result<Matrix, OracleError> {
    if !(period > 0.0) {
        return Err(OracleError::Argument(format!("period must be positive, got {period}")));
    }
    let n = gen.dim();
    let mut a = Matrix::zeros(n, n);
    let mut failure = None;
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        if let Err(e) = gen.eval_into(t, &mut a) {
            failure.get_or_insert(e);
            dy.iter_mut().for_each(|d| *d = f64::NAN);
            return;
        }
        matmul_into(&a, y, n, dy);
    };
    let y0 = Matrix::identity(n).into_vec();
    let result = integrate_fixed_observer(IvpProblem::new(rhs, t0, t0 + period, y0).tolerances(1e-9, 1e-12), &[t0 + period]);
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mut out = result?;
    Ok(Matrix::from_row_major(n, n, out.pop().expect("one observation"))?)
}

/// Solution of the trapezoidal scheme on the uniform grid `t_m = m h`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapezoidalSolution {
    pub h: f64,
    /// `x(t_m)` for `m = 0, …, N`; `values[0]` is the initial function at 0.
    pub values: Vec<f64>,
}

impl TrapezoidalSolution {
    pub fn time(&self, m: usize) -> f64 {
        m as f64 * self.h
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.values.len()).map(|m| self.time(m)).collect()
    }
}

/// Explicit trapezoidal scheme with step `h = τ1 / r`:
/// `x_m = h [½ f(x_{m−r}) + Σ_{i=r+1}^{k−1} f(x_{m−i}) + ½ f(x_{m−k})]`,
/// `k = τ2 / h`, with `x_j = phi(j h)` for `j ≤ 0`.
pub fn trapezoidal_re_solve(
    model: &ReModel,
    r: usize,
    phi: &dyn Fn(f64) -> f64,
    t_final: f64,
) -> Result<TrapezoidalSolution, OracleError> {
    if r == 0 {
        return Err(OracleError::Argument("nodes per τ1 must be positive".into()));
    }
    if !(t_final > 0.0) {
        return Err(OracleError::Argument(format!("final time must be positive, got {t_final}")));
    }
    let h = model.tau1 / r as f64;
    let ratio = model.tau2 / h;
    let k = ratio.round();
    if !(h > 0.0) || (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
        return Err(OracleError::IncompatibleGrid { h, tau2: model.tau2 });
    }
    let k = k as usize;
    let steps = (t_final / h).ceil() as usize;
    // fx[j] = f(x_{j − k}) for j = 0..; history indices −k..=0 first.
    let mut fx: Vec<f64> = Vec::with_capacity(k + steps + 1);
    for j in 0..=k {
        fx.push(model.f.eval(phi((j as f64 - k as f64) * h)));
    }
    let mut values = Vec::with_capacity(steps + 1);
    values.push(phi(0.0));
    for m in 1..=steps {
        let at = |i: usize| fx[k + m - i];
        let mut s = 0.5 * (at(r) + at(k));
        for i in (r + 1)..k {
            s += at(i);
        }
        let x = h * s;
        values.push(x);
        fx.push(model.f.eval(x));
    }
    Ok(TrapezoidalSolution { h, values })
}
