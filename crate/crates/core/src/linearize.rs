//! Coefficient matrix `A(t)` of the variational equation `z' = A(t) z`.

use thiserror::Error;

use crate::discretize::DiscreteSystem;
use crate::linalg::Matrix;
use crate::odeint::{integrate, IntegrationError, IvpProblem, Trajectory, DEFAULT_ATOL, DEFAULT_RTOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinearizeError {
    #[error("time {t} outside reference range [{t0}, {tf}]")]
    OutOfRange { t: f64, t0: f64, tf: f64 },
    #[error("non-finite right-hand side near the reference state")]
    NonFinite,
    #[error("reference dimension {got} does not match system dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

/// A time-dependent `n × n` coefficient matrix defined on a time window.
pub trait CoefficientMatrix: Sync {
    fn dim(&self) -> usize;

    /// Interval on which `A(t)` may be queried.
    fn coverage(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn eval_into(&self, t: f64, out: &mut Matrix) -> Result<(), LinearizeError>;

    fn eval(&self, t: f64) -> Result<Matrix, LinearizeError> {
        let mut a = Matrix::zeros(self.dim(), self.dim());
        self.eval_into(t, &mut a)?;
        Ok(a)
    }
}

/// `A(t) ≡ B`.
#[derive(Debug, Clone)]
pub struct ConstantCoefficients(pub Matrix);

impl CoefficientMatrix for ConstantCoefficients {
    fn dim(&self) -> usize {
        self.0.rows()
    }

    fn eval_into(&self, _t: f64, out: &mut Matrix) -> Result<(), LinearizeError> {
        out.as_mut_slice().copy_from_slice(self.0.as_slice());
        Ok(())
    }
}

/// `A(t)` given by a closure filling a matrix.
pub struct FnCoefficients<F> {
    n: usize,
    f: F,
}

impl<F: Fn(f64, &mut Matrix) + Sync> FnCoefficients<F> {
    pub fn new(n: usize, f: F) -> Self {
        FnCoefficients { n, f }
    }
}

impl<F: Fn(f64, &mut Matrix) + Sync> CoefficientMatrix for FnCoefficients<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_into(&self, t: f64, out: &mut Matrix) -> Result<(), LinearizeError> {
        (self.f)(t, out);
        Ok(())
    }
}

/// Linearization of a collocated system along a reference trajectory.
#[derive(Debug, Clone)]
pub struct VariationalSystem {
    system: DiscreteSystem,
    reference: Trajectory,
}

/// Pairs `system` with a trajectory of its own right-hand side.
pub fn linearize_along(system: DiscreteSystem, reference: Trajectory) -> Result<VariationalSystem, LinearizeError> {
    if reference.dim() != system.dim() {
        return Err(LinearizeError::Dimension { expected: system.dim(), got: reference.dim() });
    }
    Ok(VariationalSystem { system, reference })
}

impl VariationalSystem {
    pub fn system(&self) -> &DiscreteSystem {
        &self.system
    }

    pub fn reference(&self) -> &Trajectory {
        &self.reference
    }

    /// Reference state at `t`.
    pub fn state(&self, t: f64) -> Result<Vec<f64>, LinearizeError> {
        self.check(t)?;
        Ok(self.reference.eval(t)?)
    }

    fn check(&self, t: f64) -> Result<(), LinearizeError> {
        let (t0, tf) = (self.reference.t0(), self.reference.tf());
        if !(t >= t0 && t <= tf) {
            return Err(LinearizeError::OutOfRange { t, t0, tf });
        }
        Ok(())
    }
}

impl CoefficientMatrix for VariationalSystem {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn coverage(&self) -> (f64, f64) {
        (self.reference.t0(), self.reference.tf())
    }

    fn eval_into(&self, t: f64, out: &mut Matrix) -> Result<(), LinearizeError> {
        self.check(t)?;
        let mut w = vec![0.0; self.dim()];
        self.reference.eval_into(t, &mut w)?;
        self.system.jacobian_into(t, &w, out);
        Ok(())
    }
}

/// How to build the reference trajectory for an exponent run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    /// Length of the discarded transient.
    pub transient: f64,
    /// Length of the kept window `[0, horizon]`.
    pub horizon: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions { transient: 200.0, horizon: 1000.0 + REFERENCE_MARGIN, rtol: DEFAULT_RTOL, atol: DEFAULT_ATOL }
    }
}

/// Extra coverage past the truncation time, since the exponent loop stops
/// at the first step beyond it.
pub const REFERENCE_MARGIN: f64 = 50.0;

/// Integrates the nonlinear system from `w0` for `opts.transient`, discards
/// that part, and returns the trajectory over `[0, opts.horizon]`.
pub fn reference_trajectory(system: &DiscreteSystem, w0: &[f64], opts: ReferenceOptions) -> Result<Trajectory, LinearizeError> {
    if w0.len() != system.dim() {
        return Err(LinearizeError::Dimension { expected: system.dim(), got: w0.len() });
    }
    let rhs = |t: f64, w: &[f64], out: &mut [f64]| system.rhs(t, w, out);
    let start = if opts.transient > 0.0 {
        let tr = integrate(IvpProblem::new(rhs, 0.0, opts.transient, w0.to_vec()).tolerances(opts.rtol, opts.atol))?;
        tr.final_state().to_vec()
    } else {
        w0.to_vec()
    };
    Ok(integrate(IvpProblem::new(rhs, 0.0, opts.horizon, start).tolerances(opts.rtol, opts.atol))?)
}

/// Central-difference Jacobian of `system.rhs` with steps
/// `h_i = 1e-6 · max(1, |w_i|)`.
pub fn fd_jacobian(system: &DiscreteSystem, t: f64, w: &[f64]) -> Result<Matrix, LinearizeError> {
    let n = system.dim();
    if w.len() != n {
        return Err(LinearizeError::Dimension { expected: n, got: w.len() });
    }
    let mut jac = Matrix::zeros(n, n);
    let mut wp = w.to_vec();
    let mut fp = vec![0.0; n];
    let mut fm = vec![0.0; n];
    for j in 0..n {
        let h = 1e-6 * w[j].abs().max(1.0);
        wp[j] = w[j] + h;
        system.rhs(t, &wp, &mut fp);
        wp[j] = w[j] - h;
        system.rhs(t, &wp, &mut fm);
        wp[j] = w[j];
        for i in 0..n {
            let d = (fp[i] - fm[i]) / (2.0 * h);
            if !d.is_finite() {
                return Err(LinearizeError::NonFinite);
            }
            jac.row_mut(i)[j] = d;
        }
    }
    Ok(jac)
}
