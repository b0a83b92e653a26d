//! Renewal, delay and coupled models of the prototype forms
//!
//! ```text
//! RE:       x(t) = ∫_{-τ2}^{-τ1} f(x(t+θ)) dθ
//! coupled:  x(t) = y(t) ∫_{-τ2}^{-τ1} f1(x(t+θ)) dθ
//!           y'(t) = g(y(t)) + y(t) ∫_{-τ2}^{-τ1} f2(x(t+θ)) dθ
//! ```
//!
//! together with a DDE description built from instantaneous, point-delay
//! and distributed terms. Every nonlinearity carries its analytic
//! derivative.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("delays must satisfy 0 < tau1 < tau2, got tau1 = {tau1}, tau2 = {tau2}")]
    Delays { tau1: f64, tau2: f64 },
    #[error("periodic solution does not exist for gamma = {gamma} (radicand {radicand:e} < 0)")]
    NoPeriodicSolution { gamma: f64, radicand: f64 },
}

type ScalarMap = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar function together with its derivative.
#[derive(Clone)]
pub struct Nonlinearity {
    value: ScalarMap,
    derivative: ScalarMap,
}

impl Nonlinearity {
    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Nonlinearity { value: Arc::new(value), derivative: Arc::new(derivative) }
    }

    /// `x ↦ c·x`.
    pub fn linear(c: f64) -> Self {
        Nonlinearity::new(move |x| c * x, move |_| c)
    }

    pub fn zero() -> Self {
        Nonlinearity::new(|_| 0.0, |_| 0.0)
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    /// Largest discrepancy between the analytic derivative and a central
    /// difference with step `h`, over `points`.
    pub fn derivative_mismatch(&self, points: &[f64], h: f64) -> f64 {
        points
            .iter()
            .map(|&x| (self.deriv(x) - (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)).abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Nonlinearity(..)")
    }
}

/// A known constant solution.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumInfo {
    /// One value per scalar component (`[x]` for an RE, `[x, y]` for a
    /// coupled system, `[y]` for a DDE).
    pub values: Vec<f64>,
    pub label: String,
}

impl EquilibriumInfo {
    fn new(values: Vec<f64>, label: &str) -> Self {
        EquilibriumInfo { values, label: label.to_string() }
    }
}

fn check_delays(tau1: f64, tau2: f64) -> Result<(), ModelError> {
    if !(tau1 > 0.0 && tau2 > tau1 && tau2.is_finite()) {
        return Err(ModelError::Delays { tau1, tau2 });
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<(), ModelError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(ModelError::Parameter(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// Renewal equation `x(t) = ∫_{-τ2}^{-τ1} f(x(t+θ)) dθ`.
#[derive(Debug, Clone)]
pub struct ReModel {
    pub name: String,
    pub tau1: f64,
    pub tau2: f64,
    pub f: Nonlinearity,
    pub equilibria: Vec<EquilibriumInfo>,
}

impl ReModel {
    pub fn new(name: &str, tau1: f64, tau2: f64, f: Nonlinearity) -> Result<Self, ModelError> {
        check_delays(tau1, tau2)?;
        Ok(ReModel { name: name.to_string(), tau1, tau2, f, equilibria: Vec::new() })
    }

    /// `x − (τ2 − τ1) f(x)`, zero exactly at constant solutions.
    pub fn constant_residual(&self, x: f64) -> f64 {
        x - (self.tau2 - self.tau1) * self.f.eval(x)
    }
}

/// Coupled RE/DDE of the prototype form.
#[derive(Debug, Clone)]
pub struct CoupledModel {
    pub name: String,
    pub tau1: f64,
    pub tau2: f64,
    pub f1: Nonlinearity,
    pub f2: Nonlinearity,
    pub g: Nonlinearity,
    pub equilibria: Vec<EquilibriumInfo>,
}

impl CoupledModel {
    pub fn new(
        name: &str,
        tau1: f64,
        tau2: f64,
        f1: Nonlinearity,
        f2: Nonlinearity,
        g: Nonlinearity,
    ) -> Result<Self, ModelError> {
        check_delays(tau1, tau2)?;
        Ok(CoupledModel { name: name.to_string(), tau1, tau2, f1, f2, g, equilibria: Vec::new() })
    }

    /// Residuals of the constant-solution equations for `(x, y)`.
    pub fn constant_residual(&self, x: f64, y: f64) -> [f64; 2] {
        let span = self.tau2 - self.tau1;
        [x - y * span * self.f1.eval(x), self.g.eval(y) + y * span * self.f2.eval(x)]
    }
}

/// Point-delay term `h(y(-delay))`.
#[derive(Debug, Clone)]
pub struct PointDelayTerm {
    pub delay: f64,
    pub h: Nonlinearity,
}

/// Distributed term `∫_{-τ2}^{-τ1} k(y(t+θ)) dθ`.
#[derive(Debug, Clone)]
pub struct DistributedTerm {
    pub tau1: f64,
    pub tau2: f64,
    pub k: Nonlinearity,
}

/// DDE `y'(t) = g(y(t)) + Σ h_i(y(t − σ_i)) + ∫_{-τ2}^{-τ1} k(y(t+θ)) dθ`
/// on the history interval `[-tau, 0]`.
#[derive(Debug, Clone)]
pub struct DdeModel {
    pub name: String,
    pub tau: f64,
    pub instantaneous: Nonlinearity,
    pub point_delays: Vec<PointDelayTerm>,
    pub distributed: Option<DistributedTerm>,
    pub equilibria: Vec<EquilibriumInfo>,
}

impl DdeModel {
    pub fn new(name: &str, tau: f64, instantaneous: Nonlinearity) -> Result<Self, ModelError> {
        check_positive("tau", tau)?;
        Ok(DdeModel {
            name: name.to_string(),
            tau,
            instantaneous,
            point_delays: Vec::new(),
            distributed: None,
            equilibria: Vec::new(),
        })
    }

    pub fn with_point_delay(mut self, delay: f64, h: Nonlinearity) -> Result<Self, ModelError> {
        if !(delay >= 0.0 && delay <= self.tau) {
            return Err(ModelError::Parameter(format!("point delay {delay} outside [0, {}]", self.tau)));
        }
        self.point_delays.push(PointDelayTerm { delay, h });
        Ok(self)
    }

    pub fn with_distributed(mut self, tau1: f64, tau2: f64, k: Nonlinearity) -> Result<Self, ModelError> {
        if !(tau1 >= 0.0 && tau2 > tau1 && tau2 <= self.tau) {
            return Err(ModelError::Delays { tau1, tau2 });
        }
        self.distributed = Some(DistributedTerm { tau1, tau2, k });
        Ok(self)
    }

    /// Right-hand side at a constant history `y`.
    pub fn constant_residual(&self, y: f64) -> f64 {
        let mut r = self.instantaneous.eval(y);
        r += self.point_delays.iter().map(|p| p.h.eval(y)).sum::<f64>();
        if let Some(d) = &self.distributed {
            r += (d.tau2 - d.tau1) * d.k.eval(y);
        }
        r
    }
}

/// RE with quadratic nonlinearity: `τ1 = 1`, `τ2 = 3`, `f(x) = (γ/2) x (1 − x)`.
pub fn quad_re(gamma: f64) -> Result<ReModel, ModelError> {
    check_positive("gamma", gamma)?;
    let c = 0.5 * gamma;
    let f = Nonlinearity::new(move |x| c * x * (1.0 - x), move |x| c * (1.0 - 2.0 * x));
    let mut m = ReModel::new("quad", 1.0, 3.0, f)?;
    m.equilibria.push(EquilibriumInfo::new(vec![0.0], "trivial"));
    m.equilibria.push(EquilibriumInfo::new(vec![(gamma - 1.0) / gamma], "nontrivial"));
    Ok(m)
}

/// Hopf value of `quad_re` at its nontrivial equilibrium.
pub const QUAD_RE_HOPF_GAMMA: f64 = 2.0 + PI / 2.0;

/// Period of the branch of periodic solutions of `quad_re`.
pub const QUAD_RE_PERIOD: f64 = 4.0;

/// Exact periodic solution of `quad_re(γ)` beyond the Hopf point:
/// `1/2 + π/(4γ) + sqrt(1/2 − 1/γ − π/(2γ²)(1 + π/4)) · sin(πt/2)`.
pub fn quad_re_periodic_solution(gamma: f64, t: f64) -> Result<f64, ModelError> {
    let radicand = 0.5 - 1.0 / gamma - PI / (2.0 * gamma * gamma) * (1.0 + PI / 4.0);
    if !(gamma > 0.0) || radicand < 0.0 {
        return Err(ModelError::NoPeriodicSolution { gamma, radicand });
    }
    Ok(0.5 + PI / (4.0 * gamma) + radicand.sqrt() * (0.5 * PI * t).sin())
}

/// Egg cannibalism RE: `τ1 = a_mat`, `τ2 = a_max`, `f(x) = (γ/2) x e^{−x}`.
pub fn cannibalism_re(gamma: f64, a_mat: f64, a_max: f64) -> Result<ReModel, ModelError> {
    check_positive("gamma", gamma)?;
    let c = 0.5 * gamma;
    let f = Nonlinearity::new(move |x| c * x * (-x).exp(), move |x| c * (-x).exp() * (1.0 - x));
    let mut m = ReModel::new("cannibalism", a_mat, a_max, f)?;
    m.equilibria.push(EquilibriumInfo::new(vec![0.0], "trivial"));
    // x = c (a_max − a_mat) x e^{−x}
    let r0 = c * (a_max - a_mat);
    if r0 > 1.0 {
        m.equilibria.push(EquilibriumInfo::new(vec![r0.ln()], "nontrivial"));
    }
    Ok(m)
}

/// Simplified logistic Daphnia model:
/// `f1(x) = βx`, `f2(x) = −γx`, `g(y) = r y (1 − y/K)`.
pub fn logistic_daphnia(beta: f64, r: f64, k: f64, gamma: f64, a_mat: f64, a_max: f64) -> Result<CoupledModel, ModelError> {
    for (name, v) in [("beta", beta), ("r", r), ("K", k), ("gamma", gamma)] {
        check_positive(name, v)?;
    }
    let g = Nonlinearity::new(move |y| r * y * (1.0 - y / k), move |y| r * (1.0 - 2.0 * y / k));
    let mut m = CoupledModel::new("daphnia", a_mat, a_max, Nonlinearity::linear(beta), Nonlinearity::linear(-gamma), g)?;
    let span = a_max - a_mat;
    m.equilibria.push(EquilibriumInfo::new(vec![0.0, 0.0], "trivial"));
    m.equilibria.push(EquilibriumInfo::new(vec![0.0, k], "consumer-free"));
    let s_bar = 1.0 / (beta * span);
    let b_bar = r * (1.0 - s_bar / k) / (gamma * span);
    m.equilibria.push(EquilibriumInfo::new(vec![b_bar, s_bar], "nontrivial"));
    Ok(m)
}

/// Transcritical value `β = 1 / (K (a_max − a_mat))` of the Daphnia model.
pub fn daphnia_transcritical_beta(k: f64, a_mat: f64, a_max: f64) -> f64 {
    1.0 / (k * (a_max - a_mat))
}

/// RE with `f ≡ 0` on `τ1 = 1`, `τ2 = 3`; every solution vanishes for `t > 0`.
pub fn zero_re() -> ReModel {
    let mut m = ReModel::new("zero", 1.0, 3.0, Nonlinearity::zero()).expect("valid delays");
    m.equilibria.push(EquilibriumInfo::new(vec![0.0], "trivial"));
    m
}

/// Linear scalar DDE `y' = a y(t) + b y(t − τ)`.
pub fn linear_dde(a: f64, b: f64, tau: f64) -> Result<DdeModel, ModelError> {
    let mut m = DdeModel::new("linear-dde", tau, Nonlinearity::linear(a))?;
    if b != 0.0 {
        m = m.with_point_delay(tau, Nonlinearity::linear(b))?;
    }
    m.equilibria.push(EquilibriumInfo::new(vec![0.0], "trivial"));
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_points() -> Vec<f64> {
        (0..20).map(|i| -1.5 + 0.19 * i as f64).collect()
    }

    #[test]
    fn quad_re_values() {
        let m = quad_re(4.0).unwrap();
        assert_eq!((m.tau1, m.tau2), (1.0, 3.0));
        assert_eq!(m.f.eval(0.5), 0.5);
        assert_eq!(m.equilibria[1].values, vec![0.75]);
        assert!(quad_re(0.0).is_err());
        assert!(quad_re(-1.0).is_err());
    }

    #[test]
    fn quad_re_periodic_values() {
        let x0 = quad_re_periodic_solution(4.0, 0.0).unwrap();
        assert!((x0 - (0.5 + PI / 16.0)).abs() < 1e-15);
        assert!((x0 - 0.696349540849362).abs() < 1e-12);
        assert!(matches!(quad_re_periodic_solution(3.0, 0.0), Err(ModelError::NoPeriodicSolution { .. })));
    }

    #[test]
    fn cannibalism_values() {
        let gamma = 20.0;
        let m = cannibalism_re(gamma, 1.0, 3.0).unwrap();
        assert_eq!(m.f.eval(0.0), 0.0);
        assert!((m.equilibria[1].values[0] - gamma.ln()).abs() < 1e-14);
        assert!(cannibalism_re(2.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn daphnia_values() {
        assert_eq!(daphnia_transcritical_beta(1.0, 3.0, 4.0), 1.0);
        let m = logistic_daphnia(2.0, 1.0, 1.0, 1.0, 3.0, 4.0).unwrap();
        let cf = m.equilibria.iter().find(|e| e.label == "consumer-free").unwrap();
        assert_eq!(cf.values, vec![0.0, 1.0]);
        let nt = m.equilibria.iter().find(|e| e.label == "nontrivial").unwrap();
        assert!((nt.values[1] - 0.5).abs() < 1e-15);
        assert!((nt.values[0] - 0.5).abs() < 1e-15);
        assert!(logistic_daphnia(1.0, 1.0, 1.0, 1.0, 4.0, 3.0).is_err());
        assert!(logistic_daphnia(-1.0, 1.0, 1.0, 1.0, 3.0, 4.0).is_err());
    }

    #[test]
    fn equilibria_satisfy_constant_equations() {
        for gamma in [0.5, 3.0, 4.0, 4.5] {
            let m = quad_re(gamma).unwrap();
            for e in &m.equilibria {
                assert!(m.constant_residual(e.values[0]).abs() <= 1e-12);
            }
        }
        for log_gamma in [2.0, 2.57, 3.9] {
            let m = cannibalism_re(f64::exp(log_gamma), 1.0, 3.0).unwrap();
            for e in &m.equilibria {
                assert!(m.constant_residual(e.values[0]).abs() <= 1e-12);
            }
        }
        for beta in [0.5, 1.0, 2.0, 3.0] {
            let m = logistic_daphnia(beta, 1.0, 1.0, 1.0, 3.0, 4.0).unwrap();
            for e in &m.equilibria {
                let [r1, r2] = m.constant_residual(e.values[0], e.values[1]);
                assert!(r1.abs() <= 1e-12 && r2.abs() <= 1e-12, "{}: {r1} {r2}", e.label);
            }
        }
    }

    #[test]
    fn analytic_derivatives_match_central_differences() {
        let pts = sample_points();
        let h = 1e-5;
        for m in [quad_re(4.0).unwrap(), cannibalism_re(30.0, 1.0, 3.0).unwrap()] {
            assert!(m.f.derivative_mismatch(&pts, h) <= 1e-5, "{}", m.name);
        }
        let d = logistic_daphnia(1.3, 1.0, 1.0, 1.0, 3.0, 4.0).unwrap();
        for f in [&d.f1, &d.f2, &d.g] {
            assert!(f.derivative_mismatch(&pts, h) <= 1e-5);
        }
    }

    #[test]
    fn periodic_solution_has_period_four() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let t: f64 = rng.random_range(-10.0..10.0);
            let gamma = rng.random_range(3.6..5.0);
            let a = quad_re_periodic_solution(gamma, t).unwrap();
            let b = quad_re_periodic_solution(gamma, t + QUAD_RE_PERIOD).unwrap();
            assert!((a - b).abs() <= 1e-13);
        }
    }
}
