//! Dormand–Prince 5(4) integration with the pair's native continuous
//! extension.
//!
//! The right-hand side writes `dy/dt` into a caller-provided buffer:
//! `rhs(t, y, dydt)`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("step size underflow at t = {t} (h = {h:e}); the problem may be stiff or blowing up")]
    StepUnderflow { t: f64, h: f64 },
    #[error("right-hand side returned a non-finite value at t = {t}")]
    NonFiniteRhs { t: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("time {t} outside the integration range [{t0}, {tf}]")]
    OutOfRange { t: f64, t0: f64, tf: f64 },
}

pub const DEFAULT_RTOL: f64 = 1e-6;
pub const DEFAULT_ATOL: f64 = 1e-7;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b̂ (fifth minus embedded fourth order weights)
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Continuous extension.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Abscissae of the seven stages as fractions of the step.
pub const STAGE_NODES: [f64; 7] = C;

/// Workspace for single Dormand–Prince steps.
///
/// After [`DpStepper::step`], `y5` holds the propagated fifth-order
/// solution, `y4` the embedded fourth-order one and `k[6]` the derivative
/// at the new point.
#[derive(Debug, Clone)]
pub struct DpStepper {
    pub k: [Vec<f64>; 7],
    pub y5: Vec<f64>,
    pub y4: Vec<f64>,
    stage: Vec<f64>,
}

impl DpStepper {
    pub fn new(n: usize) -> Self {
        DpStepper {
            k: std::array::from_fn(|_| vec![0.0; n]),
            y5: vec![0.0; n],
            y4: vec![0.0; n],
            stage: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.y5.len()
    }

    /// One step of size `h` from `(t, y)`. When `k1_ready` is set, `k[0]`
    /// must already contain `f(t, y)`.
    pub fn step<F>(&mut self, rhs: &mut F, t: f64, y: &[f64], h: f64, k1_ready: bool) -> Result<(), IntegrationError>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        let n = y.len();
        debug_assert_eq!(n, self.dim());
        let [k1, k2, k3, k4, k5, k6, k7] = &mut self.k;
        if !k1_ready {
            rhs(t, y, k1);
            check_finite(k1, t)?;
        }
        let s = &mut self.stage;
        for i in 0..n {
            s[i] = y[i] + h * A21 * k1[i];
        }
        rhs(t + C[1] * h, s, k2);
        check_finite(k2, t)?;
        for i in 0..n {
            s[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        rhs(t + C[2] * h, s, k3);
        check_finite(k3, t)?;
        for i in 0..n {
            s[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        rhs(t + C[3] * h, s, k4);
        check_finite(k4, t)?;
        for i in 0..n {
            s[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        rhs(t + C[4] * h, s, k5);
        check_finite(k5, t)?;
        for i in 0..n {
            s[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        rhs(t + h, s, k6);
        check_finite(k6, t)?;
        for i in 0..n {
            self.y5[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
        }
        rhs(t + h, &self.y5, k7);
        check_finite(k7, t)?;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            self.y4[i] = self.y5[i] - e;
        }
        Ok(())
    }

    /// Continuous-extension coefficients `(r2, r3, r4, r5)` of the last step,
    /// appended to `out`.
    fn dense_coefficients(&self, y: &[f64], h: f64, out: &mut Vec<f64>) {
        let n = y.len();
        let [k1, _, k3, k4, k5, k6, k7] = &self.k;
        let start = out.len();
        out.resize(start + 4 * n, 0.0);
        let (r2, rest) = out[start..].split_at_mut(n);
        let (r3, rest) = rest.split_at_mut(n);
        let (r4, r5) = rest.split_at_mut(n);
        for i in 0..n {
            let ydiff = self.y5[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            r2[i] = ydiff;
            r3[i] = bspl;
            r4[i] = ydiff - h * k7[i] - bspl;
            r5[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
    }
}

fn check_finite(v: &[f64], t: f64) -> Result<(), IntegrationError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(IntegrationError::NonFiniteRhs { t })
    }
}

/// Scaled RMS norm of `err` with weights `atol + rtol * max(|y0|, |y1|)`.
fn error_norm(err: impl Iterator<Item = f64>, y0: &[f64], y1: &[f64], rtol: f64, atol: f64) -> f64 {
    let n = y0.len().max(1);
    let sum: f64 = err
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let sk = atol + rtol * a.abs().max(b.abs());
            (e / sk) * (e / sk)
        })
        .sum();
    (sum / n as f64).sqrt()
}

/// Initial value problem `y' = rhs(t, y)`, `y(t0) = y0` on `[t0, tf]`.
pub struct IvpProblem<F> {
    pub rhs: F,
    pub t0: f64,
    pub tf: f64,
    pub y0: Vec<f64>,
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size; `None` means `tf - t0`.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl<F> IvpProblem<F>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    pub fn new(rhs: F, t0: f64, tf: f64, y0: Vec<f64>) -> Self {
        IvpProblem { rhs, t0, tf, y0, rtol: DEFAULT_RTOL, atol: DEFAULT_ATOL, max_step: None, max_steps: 50_000_000 }
    }

    pub fn tolerances(mut self, rtol: f64, atol: f64) -> Self {
        self.rtol = rtol;
        self.atol = atol;
        self
    }

    pub fn max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.t0.is_finite() && self.tf.is_finite() && self.tf > self.t0) {
            return Err(IntegrationError::InvalidProblem(format!("need tf > t0, got [{}, {}]", self.t0, self.tf)));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(IntegrationError::InvalidProblem("tolerances must be positive".into()));
        }
        if self.y0.iter().any(|x| !x.is_finite()) {
            return Err(IntegrationError::InvalidProblem("non-finite initial state".into()));
        }
        Ok(())
    }
}

/// Dense-output solution of an IVP.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    // Four coefficient vectors (r2..r5) per step.
    dense: Vec<f64>,
}

impl Trajectory {
    fn new(t0: f64, y0: &[f64]) -> Self {
        Trajectory { dim: y0.len(), times: vec![t0], states: y0.to_vec(), dense: Vec::new() }
    }

    /// Stationary trajectory `y(t) ≡ y` on `[t0, tf]`.
    pub fn constant(t0: f64, tf: f64, y: &[f64]) -> Result<Self, IntegrationError> {
        if !(t0.is_finite() && tf.is_finite() && tf > t0) {
            return Err(IntegrationError::InvalidProblem(format!("invalid interval [{t0}, {tf}]")));
        }
        let mut traj = Trajectory::new(t0, y);
        traj.times.push(tf);
        traj.states.extend_from_slice(y);
        traj.dense.resize(4 * y.len(), 0.0);
        Ok(traj)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Accepted step times, starting with `t0` and ending with `tf`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn tf(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one point")
    }

    pub fn num_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn final_state(&self) -> &[f64] {
        self.state(self.times.len() - 1)
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>, IntegrationError> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    /// Writes the dense-output value at `t` into `out`. Stored step times
    /// return the stored state exactly.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<(), IntegrationError> {
        let (t0, tf) = (self.t0(), self.tf());
        if !(t >= t0 && t <= tf) {
            return Err(IntegrationError::OutOfRange { t, t0, tf });
        }
        let idx = self.times.partition_point(|&x| x <= t);
        let i = idx - 1;
        if self.times[i] == t {
            out.copy_from_slice(self.state(i));
            return Ok(());
        }
        let h = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / h;
        let s1 = 1.0 - s;
        let n = self.dim;
        let base = 4 * n * i;
        let r = &self.dense[base..base + 4 * n];
        let y = self.state(i);
        for j in 0..n {
            out[j] = y[j] + s * (r[j] + s1 * (r[n + j] + s * (r[2 * n + j] + s1 * r[3 * n + j])));
        }
        Ok(())
    }
}

/// Evaluates a trajectory (free-function form of [`Trajectory::eval`]).
pub fn trajectory_eval(traj: &Trajectory, t: f64) -> Result<Vec<f64>, IntegrationError> {
    traj.eval(t)
}

/// Per-step summary handed to observers while integrating.
struct AcceptedStep<'a> {
    t_old: f64,
    t_new: f64,
    y_old: &'a [f64],
    stepper: &'a DpStepper,
}

impl AcceptedStep<'_> {
    fn eval(&self, t: f64, out: &mut [f64]) {
        let h = self.t_new - self.t_old;
        let s = (t - self.t_old) / h;
        let s1 = 1.0 - s;
        let mut coeffs = Vec::with_capacity(4 * out.len());
        self.stepper.dense_coefficients(self.y_old, h, &mut coeffs);
        let n = out.len();
        for j in 0..n {
            out[j] = self.y_old[j]
                + s * (coeffs[j] + s1 * (coeffs[n + j] + s * (coeffs[2 * n + j] + s1 * coeffs[3 * n + j])));
        }
    }
}

enum StepMode {
    Adaptive,
    Fixed(f64),
}

fn drive<F, O>(p: &mut IvpProblem<F>, mode: StepMode, mut observe: O) -> Result<(), IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    O: FnMut(&AcceptedStep<'_>),
{
    p.validate()?;
    let n = p.y0.len();
    let (t0, tf) = (p.t0, p.tf);
    let span = tf - t0;
    let max_step = p.max_step.unwrap_or(span).min(span);
    let min_step = 1e-12 * span;
    let mut stepper = DpStepper::new(n);
    let mut y = p.y0.clone();
    let mut t = t0;
    (p.rhs)(t, &y, &mut stepper.k[0]);
    check_finite(&stepper.k[0], t)?;

    let mut h = match mode {
        StepMode::Fixed(h) => {
            if !(h > 0.0) {
                return Err(IntegrationError::InvalidProblem("fixed step must be positive".into()));
            }
            h
        }
        StepMode::Adaptive => initial_step(&mut p.rhs, t0, &y, &stepper.k[0], p.rtol, p.atol).min(max_step),
    };
    let mut rejected_last = false;
    let mut steps = 0usize;
    while t < tf {
        if steps >= p.max_steps {
            return Err(IntegrationError::TooManySteps(p.max_steps));
        }
        let mut last = false;
        let mut h_try = h.min(max_step);
        if t + h_try >= tf || (tf - (t + h_try)) < 1e-12 * span {
            h_try = tf - t;
            last = true;
        }
        stepper.step(&mut p.rhs, t, &y, h_try, true)?;
        let err = match mode {
            StepMode::Fixed(_) => 0.0,
            StepMode::Adaptive => error_norm(
                stepper.y5.iter().zip(&stepper.y4).map(|(a, b)| a - b),
                &y,
                &stepper.y5,
                p.rtol,
                p.atol,
            ),
        };
        if !err.is_finite() || stepper.y5.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::NonFiniteRhs { t });
        }
        if err <= 1.0 {
            let t_new = if last { tf } else { t + h_try };
            observe(&AcceptedStep { t_old: t, t_new, y_old: &y, stepper: &stepper });
            t = t_new;
            y.copy_from_slice(&stepper.y5);
            let (head, tail) = stepper.k.split_at_mut(6);
            head[0].copy_from_slice(&tail[0]);
            steps += 1;
            if let StepMode::Adaptive = mode {
                let mut fac = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR);
                if rejected_last {
                    fac = fac.min(1.0);
                }
                // A clipped final step says nothing about the natural step length.
                if !last {
                    h = h_try * fac;
                }
            }
            rejected_last = false;
        } else {
            let fac = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            h = h_try * fac;
            rejected_last = true;
            if h < min_step {
                return Err(IntegrationError::StepUnderflow { t, h });
            }
        }
    }
    Ok(())
}

// Automatic initial step (Hairer, Nørsett & Wanner, II.4).
fn initial_step<F>(rhs: &mut F, t0: f64, y0: &[f64], f0: &[f64], rtol: f64, atol: f64) -> f64
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let sk: Vec<f64> = y0.iter().map(|y| atol + rtol * y.abs()).collect();
    let norm = |v: &[f64]| -> f64 {
        (v.iter().zip(&sk).map(|(x, s)| (x / s) * (x / s)).sum::<f64>() / v.len().max(1) as f64).sqrt()
    };
    let d0 = norm(y0);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
    let mut f1 = vec![0.0; y0.len()];
    rhs(t0 + h0, &y1, &mut f1);
    let diff: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = norm(&diff) / h0;
    let dmax = d1.max(d2);
    if !(dmax > 1e-15) {
        // Stationary start: let the step controller and clipping decide.
        return f64::INFINITY;
    }
    (100.0 * h0).min((0.01 / dmax).powf(0.2))
}

/// Adaptive integration over `[t0, tf]` keeping every step for dense output.
pub fn integrate<F>(mut p: IvpProblem<F>) -> Result<Trajectory, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut traj = Trajectory::new(p.t0, &p.y0);
    drive(&mut p, StepMode::Adaptive, |step| {
        step.stepper.dense_coefficients(step.y_old, step.t_new - step.t_old, &mut traj.dense);
        traj.times.push(step.t_new);
        traj.states.extend_from_slice(&step.stepper.y5);
    })?;
    Ok(traj)
}

/// Fixed-step integration with the fifth-order solution (no error control).
/// The last step is clipped to land on `tf`.
pub fn integrate_fixed_step<F>(mut p: IvpProblem<F>, h: f64) -> Result<Trajectory, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let mut traj = Trajectory::new(p.t0, &p.y0);
    drive(&mut p, StepMode::Fixed(h), |step| {
        step.stepper.dense_coefficients(step.y_old, step.t_new - step.t_old, &mut traj.dense);
        traj.times.push(step.t_new);
        traj.states.extend_from_slice(&step.stepper.y5);
    })?;
    Ok(traj)
}

/// Single adaptive pass reporting the dense-output solution at the given
/// increasing observation times, without storing the whole trajectory.
pub fn integrate_fixed_observer<F>(mut p: IvpProblem<F>, observation_times: &[f64]) -> Result<Vec<Vec<f64>>, IntegrationError>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    if observation_times.is_empty() {
        return Ok(Vec::new());
    }
    let (t0, tf) = (p.t0, p.tf);
    for w in observation_times.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(IntegrationError::InvalidProblem("observation times must be increasing".into()));
        }
    }
    for &t in [observation_times[0], observation_times[observation_times.len() - 1]].iter() {
        if !(t >= t0 && t <= tf) {
            return Err(IntegrationError::OutOfRange { t, t0, tf });
        }
    }
    let n = p.y0.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(observation_times.len());
    let mut next = 0;
    while next < observation_times.len() && observation_times[next] == t0 {
        out.push(p.y0.clone());
        next += 1;
    }
    if next == observation_times.len() {
        return Ok(out);
    }
    drive(&mut p, StepMode::Adaptive, |step| {
        while next < observation_times.len() && observation_times[next] <= step.t_new {
            let t = observation_times[next];
            let mut y = vec![0.0; n];
            if t == step.t_new {
                y.copy_from_slice(&step.stepper.y5);
            } else {
                step.eval(t, &mut y);
            }
            out.push(y);
            next += 1;
        }
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = -y[0];
    }

    fn rotation(_t: f64, y: &[f64], dy: &mut [f64]) {
        dy[0] = y[1];
        dy[1] = -y[0];
    }

    #[test]
    fn exponential_decay() {
        let traj = integrate(IvpProblem::new(decay, 0.0, 1.0, vec![1.0]).tolerances(1e-6, 1e-7)).unwrap();
        assert_eq!(traj.tf(), 1.0);
        assert!((traj.final_state()[0] - (-1.0f64).exp()).abs() < 1e-7);
        assert_eq!(traj.eval(0.0).unwrap(), vec![1.0]);
        assert!((traj.eval(0.5).unwrap()[0] - (-0.5f64).exp()).abs() < 1e-6);
        for (i, &t) in traj.times().iter().enumerate() {
            assert_eq!(traj.eval(t).unwrap(), traj.state(i));
        }
    }

    #[test]
    fn constant_solution_takes_few_steps() {
        let traj = integrate(IvpProblem::new(|_t, _y: &[f64], dy: &mut [f64]| dy[0] = 0.0, 0.0, 10.0, vec![2.5])).unwrap();
        assert!(traj.num_steps() <= 3, "{} steps", traj.num_steps());
        assert_eq!(traj.final_state(), &[2.5]);
    }

    #[test]
    fn rotation_full_period() {
        let traj = integrate(IvpProblem::new(rotation, 0.0, 2.0 * PI, vec![1.0, 0.0])).unwrap();
        let y = traj.final_state();
        assert!((y[0] - 1.0).abs() < 1e-5 && y[1].abs() < 1e-5);
    }

    #[test]
    fn eval_out_of_range() {
        let traj = integrate(IvpProblem::new(decay, 0.0, 1.0, vec![1.0])).unwrap();
        assert!(matches!(traj.eval(1.5), Err(IntegrationError::OutOfRange { .. })));
        assert!(matches!(traj.eval(-0.1), Err(IntegrationError::OutOfRange { .. })));
    }

    #[test]
    fn observer_cases() {
        let obs = integrate_fixed_observer(IvpProblem::new(decay, 0.0, 1.0, vec![1.0]), &[0.0]).unwrap();
        assert_eq!(obs, vec![vec![1.0]]);
        let obs = integrate_fixed_observer(IvpProblem::new(decay, 0.0, 1.0, vec![1.0]), &[]).unwrap();
        assert!(obs.is_empty());
        let obs = integrate_fixed_observer(IvpProblem::new(decay, 0.0, 1.0, vec![1.0]), &[0.0, 0.5, 1.0]).unwrap();
        for (y, t) in obs.iter().zip([0.0f64, 0.5, 1.0]) {
            assert!((y[0] - (-t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        // y' = y^2 from y(0) = 1 blows up at t = 1.
        let res = integrate(IvpProblem::new(|_t, y: &[f64], dy: &mut [f64]| dy[0] = y[0] * y[0], 0.0, 2.0, vec![1.0]));
        match res {
            Err(IntegrationError::StepUnderflow { t, .. }) => assert!((t - 1.0).abs() < 1e-2),
            Err(IntegrationError::NonFiniteRhs { t }) => assert!((t - 1.0).abs() < 1e-2),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn nonfinite_rhs_is_reported() {
        let res = integrate(IvpProblem::new(|_t, _y: &[f64], dy: &mut [f64]| dy[0] = f64::NAN, 0.0, 1.0, vec![1.0]));
        assert!(matches!(res, Err(IntegrationError::NonFiniteRhs { .. })));
    }

    #[test]
    fn invalid_problems() {
        assert!(integrate(IvpProblem::new(decay, 1.0, 1.0, vec![1.0])).is_err());
        assert!(integrate(IvpProblem::new(decay, 0.0, 1.0, vec![1.0]).tolerances(0.0, 1e-7)).is_err());
    }
}
