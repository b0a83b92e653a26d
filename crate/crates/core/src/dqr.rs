//! Discrete QR method for Lyapunov exponents of `z' = A(t) z`.
//!
//! Each step propagates the current orthonormal frame `Q_{j-1}` over
//! `[t_{j-1}, t_j]` with one embedded Dormand–Prince step, factors both the
//! fifth- and fourth-order endpoints as `Q R` with positive diagonal, keeps
//! the fifth-order factors and uses the difference of the log-diagonals of
//! the two `R` factors to accept or reject the step and choose the next one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{matmul_into, qr_positive, LinalgError, Matrix};
use crate::linearize::{CoefficientMatrix, LinearizeError};
use crate::odeint::{DpStepper, IntegrationError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DqrError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step size underflow at t = {t} (h = {h})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("propagated frame stayed rank-deficient at t = {t} after {retries} step halvings")]
    RankDeficient { t: f64, retries: usize },
    #[error("coefficient matrix only covers [{t0}, {t1}], need up to {needed}")]
    Coverage { t0: f64, t1: f64, needed: f64 },
    #[error("step limit {0} exceeded")]
    TooManySteps(usize),
    #[error("non-finite propagation at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Coefficients(#[from] LinearizeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Choice of the initial matrix `Z_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialFrame {
    /// Seeded random entries uniform in `[−1, 1]`.
    #[default]
    Random,
    /// Leading columns of the identity. Removes the start-up bias
    /// `ln(|z_ii| / …) / t` when `A` is diagonal.
    Identity,
}

/// Run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DqrConfig {
    /// Truncation time: the run stops at the first `t_k ≥ t_final`.
    pub t_final: f64,
    /// Tolerance on the per-step exponent increments.
    pub le_tol: f64,
    pub initial_step: f64,
    pub seed: u64,
    pub initial_frame: InitialFrame,
    /// Number of leading exponents to track; `None` tracks all `n`.
    pub num_exponents: Option<usize>,
    /// Keep `diag(R_{j,j-1})` and the cumulative sums of every step.
    pub record_history: bool,
    /// Keep every full `R_{j,j-1}` (memory grows as `steps · p²`).
    pub record_factors: bool,
    pub max_steps: usize,
    pub max_halvings: usize,
}

pub const DEFAULT_LE_TOL: f64 = 1e-6;
pub const DEFAULT_SEED: u64 = 20;

impl Default for DqrConfig {
    fn default() -> Self {
        DqrConfig {
            t_final: 1000.0,
            le_tol: DEFAULT_LE_TOL,
            initial_step: 0.01,
            seed: DEFAULT_SEED,
            initial_frame: InitialFrame::Random,
            num_exponents: None,
            record_history: false,
            record_factors: false,
            max_steps: 50_000_000,
            max_halvings: 40,
        }
    }
}

impl DqrConfig {
    pub fn new(t_final: f64) -> Self {
        DqrConfig { t_final, ..Default::default() }
    }

    fn validate(&self, n: usize) -> Result<usize, DqrError> {
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(DqrError::Config(format!("final time must be positive, got {}", self.t_final)));
        }
        if !(self.le_tol > 0.0) {
            return Err(DqrError::Config(format!("exponent tolerance must be positive, got {}", self.le_tol)));
        }
        if !(self.initial_step > 0.0) {
            return Err(DqrError::Config(format!("initial step must be positive, got {}", self.initial_step)));
        }
        if n == 0 {
            return Err(DqrError::Config("system dimension must be at least 1".into()));
        }
        let p = self.num_exponents.unwrap_or(n);
        if p == 0 || p > n {
            return Err(DqrError::Config(format!("number of exponents must lie in 1..={n}, got {p}")));
        }
        Ok(p)
    }
}

/// Result and state of a discrete QR run.
#[derive(Debug, Clone)]
pub struct LyapunovRun {
    /// Re-orthonormalization times `t_0 = 0 < t_1 < … < t_k`.
    pub times: Vec<f64>,
    /// `Σ_j ln [R_{j,j-1}]_{ii}` per column, in column order.
    pub log_sums: Vec<f64>,
    /// `log_sums / t_k`, sorted in descending order.
    pub exponents: Vec<f64>,
    /// Current orthonormal frame `Q_k` (`n × p`).
    pub q: Matrix,
    /// Factor of the initial random matrix, `Z_0 = Q_0 R_0`.
    pub r0: Matrix,
    pub z0: Matrix,
    /// `diag(R_{j,j-1})` per accepted step (with `record_history`).
    pub diag_history: Vec<Vec<f64>>,
    /// Cumulative log sums after each accepted step (with `record_history`).
    pub sum_history: Vec<Vec<f64>>,
    /// Full `R_{j,j-1}` per accepted step (with `record_factors`).
    pub factors: Vec<Matrix>,
    pub accepted: usize,
    pub rejected: usize,
}

impl LyapunovRun {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("at least t_0")
    }

    /// Exponent estimates (column order) after accepted step `k ≥ 1`,
    /// recomputed from the recorded diagonals.
    pub fn exponents_from_history(&self, k: usize) -> Option<Vec<f64>> {
        if k == 0 || k > self.diag_history.len() {
            return None;
        }
        let p = self.log_sums.len();
        let mut sums = vec![0.0; p];
        for d in &self.diag_history[..k] {
            for (s, v) in sums.iter_mut().zip(d) {
                *s += v.ln();
            }
        }
        Some(sums.into_iter().map(|s| s / self.times[k]).collect())
    }

    /// Sorted exponent estimates at the first recorded step with
    /// `t_k ≥ t`.
    pub fn exponents_at(&self, t: f64) -> Option<Vec<f64>> {
        let k = self.times.iter().position(|&tk| tk >= t && tk > 0.0)?;
        let sums = self.sum_history.get(k - 1)?;
        Some(sort_descending(sums.iter().map(|s| s / self.times[k]).collect()))
    }
}

/// Stable descending sort.
pub fn sort_descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Next step from the embedded log-diagonal increments:
/// `h·clamp(0.9 (tol/err)^{1/5}, 0.2, 5)` with `err = max_i |a_i − b_i|`.
/// The step is to be rejected when `err > le_tol`.
pub fn dqr_step_adapt(h: f64, le_increment_5th: &[f64], le_increment_4th: &[f64], le_tol: f64) -> f64 {
    let err = le_increment_5th
        .iter()
        .zip(le_increment_4th)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    h * step_factor(err, le_tol)
}

fn step_factor(err: f64, tol: f64) -> f64 {
    if err == 0.0 {
        return 5.0;
    }
    (0.9 * (tol / err).powf(0.2)).clamp(0.2, 5.0)
}

/// Random `n × p` matrix with entries uniform in `[−1, 1]`, redrawn until
/// it has full column rank; returns it with its positive-diagonal factors.
pub fn random_frame(n: usize, p: usize, seed: u64) -> Result<(Matrix, Matrix, Matrix), DqrError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let z = Matrix::from_fn(n, p, |_, _| rng.random_range(-1.0..=1.0));
        match qr_positive(&z) {
            Ok((q, r)) => return Ok((z, q, r)),
            Err(LinalgError::RankDeficient { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(DqrError::Config("could not draw a full-rank initial matrix".into()))
}

// Two-slot cache: A at the current step start and the most recent other
// time (stages 6 and 7 share a time, which is also the next step start).
struct CoefficientCache<'a, A: ?Sized> {
    gen: &'a A,
    start_t: f64,
    start: Matrix,
    other_t: f64,
    other: Matrix,
    scratch_err: Option<LinearizeError>,
}

impl<'a, A: CoefficientMatrix + ?Sized> CoefficientCache<'a, A> {
    fn new(gen: &'a A, t0: f64) -> Result<Self, DqrError> {
        let n = gen.dim();
        let mut start = Matrix::zeros(n, n);
        gen.eval_into(t0, &mut start)?;
        Ok(CoefficientCache { gen, start_t: t0, start, other_t: f64::NAN, other: Matrix::zeros(n, n), scratch_err: None })
    }

    fn get(&mut self, t: f64) -> &Matrix {
        if t == self.start_t {
            return &self.start;
        }
        if t != self.other_t {
            if let Err(e) = self.gen.eval_into(t, &mut self.other) {
                self.scratch_err.get_or_insert(e);
                self.other.as_mut_slice().iter_mut().for_each(|x| *x = f64::NAN);
            }
            self.other_t = t;
        }
        &self.other
    }

    /// Moves to a new step start, reusing the cached matrix when possible.
    fn advance(&mut self, t: f64) -> Result<(), DqrError> {
        if t == self.other_t {
            std::mem::swap(&mut self.start, &mut self.other);
            self.other_t = self.start_t;
        } else {
            self.gen.eval_into(t, &mut self.start)?;
        }
        self.start_t = t;
        Ok(())
    }
}

/// Lyapunov exponents of `z' = A(t) z` by the discrete QR method.
pub fn dqr_lyapunov<A: CoefficientMatrix + ?Sized>(gen: &A, cfg: &DqrConfig) -> Result<LyapunovRun, DqrError> {
    let n = gen.dim();
    let p = cfg.validate(n)?;
    let (cov0, cov1) = gen.coverage();
    if !(cov0 <= 0.0) {
        return Err(DqrError::Coverage { t0: cov0, t1: cov1, needed: 0.0 });
    }
    let (z0, q0, r0) = match cfg.initial_frame {
        InitialFrame::Random => random_frame(n, p, cfg.seed)?,
        InitialFrame::Identity => {
            let z = Matrix::from_fn(n, p, |i, j| if i == j { 1.0 } else { 0.0 });
            (z.clone(), z, Matrix::identity(p))
        }
    };

    let mut cache = CoefficientCache::new(gen, 0.0)?;
    let mut stepper = DpStepper::new(n * p);
    let mut run = LyapunovRun {
        times: vec![0.0],
        log_sums: vec![0.0; p],
        exponents: vec![0.0; p],
        q: q0,
        r0,
        z0,
        diag_history: Vec::new(),
        sum_history: Vec::new(),
        factors: Vec::new(),
        accepted: 0,
        rejected: 0,
    };
    let min_step = 1e-12 * cfg.t_final;
    let mut t = 0.0f64;
    let mut h = cfg.initial_step;
    let mut halvings = 0usize;
    let mut ln5 = vec![0.0; p];
    let mut ln4 = vec![0.0; p];

    while t < cfg.t_final {
        if run.accepted + run.rejected >= cfg.max_steps {
            return Err(DqrError::TooManySteps(cfg.max_steps));
        }
        let mut h_try = h;
        if t + h_try > cov1 {
            h_try = cov1 - t;
            if !(h_try > min_step) {
                return Err(DqrError::Coverage { t0: cov0, t1: cov1, needed: cfg.t_final });
            }
        }
        if h_try < min_step {
            return Err(DqrError::StepUnderflow { t, h: h_try });
        }
        let frame = run.q.as_slice().to_vec();
        {
            let mut rhs = |s: f64, y: &[f64], dy: &mut [f64]| {
                let a = cache.get(s);
                matmul_into(a, y, p, dy);
            };
            match stepper.step(&mut rhs, t, &frame, h_try, false) {
                Ok(()) => {}
                Err(IntegrationError::NonFiniteRhs { .. }) => {}
                Err(e) => return Err(DqrError::Config(e.to_string())),
            }
        }
        if let Some(e) = cache.scratch_err.take() {
            return Err(e.into());
        }
        let gamma5 = Matrix::from_row_major(n, p, stepper.y5.clone())?;
        let gamma4 = Matrix::from_row_major(n, p, stepper.y4.clone())?;
        if !gamma5.is_finite() || !gamma4.is_finite() {
            return Err(DqrError::NonFinite { t });
        }
        let factored = qr_positive(&gamma5).and_then(|f5| qr_positive(&gamma4).map(|f4| (f5, f4)));
        let ((q5, r5), (_, r4)) = match factored {
            Ok(f) => f,
            Err(LinalgError::RankDeficient { .. }) => {
                halvings += 1;
                if halvings > cfg.max_halvings {
                    return Err(DqrError::RankDeficient { t, retries: halvings - 1 });
                }
                h = 0.5 * h_try;
                run.rejected += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for i in 0..p {
            ln5[i] = r5[(i, i)].ln();
            ln4[i] = r4[(i, i)].ln();
        }
        let err = ln5.iter().zip(&ln4).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let factor = step_factor(err, cfg.le_tol);
        if !(err <= cfg.le_tol) {
            run.rejected += 1;
            h = h_try * factor.min(0.9);
            continue;
        }
        halvings = 0;
        t += h_try;
        run.accepted += 1;
        run.times.push(t);
        for (s, l) in run.log_sums.iter_mut().zip(&ln5) {
            *s += l;
        }
        if cfg.record_history {
            run.diag_history.push(r5.diagonal());
            run.sum_history.push(run.log_sums.clone());
        }
        if cfg.record_factors {
            run.factors.push(r5);
        }
        run.q = q5;
        h = h_try * factor;
        cache.advance(t)?;
    }
    run.exponents = sort_descending(run.log_sums.iter().map(|s| s / t).collect());
    Ok(run)
}
