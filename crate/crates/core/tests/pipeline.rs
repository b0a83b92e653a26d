//! Collocation, linearization and discrete QR working together.

use lyapdelay::discretize::{build_re_system, Discretization};
use lyapdelay::dqr::{dqr_lyapunov, DqrConfig};
use lyapdelay::linalg::Matrix;
use lyapdelay::linearize::{linearize_along, reference_trajectory, CoefficientMatrix, ConstantCoefficients, ReferenceOptions};
use lyapdelay::models::{quad_re, quad_re_periodic_solution, QUAD_RE_PERIOD};
use lyapdelay::odeint::{integrate, IvpProblem};
use lyapdelay::oracle::trapezoidal_re_solve;

fn periodic(t: f64) -> f64 {
    quad_re_periodic_solution(4.0, t).unwrap()
}

#[test]
fn collocation_and_trapezoid_agree_on_the_periodic_orbit() {
    let model = quad_re(4.0).unwrap();
    let sys = build_re_system(&model, 15, Discretization::default()).unwrap();
    let w0 = sys.initial_state(&periodic, &|_| 0.0).unwrap();
    let rhs = |t: f64, w: &[f64], out: &mut [f64]| sys.rhs(t, w, out);
    let traj = integrate(IvpProblem::new(rhs, 0.0, 100.0, w0)).unwrap();
    let trap = trapezoidal_re_solve(&model, 64, &periodic, 100.0).unwrap();

    let mut err = 0.0f64;
    for (t, x) in trap.times().iter().zip(&trap.values).step_by(8) {
        let w = traj.eval(*t).unwrap();
        err = err.max((sys.observables(&w)[0] - x).abs());
    }
    assert!(err <= 1e-3, "max difference {err:e}");
}

#[test]
fn linearization_along_the_orbit_has_its_period() {
    let model = quad_re(4.0).unwrap();
    let sys = build_re_system(&model, 15, Discretization::default()).unwrap();
    let w0 = sys.initial_state(&periodic, &|_| 0.0).unwrap();
    let opts = ReferenceOptions { transient: 0.0, horizon: 20.0, rtol: 1e-10, atol: 1e-12 };
    let var = linearize_along(sys.clone(), reference_trajectory(&sys, &w0, opts).unwrap()).unwrap();
    for t in [0.3, 2.9, 7.1, 11.5] {
        let (a, b) = (var.eval(t).unwrap(), var.eval(t + QUAD_RE_PERIOD).unwrap());
        let diff = a.sub(&b).norm_inf();
        assert!(diff <= 1e-6 * a.norm_inf(), "t={t}: {diff:e}");
    }
}

fn expm_times(a: &Matrix, z0: &Matrix, t: f64) -> Matrix {
    let (n, p) = (z0.rows(), z0.cols());
    let rhs = |_t: f64, z: &[f64], out: &mut [f64]| {
        let prod = a.matmul(&Matrix::from_row_major(n, p, z.to_vec()).unwrap());
        out.copy_from_slice(prod.as_slice());
    };
    let traj = integrate(IvpProblem::new(rhs, 0.0, t, z0.as_slice().to_vec()).tolerances(1e-12, 1e-14)).unwrap();
    Matrix::from_row_major(n, p, traj.final_state().to_vec()).unwrap()
}

#[test]
fn recorded_factors_telescope_to_the_flow() {
    let a = Matrix::from_rows(&[vec![0.1, 2.0, 0.0], vec![-1.0, -0.3, 0.5], vec![0.0, 0.4, -1.2]]).unwrap();
    let gen = ConstantCoefficients(a.clone());
    let cfg = DqrConfig { le_tol: 1e-10, record_factors: true, record_history: true, ..DqrConfig::new(20.0) };
    let run = dqr_lyapunov(&gen, &cfg).unwrap();

    let mut product = run.r0.clone();
    for r in &run.factors {
        product = r.matmul(&product);
    }
    let rebuilt = run.q.matmul(&product);
    let flow = expm_times(&a, &run.z0, run.final_time());
    let rel = rebuilt.sub(&flow).max_abs() / flow.max_abs();
    assert!(rel <= 1e-6, "relative mismatch {rel:e}");

    // The accumulated log sums are those of the recorded diagonals.
    let mut sums = [0.0; 3];
    for r in &run.factors {
        for (i, s) in sums.iter_mut().enumerate() {
            *s += r[(i, i)].ln();
        }
    }
    for (s, l) in sums.iter().zip(&run.log_sums) {
        assert!((s - l).abs() <= 1e-9 * l.abs().max(1.0));
    }
}

#[test]
fn exponents_do_not_depend_on_the_seed() {
    let model = quad_re(0.5).unwrap();
    let sys = build_re_system(&model, 10, Discretization::default()).unwrap();
    let w0 = sys.constant_state(0.2, 0.0);
    let opts = ReferenceOptions { transient: 50.0, horizon: 1050.0, ..ReferenceOptions::default() };
    let var = linearize_along(sys.clone(), reference_trajectory(&sys, &w0, opts).unwrap()).unwrap();
    let lead: Vec<f64> = [1, 2, 3]
        .iter()
        .map(|&seed| dqr_lyapunov(&var, &DqrConfig { seed, num_exponents: Some(2), ..DqrConfig::new(1000.0) }).unwrap())
        .map(|run| run.exponents[0])
        .collect();
    let spread = lead.iter().fold(f64::MIN, |m, &x| m.max(x)) - lead.iter().fold(f64::MAX, |m, &x| m.min(x));
    // The seed enters only through the start-up transient, which decays as 1/T.
    assert!(spread <= 1e-2, "{lead:?}");
}
