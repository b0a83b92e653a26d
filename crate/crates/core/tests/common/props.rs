//! Property suites shared by the `properties` test target and the
//! acceptance harness. Each suite returns the first failing case.

use lyapdelay::discretize::{build_coupled_system, build_dde_system, build_re_system, DiscreteSystem, Discretization};
use lyapdelay::linalg::{qr_positive, Matrix};
use lyapdelay::linearize::fd_jacobian;
use lyapdelay::models::{cannibalism_re, linear_dde, logistic_daphnia, quad_re, zero_re};
use lyapdelay::spectral::SpectralMesh;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestError, TestRng, TestRunner};

pub type SuiteResult = Result<(), String>;

fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> SuiteResult
where
    S::Value: std::fmt::Debug,
{
    // Fixed RNG so the suite is reproducible run to run.
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let rng = TestRng::deterministic_rng(config.rng_algorithm);
    let mut runner = TestRunner::new_with_rng(config, rng);
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(why, value) => format!("{why} for {value:?}"),
        TestError::Abort(why) => format!("aborted: {why}"),
    })
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-1.0..1.0f64, rows * cols)
        .prop_map(move |v| Matrix::from_row_major(rows, cols, v).expect("sizes match"))
}

/// Orthonormal `Q`, upper-triangular `R` with positive diagonal,
/// `QR = A`, and refactoring `QR` reproduces the same pair.
pub fn qr_suite() -> SuiteResult {
    let shapes = (1usize..=8).prop_flat_map(|n| (n..=n + 4).prop_map(move |m| (m, n)));
    let strategy = shapes.prop_flat_map(|(m, n)| matrix(m, n));
    run(256, strategy, |a| {
        let (q, r) = match qr_positive(&a) {
            Ok(f) => f,
            // Random matrices are nonsingular almost surely; a rejected
            // draw is not a counterexample.
            Err(_) => return Err(TestCaseError::reject("rank deficient")),
        };
        let n = a.cols();
        prop_assert!(max_abs_diff(&q.transpose().matmul(&q), &Matrix::identity(n)) <= 1e-12);
        prop_assert!(max_abs_diff(&q.matmul(&r), &a) <= 1e-12);
        for i in 0..n {
            prop_assert!(r[(i, i)] > 0.0);
            for j in 0..i {
                prop_assert_eq!(r[(i, j)], 0.0);
            }
        }
        let (q2, r2) = qr_positive(&q.matmul(&r)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!(max_abs_diff(&q, &q2) <= 1e-12, "Q differs by {}", max_abs_diff(&q, &q2));
        prop_assert!(max_abs_diff(&r, &r2) <= 1e-12, "R differs by {}", max_abs_diff(&r, &r2));
        Ok(())
    })
}

/// Differentiation, interpolation and Clenshaw–Curtis quadrature are exact
/// on polynomials of degree at most `M`.
pub fn spectral_suite() -> SuiteResult {
    let strategy = (2usize..=20, -4.0..-0.5f64, 0.25..3.0f64, 0.0..1.0f64)
        .prop_flat_map(|(m, a, len, frac)| (Just(m), Just(a), Just(len), 0..=m, Just(frac)));
    run(256, strategy, |(m, a, len, k, frac)| {
        let b = a + len;
        let mesh = SpectralMesh::new(m, a, b).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let v: Vec<f64> = mesh.nodes().iter().map(|t| t.powi(k as i32)).collect();
        let dv: Vec<f64> = mesh.nodes().iter().map(|t| k as f64 * t.powi(k as i32 - 1)).collect();
        let scale = v.iter().fold(1.0f64, |s, x| s.max(x.abs()));
        let err = mesh.diff().matvec(&v).iter().zip(&dv).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-10 * scale, "diff error {err} (scale {scale})");

        let exact = (b.powi(k as i32 + 1) - a.powi(k as i32 + 1)) / (k as f64 + 1.0);
        let quad = mesh.integrate(&v).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((quad - exact).abs() <= 1e-12 * scale * len.max(1.0), "quadrature {quad} vs {exact}");

        let theta = a + frac * len;
        let p = mesh.interpolate(&v, theta).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert!((p - theta.powi(k as i32)).abs() <= 1e-12 * scale);
        Ok(())
    })
}

/// Every shipped model as `(name, equilibria, system builder)`.
type Builder = Box<dyn Fn(usize) -> DiscreteSystem>;

pub fn shipped_systems() -> Vec<(String, Vec<Vec<f64>>, Builder)> {
    let opts = Discretization::default();
    let mut out: Vec<(String, Vec<Vec<f64>>, Builder)> = Vec::new();
    for gamma in [0.5, 3.0, 4.0] {
        let m = quad_re(gamma).unwrap();
        let eq = m.equilibria.iter().map(|e| e.values.clone()).collect();
        out.push((format!("quad({gamma})"), eq, Box::new(move |mx| build_re_system(&m, mx, opts).unwrap())));
    }
    for gamma in [0.5, 8.0, 20.0] {
        let m = cannibalism_re(gamma, 1.0, 3.0).unwrap();
        let eq = m.equilibria.iter().map(|e| e.values.clone()).collect();
        out.push((format!("cannibalism({gamma})"), eq, Box::new(move |mx| build_re_system(&m, mx, opts).unwrap())));
    }
    let z = zero_re();
    let eq = z.equilibria.iter().map(|e| e.values.clone()).collect();
    out.push(("zero".into(), eq, Box::new(move |mx| build_re_system(&z, mx, opts).unwrap())));
    for beta in [0.8, 1.2] {
        let m = logistic_daphnia(beta, 1.0, 1.0, 1.0, 3.0, 4.0).unwrap();
        let eq = m.equilibria.iter().map(|e| e.values.clone()).collect();
        out.push((format!("daphnia({beta})"), eq, Box::new(move |mm| build_coupled_system(&m, mm, mm, opts).unwrap())));
    }
    let d = linear_dde(-1.0, 0.5, 1.0).unwrap();
    let eq = d.equilibria.iter().map(|e| e.values.clone()).collect();
    out.push(("linear-dde".into(), eq, Box::new(move |my| build_dde_system(&d, my, opts).unwrap())));
    out
}

/// Analytic equilibria map to rest points of the collocated system.
pub fn equilibrium_suite() -> SuiteResult {
    for (name, equilibria, build) in shipped_systems() {
        for m in [5, 10, 15, 20] {
            let sys = build(m);
            for values in &equilibria {
                let w = sys.equilibrium_state(values);
                let res = sys.rhs_vec(0.0, &w).iter().fold(0.0f64, |s, x| s.max(x.abs()));
                if res > 1e-10 {
                    return Err(format!("{name} at {values:?}, M={m}: residual {res:e}"));
                }
            }
        }
    }
    Ok(())
}

/// Analytic Jacobian against central differences at random states near
/// each equilibrium.
pub fn jacobian_suite() -> SuiteResult {
    for (name, equilibria, build) in shipped_systems() {
        for m in [5, 15] {
            let sys = build(m);
            let base = sys.equilibrium_state(equilibria.last().expect("every model has an equilibrium"));
            let n = sys.dim();
            run(10, prop::collection::vec(-0.2..0.2f64, n), |noise| {
                let w: Vec<f64> = base.iter().zip(&noise).map(|(b, e)| b + e).collect();
                let jac = sys.jacobian(0.0, &w);
                let fd = fd_jacobian(&sys, 0.0, &w).map_err(|e| TestCaseError::fail(e.to_string()))?;
                let err = jac.sub(&fd).norm_inf();
                let bound = 1e-5 * (1.0 + jac.norm_inf());
                prop_assert!(err <= bound, "{} M={}: {:e} > {:e}", name, m, err, bound);
                Ok(())
            })?;
        }
    }
    Ok(())
}
