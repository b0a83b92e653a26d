//! Python bindings for `lyapdelay`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lyapdelay::cli::{self, CliError, PreparedModel, RunConfig, DEFAULT_SOLVE_T, DEFAULT_T};
use lyapdelay::dqr::{dqr_lyapunov, DqrConfig, InitialFrame};
use lyapdelay::linalg::{self, Matrix};
use lyapdelay::linearize::ConstantCoefficients;
use lyapdelay::models::quad_re;
use lyapdelay::oracle;
use lyapdelay::spectral::SpectralMesh;

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Config(m) => PyValueError::new_err(m),
        CliError::Numerical(m) => PyRuntimeError::new_err(m),
    }
}

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn to_matrix(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(&rows).map_err(value_err)
}

fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Keyword arguments as `key → value` strings, keys normalized like
/// config-file keys.
fn kwargs_map(model: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    map.insert("model".to_string(), model.to_string());
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            let key: String = k.extract()?;
            let value = if let Ok(b) = v.extract::<bool>() {
                b.to_string()
            } else if let Ok(i) = v.extract::<i64>() {
                i.to_string()
            } else if let Ok(x) = v.extract::<f64>() {
                x.to_string()
            } else if let Ok(list) = v.extract::<Vec<f64>>() {
                list.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            } else {
                v.str()?.to_string()
            };
            map.insert(cli::normalize_key(&key), value);
        }
    }
    Ok(map)
}

fn config(model: &str, kwargs: Option<&Bound<'_, PyDict>>, default_t: f64) -> PyResult<RunConfig> {
    RunConfig::from_map(&kwargs_map(model, kwargs)?, default_t).map_err(cli_err)
}

/// Chebyshev extrema mesh on `[a, b]` with differentiation matrix and
/// Clenshaw–Curtis weights.
#[pyclass(name = "ChebyshevMesh", frozen)]
struct PyMesh {
    inner: SpectralMesh,
}

#[pymethods]
impl PyMesh {
    #[new]
    fn new(degree: usize, a: f64, b: f64) -> PyResult<Self> {
        Ok(PyMesh { inner: SpectralMesh::new(degree, a, b).map_err(value_err)? })
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.cc_weights().to_vec()
    }

    fn diff(&self) -> Vec<Vec<f64>> {
        to_rows(self.inner.diff())
    }

    fn interpolate(&self, values: Vec<f64>, theta: f64) -> PyResult<f64> {
        self.inner.interpolate(&values, theta).map_err(value_err)
    }

    fn integrate(&self, values: Vec<f64>) -> PyResult<f64> {
        self.inner.integrate(&values).map_err(value_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        let (a, b) = self.inner.interval();
        format!("ChebyshevMesh(degree={}, a={a}, b={b})", self.inner.degree())
    }
}

/// A shipped model collocated into an ODE system.
#[pyclass(name = "System", frozen)]
struct PySystem {
    cfg: RunConfig,
    prepared: PreparedModel,
}

#[pymethods]
impl PySystem {
    #[new]
    #[pyo3(signature = (model, **kwargs))]
    fn new(model: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let cfg = config(model, kwargs, DEFAULT_T)?;
        let prepared = cli::prepare(&cfg).map_err(cli_err)?;
        Ok(PySystem { cfg, prepared })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.prepared.system.dim()
    }

    #[getter]
    fn model(&self) -> String {
        self.cfg.model().to_string()
    }

    #[getter]
    fn initial_state(&self) -> Vec<f64> {
        self.prepared.initial.clone()
    }

    fn rhs(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&w)?;
        Ok(self.prepared.system.rhs_vec(0.0, &w))
    }

    fn jacobian(&self, w: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        self.check(&w)?;
        Ok(to_rows(&self.prepared.system.jacobian(0.0, &w)))
    }

    /// Labelled equilibria as collocated states.
    fn equilibria(&self) -> Vec<(String, Vec<f64>)> {
        self.prepared.equilibria.clone()
    }

    /// Physical values (`x`, `y`) encoded by a state.
    fn observables(&self, w: Vec<f64>) -> PyResult<Vec<f64>> {
        self.check(&w)?;
        Ok(self.prepared.system.observables(&w))
    }

    /// Eigenvalue exponents at the labelled equilibrium.
    fn equilibrium_exponents(&self, label: &str) -> PyResult<Vec<f64>> {
        let state = self.prepared.equilibrium(label).map_err(cli_err)?;
        let res = oracle::equilibrium_les(&self.prepared.system, state).map_err(runtime_err)?;
        Ok(res.exponents)
    }

    /// Lyapunov exponents along the attractor reached from the initial state.
    fn lyapunov_exponents(&self) -> PyResult<Vec<f64>> {
        let run = cli::compute_exponents(&self.cfg, &self.prepared, &cli::dqr_config(&self.cfg)).map_err(cli_err)?;
        Ok(run.exponents)
    }

    fn __repr__(&self) -> String {
        format!("System(model={}, {}, dim={})", self.cfg.model(), self.cfg.params.summary(), self.dim())
    }
}

impl PySystem {
    fn check(&self, w: &[f64]) -> PyResult<()> {
        if w.len() != self.prepared.system.dim() {
            return Err(PyValueError::new_err(format!(
                "state has length {}, expected {}",
                w.len(),
                self.prepared.system.dim()
            )));
        }
        Ok(())
    }
}

/// Positive-diagonal QR factorization.
#[pyfunction]
fn qr_positive(a: Vec<Vec<f64>>) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let (q, r) = linalg::qr_positive(&to_matrix(a)?).map_err(value_err)?;
    Ok((to_rows(&q), to_rows(&r)))
}

#[pyfunction]
fn eigenvalues(a: Vec<Vec<f64>>) -> PyResult<Vec<Complex64>> {
    linalg::eigenvalues(&to_matrix(a)?).map_err(runtime_err)
}

/// Discrete QR exponents of `z' = A z` for a constant matrix.
#[pyfunction]
#[pyo3(signature = (a, t_final, le_tol = 1e-6, seed = 20, frame = "random"))]
fn constant_exponents(a: Vec<Vec<f64>>, t_final: f64, le_tol: f64, seed: u64, frame: &str) -> PyResult<Vec<f64>> {
    let initial_frame = match frame {
        "random" => InitialFrame::Random,
        "identity" => InitialFrame::Identity,
        _ => return Err(PyValueError::new_err("frame must be 'random' or 'identity'")),
    };
    let gen = ConstantCoefficients(to_matrix(a)?);
    let cfg = DqrConfig { le_tol, seed, initial_frame, ..DqrConfig::new(t_final) };
    Ok(dqr_lyapunov(&gen, &cfg).map_err(runtime_err)?.exponents)
}

/// Lyapunov exponents of a shipped model; keyword arguments mirror the
/// command-line flags (`gamma`, `MX`, `T`, `dqr_tol`, ...).
#[pyfunction]
#[pyo3(signature = (model, **kwargs))]
fn lyapunov_exponents(model: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Vec<f64>> {
    let cfg = config(model, kwargs, DEFAULT_T)?;
    let prepared = cli::prepare(&cfg).map_err(cli_err)?;
    Ok(cli::compute_exponents(&cfg, &prepared, &cli::dqr_config(&cfg)).map_err(cli_err)?.exponents)
}

/// Runs `solve`, `les`, `sweep` or `convergence` and returns its CSV.
#[pyfunction]
#[pyo3(signature = (command, model, **kwargs))]
fn run_command(command: &str, model: &str, kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<String> {
    let default_t = if command == "solve" { DEFAULT_SOLVE_T } else { DEFAULT_T };
    let cfg = config(model, kwargs, default_t)?;
    let out = match command {
        "solve" => cli::cmd_solve(&cfg),
        "les" => cli::cmd_les(&cfg),
        "sweep" => cli::cmd_sweep(&cfg),
        "convergence" => cli::cmd_convergence(&cfg),
        other => return Err(PyValueError::new_err(format!("unknown command '{other}'"))),
    };
    Ok(out.map_err(cli_err)?.csv)
}

/// Trapezoidal solution of `quad_re(gamma)` from a constant initial value;
/// returns `(times, values)`.
#[pyfunction]
#[pyo3(signature = (gamma, r, t_final, initial = 0.2))]
fn quad_trapezoidal(gamma: f64, r: usize, t_final: f64, initial: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let model = quad_re(gamma).map_err(value_err)?;
    let sol = oracle::trapezoidal_re_solve(&model, r, &|_| initial, t_final).map_err(value_err)?;
    Ok((sol.times(), sol.values))
}

#[pymodule(name = "lyapdelay")]
fn lyapdelay_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMesh>()?;
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(qr_positive, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(constant_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(lyapunov_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(run_command, m)?)?;
    m.add_function(wrap_pyfunction!(quad_trapezoidal, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
