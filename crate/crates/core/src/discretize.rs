//! Pseudospectral reduction of renewal, delay and coupled equations to ODEs.
//!
//! For a renewal equation the collocated unknown is the integrated state
//! `U_j ≈ ∫_{θ_j}^0 …`, i.e. the values at the nonzero Chebyshev nodes of
//! a polynomial vanishing at `θ = 0`; the history itself is recovered as
//! `x(θ) ≈ Σ_j ℓ'_j(θ) U_j`. For a DDE the unknown is the history at all
//! `M_Y + 1` nodes.
//!
//! State layout: the RE block `U` (length `M_X`) comes first, followed by
//! the DDE block `V` (length `M_Y + 1`, with `V_0` the value at `θ = 0`).

use thiserror::Error;

use crate::linalg::{LinalgError, Lu, Matrix};
use crate::models::{CoupledModel, DdeModel, Nonlinearity, ReModel};
use crate::spectral::{Extrapolation, SpectralError, SpectralMesh};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiscretizeError {
    #[error("collocation degree {got} too small (need at least {min})")]
    DegreeTooSmall { got: usize, min: usize },
    #[error("system has no renewal block")]
    NoRenewalBlock,
    #[error("system has no delay-differential block")]
    NoDelayBlock,
    #[error("state of length {got} does not match system dimension {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Collocation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Discretization {
    /// Degree of the Clenshaw–Curtis rule on the kernel support; `None`
    /// means twice the collocation degree.
    pub quad_degree: Option<usize>,
}

/// Where each block lives in the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub mx: usize,
    pub my: usize,
    /// Component dimensions; only scalar models are provided, so both are 1
    /// whenever the corresponding block exists.
    pub dx: usize,
    pub dy: usize,
    pub u_offset: usize,
    pub v_offset: usize,
    pub n: usize,
}

/// Integrated-state (RE) collocation block.
#[derive(Debug, Clone)]
pub struct RenewalBlock {
    mesh: SpectralMesh,
    /// `D_{M_X}`: the full differentiation matrix without row and column 0.
    d: Matrix,
    d_lu: Lu,
    quad: SpectralMesh,
    /// `ℓ'_j(θ_q)` for quadrature nodes `θ_q` and `j = 1..M_X`.
    lp: Matrix,
    /// `ℓ'_j(0)`, `j = 1..M_X`.
    lp_at_zero: Vec<f64>,
}

impl RenewalBlock {
    fn new(mx: usize, tau1: f64, tau2: f64, quad_degree: usize) -> Result<Self, DiscretizeError> {
        let mesh = SpectralMesh::new(mx, -tau2, 0.0)?;
        let d = mesh.diff().block(1, mx + 1, 1, mx + 1);
        let d_lu = Lu::new(&d)?;
        let quad = SpectralMesh::new(quad_degree, -tau2, -tau1)?;
        let mut lp = Matrix::zeros(quad.len(), mx);
        for (q, &theta) in quad.nodes().iter().enumerate() {
            let row = mesh.lagrange_derivative_row(theta, Extrapolation::Reject)?;
            lp.row_mut(q).copy_from_slice(&row[1..]);
        }
        let lp_at_zero = mesh.diff().row(0)[1..].to_vec();
        Ok(RenewalBlock { mesh, d, d_lu, quad, lp, lp_at_zero })
    }

    pub fn mesh(&self) -> &SpectralMesh {
        &self.mesh
    }

    pub fn quadrature_mesh(&self) -> &SpectralMesh {
        &self.quad
    }

    pub fn diff(&self) -> &Matrix {
        &self.d
    }

    /// `ℓ'_j(θ_q)` at the quadrature nodes.
    pub fn derivative_basis(&self) -> &Matrix {
        &self.lp
    }

    /// `Σ_q w_q f(x(θ_q))` with `x(θ_q) = Σ_j ℓ'_j(θ_q) U_j`.
    fn integral(&self, u: &[f64], f: &Nonlinearity) -> f64 {
        let w = self.quad.cc_weights();
        (0..self.quad.len()).map(|q| w[q] * f.eval(crate::linalg::dot(self.lp.row(q), u))).sum()
    }

    /// Gradient of [`Self::integral`] with respect to `U`, added (times
    /// `scale`) into `out`.
    fn integral_gradient(&self, u: &[f64], f: &Nonlinearity, scale: f64, out: &mut [f64]) {
        let w = self.quad.cc_weights();
        for q in 0..self.quad.len() {
            let row = self.lp.row(q);
            let c = scale * w[q] * f.deriv(crate::linalg::dot(row, u));
            for (o, &l) in out.iter_mut().zip(row) {
                *o += c * l;
            }
        }
    }

    fn reconstruct(&self, u: &[f64], theta: f64) -> Result<f64, SpectralError> {
        if theta == 0.0 {
            return Ok(crate::linalg::dot(&self.lp_at_zero, u));
        }
        let row = self.mesh.lagrange_derivative_row(theta, Extrapolation::Reject)?;
        Ok(crate::linalg::dot(&row[1..], u))
    }
}

/// History (DDE) collocation block.
#[derive(Debug, Clone)]
pub struct DelayBlock {
    mesh: SpectralMesh,
    /// Rows `1..=M_Y` of the full differentiation matrix.
    d_rows: Matrix,
    // Lagrange basis rows at the point delays.
    point_basis: Vec<Vec<f64>>,
    // Quadrature on the distributed-kernel support, with basis rows.
    distributed: Option<(SpectralMesh, Matrix)>,
}

impl DelayBlock {
    fn new(my: usize, tau: f64) -> Result<Self, DiscretizeError> {
        let mesh = SpectralMesh::new(my, -tau, 0.0)?;
        let d_rows = mesh.diff().block(1, my + 1, 0, my + 1);
        Ok(DelayBlock { mesh, d_rows, point_basis: Vec::new(), distributed: None })
    }

    pub fn mesh(&self) -> &SpectralMesh {
        &self.mesh
    }
}

#[derive(Debug, Clone)]
enum Rule {
    Renewal { f: Nonlinearity },
    Delay { model: DdeModel },
    Coupled { f1: Nonlinearity, f2: Nonlinearity, g: Nonlinearity },
    Linear { matrix: Matrix },
}

/// Collocated ODE system `w' = rhs(t, w)` with its analytic Jacobian.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    name: String,
    layout: Layout,
    rule: Rule,
    renewal: Option<RenewalBlock>,
    delay: Option<DelayBlock>,
    // Linear part of the Jacobian (differentiation blocks).
    linear_part: Matrix,
}

/// Collocation of `x(t) = ∫_{-τ2}^{-τ1} f(x(t+θ)) dθ`:
/// `U' = D U − 1·F(U)`.
pub fn build_re_system(model: &ReModel, mx: usize, opts: Discretization) -> Result<DiscreteSystem, DiscretizeError> {
    if mx < 2 {
        return Err(DiscretizeError::DegreeTooSmall { got: mx, min: 2 });
    }
    let block = RenewalBlock::new(mx, model.tau1, model.tau2, opts.quad_degree.unwrap_or(2 * mx))?;
    let layout = Layout { mx, my: 0, dx: 1, dy: 0, u_offset: 0, v_offset: mx, n: mx };
    let linear_part = block.d.clone();
    Ok(DiscreteSystem {
        name: model.name.clone(),
        layout,
        rule: Rule::Renewal { f: model.f.clone() },
        renewal: Some(block),
        delay: None,
        linear_part,
    })
}

/// Collocation of `y'(t) = G(y_t)`: `V_0' = G(P V)`, `V_j' = (D V)_j`.
pub fn build_dde_system(model: &DdeModel, my: usize, opts: Discretization) -> Result<DiscreteSystem, DiscretizeError> {
    if my < 1 {
        return Err(DiscretizeError::DegreeTooSmall { got: my, min: 1 });
    }
    let mut block = DelayBlock::new(my, model.tau)?;
    for p in &model.point_delays {
        block.point_basis.push(block.mesh.lagrange_basis(-p.delay, Extrapolation::Reject)?);
    }
    if let Some(d) = &model.distributed {
        let quad = SpectralMesh::new(opts.quad_degree.unwrap_or(2 * my), -d.tau2, -d.tau1)?;
        let mut basis = Matrix::zeros(quad.len(), my + 1);
        for (q, &theta) in quad.nodes().iter().enumerate() {
            basis.row_mut(q).copy_from_slice(&block.mesh.lagrange_basis(theta, Extrapolation::Reject)?);
        }
        block.distributed = Some((quad, basis));
    }
    let n = my + 1;
    let layout = Layout { mx: 0, my, dx: 0, dy: 1, u_offset: 0, v_offset: 0, n };
    let mut linear_part = Matrix::zeros(n, n);
    for i in 1..n {
        linear_part.row_mut(i).copy_from_slice(block.d_rows.row(i - 1));
    }
    Ok(DiscreteSystem {
        name: model.name.clone(),
        layout,
        rule: Rule::Delay { model: model.clone() },
        renewal: None,
        delay: Some(block),
        linear_part,
    })
}

/// Collocation of the coupled prototype, with the RE block first.
pub fn build_coupled_system(
    model: &CoupledModel,
    mx: usize,
    my: usize,
    opts: Discretization,
) -> Result<DiscreteSystem, DiscretizeError> {
    if mx < 2 {
        return Err(DiscretizeError::DegreeTooSmall { got: mx, min: 2 });
    }
    if my < 1 {
        return Err(DiscretizeError::DegreeTooSmall { got: my, min: 1 });
    }
    let re = RenewalBlock::new(mx, model.tau1, model.tau2, opts.quad_degree.unwrap_or(2 * mx))?;
    let dde = DelayBlock::new(my, model.tau2)?;
    let n = mx + my + 1;
    let layout = Layout { mx, my, dx: 1, dy: 1, u_offset: 0, v_offset: mx, n };
    let mut linear_part = Matrix::zeros(n, n);
    for i in 0..mx {
        linear_part.row_mut(i)[..mx].copy_from_slice(re.d.row(i));
    }
    for i in 1..=my {
        linear_part.row_mut(mx + i)[mx..].copy_from_slice(dde.d_rows.row(i - 1));
    }
    Ok(DiscreteSystem {
        name: model.name.clone(),
        layout,
        rule: Rule::Coupled { f1: model.f1.clone(), f2: model.f2.clone(), g: model.g.clone() },
        renewal: Some(re),
        delay: Some(dde),
        linear_part,
    })
}

impl DiscreteSystem {
    /// Constant-coefficient system `w' = B w`, for synthetic checks.
    pub fn linear(name: &str, matrix: Matrix) -> Result<Self, DiscretizeError> {
        if !matrix.is_square() {
            return Err(DiscretizeError::Linalg(LinalgError::Dimension("linear system needs a square matrix".into())));
        }
        let n = matrix.rows();
        Ok(DiscreteSystem {
            name: name.to_string(),
            layout: Layout { mx: 0, my: 0, dx: 0, dy: 0, u_offset: 0, v_offset: 0, n },
            linear_part: matrix.clone(),
            rule: Rule::Linear { matrix },
            renewal: None,
            delay: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.layout.n
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn renewal_block(&self) -> Option<&RenewalBlock> {
        self.renewal.as_ref()
    }

    pub fn delay_block(&self) -> Option<&DelayBlock> {
        self.delay.as_ref()
    }

    fn split<'a>(&self, w: &'a [f64]) -> (&'a [f64], &'a [f64]) {
        let l = self.layout;
        (&w[l.u_offset..l.u_offset + l.mx], &w[l.v_offset..])
    }

    /// `out = rhs(t, w)`. The systems are autonomous; `t` is accepted for
    /// the integrator interface.
    pub fn rhs(&self, _t: f64, w: &[f64], out: &mut [f64]) {
        debug_assert_eq!(w.len(), self.dim());
        match &self.rule {
            Rule::Linear { matrix } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = crate::linalg::dot(matrix.row(i), w);
                }
            }
            Rule::Renewal { f } => {
                let re = self.renewal.as_ref().expect("renewal block");
                let big_f = re.integral(w, f);
                for (i, o) in out.iter_mut().enumerate() {
                    *o = crate::linalg::dot(re.d.row(i), w) - big_f;
                }
            }
            Rule::Delay { model } => {
                let dde = self.delay.as_ref().expect("delay block");
                out[0] = delay_rule(dde, model, w);
                for i in 1..w.len() {
                    out[i] = crate::linalg::dot(dde.d_rows.row(i - 1), w);
                }
            }
            Rule::Coupled { f1, f2, g } => {
                let re = self.renewal.as_ref().expect("renewal block");
                let dde = self.delay.as_ref().expect("delay block");
                let (u, v) = self.split(w);
                let mx = self.layout.mx;
                let v0 = v[0];
                let big_f = v0 * re.integral(u, f1);
                let big_g = g.eval(v0) + v0 * re.integral(u, f2);
                for i in 0..mx {
                    out[i] = crate::linalg::dot(re.d.row(i), u) - big_f;
                }
                out[mx] = big_g;
                for i in 1..v.len() {
                    out[mx + i] = crate::linalg::dot(dde.d_rows.row(i - 1), v);
                }
            }
        }
    }

    pub fn rhs_vec(&self, t: f64, w: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.rhs(t, w, &mut out);
        out
    }

    pub fn jacobian(&self, t: f64, w: &[f64]) -> Matrix {
        let mut out = Matrix::zeros(self.dim(), self.dim());
        self.jacobian_into(t, w, &mut out);
        out
    }

    /// Analytic Jacobian of [`Self::rhs`] at `w`, written into `out`.
    pub fn jacobian_into(&self, _t: f64, w: &[f64], out: &mut Matrix) {
        debug_assert_eq!((out.rows(), out.cols()), (self.dim(), self.dim()));
        out.as_mut_slice().copy_from_slice(self.linear_part.as_slice());
        match &self.rule {
            Rule::Linear { .. } => {}
            Rule::Renewal { f } => {
                let re = self.renewal.as_ref().expect("renewal block");
                let n = self.dim();
                let mut grad = vec![0.0; n];
                re.integral_gradient(w, f, 1.0, &mut grad);
                for i in 0..n {
                    for (o, g) in out.row_mut(i).iter_mut().zip(&grad) {
                        *o -= g;
                    }
                }
            }
            Rule::Delay { model } => {
                let dde = self.delay.as_ref().expect("delay block");
                delay_rule_gradient(dde, model, w, out.row_mut(0));
            }
            Rule::Coupled { f1, f2, g } => {
                let re = self.renewal.as_ref().expect("renewal block");
                let (u, v) = self.split(w);
                let mx = self.layout.mx;
                let v0 = v[0];
                // Row of ∂F/∂(U, V_0) and ∂G/∂(U, V_0).
                let mut grad_f = vec![0.0; mx + 1];
                re.integral_gradient(u, f1, v0, &mut grad_f[..mx]);
                grad_f[mx] = re.integral(u, f1);
                let mut grad_g = vec![0.0; mx + 1];
                re.integral_gradient(u, f2, v0, &mut grad_g[..mx]);
                grad_g[mx] = g.deriv(v0) + re.integral(u, f2);
                for i in 0..mx {
                    for (o, gf) in out.row_mut(i)[..=mx].iter_mut().zip(&grad_f) {
                        *o -= gf;
                    }
                }
                out.row_mut(mx)[..=mx].copy_from_slice(&grad_g);
            }
        }
    }

    /// `D_{M_X}^{-1} u`: the integrated state whose derivative interpolant
    /// takes the values `u` at the nonzero RE nodes.
    pub fn re_initial_vector(&self, u: &[f64]) -> Result<Vec<f64>, DiscretizeError> {
        let re = self.renewal.as_ref().ok_or(DiscretizeError::NoRenewalBlock)?;
        if u.len() != self.layout.mx {
            return Err(DiscretizeError::Dimension { expected: self.layout.mx, got: u.len() });
        }
        Ok(re.d_lu.solve_vec(u)?)
    }

    /// Full initial state from history functions: `phi` for the RE
    /// component and `psi` for the DDE component (each ignored when the
    /// corresponding block is absent).
    pub fn initial_state(&self, phi: &dyn Fn(f64) -> f64, psi: &dyn Fn(f64) -> f64) -> Result<Vec<f64>, DiscretizeError> {
        let mut w = Vec::with_capacity(self.dim());
        if let Some(re) = &self.renewal {
            let u: Vec<f64> = re.mesh.nodes()[1..].iter().map(|&t| phi(t)).collect();
            w.extend(self.re_initial_vector(&u)?);
        }
        if let Some(dde) = &self.delay {
            w.extend(dde.mesh.nodes().iter().map(|&t| psi(t)));
        }
        if let Rule::Linear { .. } = self.rule {
            w.extend((0..self.dim()).map(|_| phi(0.0)));
        }
        Ok(w)
    }

    /// State vector representing constant histories `(x, y)`:
    /// `U_j = x θ_j`, `V_j = y`.
    pub fn constant_state(&self, x: f64, y: f64) -> Vec<f64> {
        let mut w = Vec::with_capacity(self.dim());
        if let Some(re) = &self.renewal {
            w.extend(re.mesh.nodes()[1..].iter().map(|&t| x * t));
        }
        if let Some(dde) = &self.delay {
            w.extend(std::iter::repeat_n(y, dde.mesh.len()));
        }
        if let Rule::Linear { .. } = self.rule {
            w.extend(std::iter::repeat_n(x, self.dim()));
        }
        w
    }

    /// State for a model equilibrium given as in
    /// [`crate::models::EquilibriumInfo::values`].
    pub fn equilibrium_state(&self, values: &[f64]) -> Vec<f64> {
        match (&self.renewal, &self.delay) {
            (Some(_), Some(_)) => self.constant_state(values[0], values[1]),
            (Some(_), None) => self.constant_state(values[0], 0.0),
            (None, Some(_)) => self.constant_state(0.0, values[0]),
            (None, None) => self.constant_state(values.first().copied().unwrap_or(0.0), 0.0),
        }
    }

    /// `x(θ) ≈ Σ_j ℓ'_j(θ) U_j` for `θ ∈ [−τ2, 0]`; `w` may be the full
    /// state or just the RE block.
    pub fn reconstruct_re_state(&self, w: &[f64], theta: f64) -> Result<f64, DiscretizeError> {
        let re = self.renewal.as_ref().ok_or(DiscretizeError::NoRenewalBlock)?;
        let mx = self.layout.mx;
        if w.len() < mx {
            return Err(DiscretizeError::Dimension { expected: mx, got: w.len() });
        }
        Ok(re.reconstruct(&w[self.layout.u_offset..self.layout.u_offset + mx], theta)?)
    }

    /// Interpolated DDE history `y(θ)`.
    pub fn reconstruct_dde_state(&self, w: &[f64], theta: f64) -> Result<f64, DiscretizeError> {
        let dde = self.delay.as_ref().ok_or(DiscretizeError::NoDelayBlock)?;
        if w.len() != self.dim() {
            return Err(DiscretizeError::Dimension { expected: self.dim(), got: w.len() });
        }
        Ok(dde.mesh.interpolate(&w[self.layout.v_offset..], theta)?)
    }

    /// Physical values at `θ = 0`: `[x]`, `[y]`, `[x, y]`, or the raw state
    /// for a linear system.
    pub fn observables(&self, w: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(2);
        if let Some(re) = &self.renewal {
            out.push(crate::linalg::dot(&re.lp_at_zero, &w[..self.layout.mx]));
        }
        if self.delay.is_some() {
            out.push(w[self.layout.v_offset]);
        }
        if let Rule::Linear { .. } = self.rule {
            out.extend_from_slice(w);
        }
        out
    }

    /// Column names matching [`Self::observables`].
    pub fn observable_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        if self.renewal.is_some() {
            names.push("x".to_string());
        }
        if self.delay.is_some() {
            names.push("y".to_string());
        }
        if let Rule::Linear { .. } = self.rule {
            names.extend((0..self.dim()).map(|i| format!("z{i}")));
        }
        names
    }
}

fn delay_rule(dde: &DelayBlock, model: &DdeModel, v: &[f64]) -> f64 {
    let mut g = model.instantaneous.eval(v[0]);
    for (term, basis) in model.point_delays.iter().zip(&dde.point_basis) {
        g += term.h.eval(crate::linalg::dot(basis, v));
    }
    if let (Some(term), Some((quad, basis))) = (&model.distributed, &dde.distributed) {
        let w = quad.cc_weights();
        g += (0..quad.len()).map(|q| w[q] * term.k.eval(crate::linalg::dot(basis.row(q), v))).sum::<f64>();
    }
    g
}

fn delay_rule_gradient(dde: &DelayBlock, model: &DdeModel, v: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    out[0] = model.instantaneous.deriv(v[0]);
    for (term, basis) in model.point_delays.iter().zip(&dde.point_basis) {
        let c = term.h.deriv(crate::linalg::dot(basis, v));
        for (o, &b) in out.iter_mut().zip(basis) {
            *o += c * b;
        }
    }
    if let (Some(term), Some((quad, basis))) = (&model.distributed, &dde.distributed) {
        let w = quad.cc_weights();
        for q in 0..quad.len() {
            let row = basis.row(q);
            let c = w[q] * term.k.deriv(crate::linalg::dot(row, v));
            for (o, &b) in out.iter_mut().zip(row) {
                *o += c * b;
            }
        }
    }
}
