//! Chebyshev extrema meshes on an interval `[a, b]`: differentiation
//! matrix, barycentric interpolation, derivatives of the Lagrange basis and
//! Clenshaw–Curtis quadrature.
//!
//! Nodes are stored in descending order, so `nodes[0] == b` and
//! `nodes[M] == a`. With `b = 0` index 0 is always the point `θ = 0`.

use std::f64::consts::PI;

use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("polynomial degree must be at least 1, got {0}")]
    Degree(usize),
    #[error("degenerate interval [{a}, {b}]")]
    Interval { a: f64, b: f64 },
    #[error("point {theta} lies outside the mesh interval [{a}, {b}]")]
    Extrapolation { theta: f64, a: f64, b: f64 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("basis index {index} out of range 0..={degree}")]
    Index { index: usize, degree: usize },
}

/// Whether evaluation outside `[a, b]` is permitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extrapolation {
    #[default]
    Reject,
    Allow,
}

/// Chebyshev type-II (extrema) mesh of degree `M` on `[a, b]`.
#[derive(Debug, Clone)]
pub struct SpectralMesh {
    degree: usize,
    a: f64,
    b: f64,
    nodes: Vec<f64>,
    diff: Matrix,
    bary_weights: Vec<f64>,
    cc_weights: Vec<f64>,
}

/// Builds the mesh of `M + 1` Chebyshev extrema mapped affinely onto `[a, b]`.
pub fn chebyshev_mesh(degree: usize, a: f64, b: f64) -> Result<SpectralMesh, SpectralError> {
    SpectralMesh::new(degree, a, b)
}

impl SpectralMesh {
    pub fn new(degree: usize, a: f64, b: f64) -> Result<Self, SpectralError> {
        if degree < 1 {
            return Err(SpectralError::Degree(degree));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(SpectralError::Interval { a, b });
        }
        let m = degree;
        let half = 0.5 * (b - a);
        let reference: Vec<f64> = (0..=m).map(|j| (j as f64 * PI / m as f64).cos()).collect();
        let nodes: Vec<f64> = reference
            .iter()
            .enumerate()
            .map(|(j, &x)| match j {
                0 => b,
                j if j == m => a,
                _ => a + half * (x + 1.0),
            })
            .collect();

        // Differentiation matrix on the reference nodes, with the diagonal set
        // by the negative row sum; then scaled to [a, b].
        let c = |j: usize| -> f64 {
            let end = if j == 0 || j == m { 2.0 } else { 1.0 };
            if j.is_multiple_of(2) { end } else { -end }
        };
        let mut diff = Matrix::zeros(m + 1, m + 1);
        for i in 0..=m {
            let mut row_sum = 0.0;
            for j in 0..=m {
                if i != j {
                    let d = c(i) / c(j) / (reference[i] - reference[j]);
                    diff[(i, j)] = d;
                    row_sum += d;
                }
            }
            diff[(i, i)] = -row_sum;
        }
        let diff = diff.scale(1.0 / half);

        let bary_weights: Vec<f64> = (0..=m)
            .map(|j| {
                let w = if j % 2 == 0 { 1.0 } else { -1.0 };
                if j == 0 || j == m { 0.5 * w } else { w }
            })
            .collect();

        let cc_weights = clenshaw_curtis_reference_weights(m).into_iter().map(|w| w * half).collect();

        Ok(SpectralMesh { degree: m, a, b, nodes, diff, bary_weights, cc_weights })
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.degree + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn diff(&self) -> &Matrix {
        &self.diff
    }

    pub fn bary_weights(&self) -> &[f64] {
        &self.bary_weights
    }

    pub fn cc_weights(&self) -> &[f64] {
        &self.cc_weights
    }

    fn check_point(&self, theta: f64, mode: Extrapolation) -> Result<(), SpectralError> {
        if mode == Extrapolation::Reject && !(theta >= self.a && theta <= self.b) {
            return Err(SpectralError::Extrapolation { theta, a: self.a, b: self.b });
        }
        Ok(())
    }

    /// Values `ℓ_j(θ)` of the whole Lagrange basis at `θ`.
    pub fn lagrange_basis(&self, theta: f64, mode: Extrapolation) -> Result<Vec<f64>, SpectralError> {
        self.check_point(theta, mode)?;
        let mut out = vec![0.0; self.len()];
        if let Some(hit) = self.nodes.iter().position(|&x| x == theta) {
            out[hit] = 1.0;
            return Ok(out);
        }
        let mut denom = 0.0;
        for (j, (&x, &w)) in self.nodes.iter().zip(&self.bary_weights).enumerate() {
            let t = w / (theta - x);
            out[j] = t;
            denom += t;
        }
        out.iter_mut().for_each(|v| *v /= denom);
        Ok(out)
    }

    /// Barycentric evaluation of the interpolant through `(nodes, values)`.
    pub fn interpolate(&self, values: &[f64], theta: f64) -> Result<f64, SpectralError> {
        self.interpolate_with(values, theta, Extrapolation::Reject)
    }

    pub fn interpolate_with(&self, values: &[f64], theta: f64, mode: Extrapolation) -> Result<f64, SpectralError> {
        self.check_len(values.len())?;
        self.check_point(theta, mode)?;
        if let Some(hit) = self.nodes.iter().position(|&x| x == theta) {
            return Ok(values[hit]);
        }
        let mut num = 0.0;
        let mut den = 0.0;
        for ((&x, &w), &v) in self.nodes.iter().zip(&self.bary_weights).zip(values) {
            let t = w / (theta - x);
            num += t * v;
            den += t;
        }
        Ok(num / den)
    }

    /// Evaluates the interpolant of vector-valued data, one row per node.
    pub fn interpolate_rows(&self, values: &Matrix, theta: f64) -> Result<Vec<f64>, SpectralError> {
        self.check_len(values.rows())?;
        let basis = self.lagrange_basis(theta, Extrapolation::Reject)?;
        let mut out = vec![0.0; values.cols()];
        for (j, &l) in basis.iter().enumerate() {
            for (o, &v) in out.iter_mut().zip(values.row(j)) {
                *o += l * v;
            }
        }
        Ok(out)
    }

    /// `ℓ'_j(θ)`, evaluated as the interpolant of column `j` of the
    /// differentiation matrix.
    pub fn lagrange_derivative(&self, j: usize, theta: f64) -> Result<f64, SpectralError> {
        if j > self.degree {
            return Err(SpectralError::Index { index: j, degree: self.degree });
        }
        self.interpolate(&self.diff.column(j), theta)
    }

    /// Row `(ℓ'_0(θ), …, ℓ'_M(θ))`.
    pub fn lagrange_derivative_row(&self, theta: f64, mode: Extrapolation) -> Result<Vec<f64>, SpectralError> {
        let basis = self.lagrange_basis(theta, mode)?;
        let mut out = vec![0.0; self.len()];
        for (i, &l) in basis.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            for (o, &d) in out.iter_mut().zip(self.diff.row(i)) {
                *o += l * d;
            }
        }
        Ok(out)
    }

    /// Clenshaw–Curtis approximation of `∫_a^b` from node values.
    pub fn integrate(&self, values: &[f64]) -> Result<f64, SpectralError> {
        self.check_len(values.len())?;
        Ok(crate::linalg::dot(&self.cc_weights, values))
    }

    fn check_len(&self, got: usize) -> Result<(), SpectralError> {
        if got != self.len() {
            return Err(SpectralError::Length { expected: self.len(), got });
        }
        Ok(())
    }
}

/// Free-function form of [`SpectralMesh::interpolate`].
pub fn barycentric_eval(mesh: &SpectralMesh, values: &[f64], theta: f64) -> Result<f64, SpectralError> {
    mesh.interpolate(values, theta)
}

pub fn lagrange_derivative_eval(mesh: &SpectralMesh, j: usize, theta: f64) -> Result<f64, SpectralError> {
    mesh.lagrange_derivative(j, theta)
}

pub fn clenshaw_curtis_integrate(mesh: &SpectralMesh, values: &[f64]) -> Result<f64, SpectralError> {
    mesh.integrate(values)
}

// Clenshaw–Curtis weights on [-1, 1] at cos(jπ/N), by the explicit cosine sum.
fn clenshaw_curtis_reference_weights(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    if n.is_multiple_of(2) {
        w[0] = 1.0 / (nf * nf - 1.0);
    } else {
        w[0] = 1.0 / (nf * nf);
    }
    w[n] = w[0];
    for (j, wj) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = j as f64 * PI / nf;
        let mut v = 1.0;
        if n.is_multiple_of(2) {
            for k in 1..n / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        } else {
            for k in 1..=(n - 1) / 2 {
                let kf = k as f64;
                v -= 2.0 * (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        *wj = 2.0 * v / nf;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_on_minus_three_zero() {
        let mesh = chebyshev_mesh(2, -3.0, 0.0).unwrap();
        assert_eq!(mesh.nodes(), &[0.0, -1.5, -3.0]);
    }

    #[test]
    fn degree_one_diff_matrix() {
        let mesh = chebyshev_mesh(1, -1.0, 1.0).unwrap();
        let d = mesh.diff();
        assert_eq!(d.row(0), &[0.5, -0.5]);
        assert_eq!(d.row(1), &[0.5, -0.5]);
    }

    #[test]
    fn degree_two_cc_weights() {
        let mesh = chebyshev_mesh(2, -1.0, 1.0).unwrap();
        let w = mesh.cc_weights();
        for (got, want) in w.iter().zip([1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn construction_errors() {
        assert_eq!(chebyshev_mesh(0, -1.0, 1.0).unwrap_err(), SpectralError::Degree(0));
        assert!(matches!(chebyshev_mesh(3, 1.0, 1.0), Err(SpectralError::Interval { .. })));
        assert!(matches!(chebyshev_mesh(3, 2.0, 1.0), Err(SpectralError::Interval { .. })));
    }

    #[test]
    fn barycentric_cases() {
        let mesh = chebyshev_mesh(1, -1.0, 1.0).unwrap();
        assert_eq!(mesh.interpolate(&[2.0, 0.0], 0.0).unwrap(), 1.0);
        let mesh = chebyshev_mesh(6, -3.0, 0.0).unwrap();
        let vals: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
        for theta in [-2.9, -1.234, -0.01, 0.0] {
            assert!((mesh.interpolate(&vals, theta).unwrap() - theta * theta).abs() < 1e-13);
        }
        for (j, &x) in mesh.nodes().iter().enumerate() {
            assert_eq!(mesh.interpolate(&vals, x).unwrap(), vals[j]);
        }
    }

    #[test]
    fn extrapolation_is_rejected_by_default() {
        let mesh = chebyshev_mesh(4, -3.0, 0.0).unwrap();
        let vals = vec![1.0; 5];
        assert!(matches!(mesh.interpolate(&vals, 0.1), Err(SpectralError::Extrapolation { .. })));
        assert!((mesh.interpolate_with(&vals, 0.1, Extrapolation::Allow).unwrap() - 1.0).abs() < 1e-12);
        assert!(matches!(mesh.interpolate(&vals[..3], -1.0), Err(SpectralError::Length { .. })));
    }

    #[test]
    fn lagrange_derivative_cases() {
        let mesh = chebyshev_mesh(1, -1.0, 1.0).unwrap();
        for theta in [-1.0, -0.3, 0.0, 0.77, 1.0] {
            assert!((mesh.lagrange_derivative(0, theta).unwrap() - 0.5).abs() < 1e-15);
        }
        let mesh = chebyshev_mesh(9, -3.0, 0.0).unwrap();
        for (i, &x) in mesh.nodes().iter().enumerate() {
            for j in 0..=9 {
                assert_eq!(mesh.lagrange_derivative(j, x).unwrap(), mesh.diff()[(i, j)]);
            }
        }
        for theta in [-2.5, -1.0, -0.123] {
            let s: f64 = (0..=9).map(|j| mesh.lagrange_derivative(j, theta).unwrap()).sum();
            assert!(s.abs() < 1e-11);
            let row = mesh.lagrange_derivative_row(theta, Extrapolation::Reject).unwrap();
            for (j, r) in row.iter().enumerate() {
                assert!((r - mesh.lagrange_derivative(j, theta).unwrap()).abs() < 1e-12);
            }
        }
        assert!(matches!(mesh.lagrange_derivative(10, -1.0), Err(SpectralError::Index { .. })));
    }

    #[test]
    fn clenshaw_curtis_cases() {
        let mesh = chebyshev_mesh(7, -3.0, 0.0).unwrap();
        assert!((mesh.integrate(&[1.0; 8]).unwrap() - 3.0).abs() < 1e-14);
        let mesh = chebyshev_mesh(5, -1.0, 1.0).unwrap();
        let odd: Vec<f64> = mesh.nodes().to_vec();
        assert!(mesh.integrate(&odd).unwrap().abs() < 1e-14);
        let mesh = chebyshev_mesh(2, -1.0, 1.0).unwrap();
        let sq: Vec<f64> = mesh.nodes().iter().map(|t| t * t).collect();
        assert!((mesh.integrate(&sq).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_quadrature_of_exponential() {
        let mesh = chebyshev_mesh(16, -3.0, 0.0).unwrap();
        let vals: Vec<f64> = mesh.nodes().iter().map(|t| t.exp()).collect();
        let exact = 1.0 - (-3.0f64).exp();
        assert!((mesh.integrate(&vals).unwrap() - exact).abs() < 1e-12);
    }
}
