//! Lyapunov exponents of renewal and delay equations via pseudospectral
//! collocation and the discrete QR method.

// Checks like `!(x > 0.0)` are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod dqr;
pub mod linearize;
pub mod linalg;
pub mod models;
pub mod odeint;
pub mod oracle;
pub mod spectral;
pub mod cli;
