//! Truncated-line backend: cubic splines, adaptive Lobatto quadrature,
//! principal-value kernels, and discrete norms.

mod interface;
mod lobatto;
pub mod norms;
mod pv;
mod spline;

pub use interface::{LineInterface, QuadratureSettings, DEFAULT_DECAY_TOL};
pub use lobatto::adaptive_lobatto;
pub use pv::{lambda_flat, pv_integral_confined, pv_integral_deep};
pub use spline::CubicSpline;

use crate::error::Result;

/// Spec-level constructor: natural cubic spline through (nodes, values).
pub fn build_spline(nodes: Vec<f64>, values: Vec<f64>) -> Result<LineInterface> {
    LineInterface::build(nodes, values)
}
