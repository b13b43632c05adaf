//! Error type shared by all solver components.

/// Everything that can go wrong inside the solver core.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("non-finite value {value} in field '{label}' at node {node}")]
    NonFinite {
        label: String,
        node: usize,
        value: f64,
    },

    #[error("grid size {n} must be a power of two with n >= 8")]
    BadGridSize { n: usize },

    #[error("parameter {name} = {value} is outside {expected}")]
    Parameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("size mismatch: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },

    #[error("spline construction failed: {reason}")]
    Spline { reason: String },

    #[error("quadrature did not converge on [{a:.6e}, {b:.6e}]: cell error {err:.3e} > {tol:.3e}")]
    Quadrature { a: f64, b: f64, err: f64, tol: f64 },

    #[error("truncation tail bound {bound:.3e} exceeds quadrature tolerance {tol:.3e}; enlarge the domain")]
    TailBound { bound: f64, tol: f64 },

    #[error("interface decay violated at node {node}: |f| = {value:.3e} > {tol:.1e}")]
    EdgeDecay { value: f64, node: usize, tol: f64 },

    #[error("state not admissible: max|f| = {max_abs:.12e} at node {node} (limit {limit:.12e})")]
    Admissibility {
        max_abs: f64,
        node: usize,
        limit: f64,
    },

    #[error("interface too close to the boundary: max|f| = {max_abs:.12e} at node {node} (limit {limit:.12e})")]
    BoundaryProximity {
        max_abs: f64,
        node: usize,
        limit: f64,
    },

    #[error("time step underflow: dt = {dt:.3e} fell below dt_min = {dt_min:.3e}")]
    DtUnderflow { dt: f64, dt_min: f64 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
