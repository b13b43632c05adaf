//! Natural cubic splines on an arbitrary strictly increasing node set.

use crate::error::{Error, Result};

/// Piecewise cubic with zero second derivative at both ends.
///
/// Interval i stores (a, b, c, d) with
/// `s(x) = a + b*dx + c*dx^2 + d*dx^3`, `dx = x - nodes[i]`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    nodes: Vec<f64>,
    coeffs: Vec<[f64; 4]>,
}

impl CubicSpline {
    pub fn natural(nodes: &[f64], values: &[f64]) -> Result<Self> {
        let n = nodes.len();
        if n != values.len() {
            return Err(Error::SizeMismatch {
                left: n,
                right: values.len(),
            });
        }
        if n < 3 {
            return Err(Error::Spline {
                reason: format!("need at least 3 nodes, got {n}"),
            });
        }
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Spline {
                    reason: format!("nodes not strictly increasing near x = {}", w[0]),
                });
            }
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || !nodes[i].is_finite() {
                return Err(Error::Spline {
                    reason: format!("non-finite data at node {i}"),
                });
            }
        }

        // Second-derivative (moment) formulation, natural ends M_0 = M_{n-1} = 0.
        let h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let m = solve_moments(&h, values);

        let mut coeffs = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let hi = h[i];
            let a = values[i];
            let b = (values[i + 1] - values[i]) / hi - hi * (2.0 * m[i] + m[i + 1]) / 6.0;
            let c = m[i] / 2.0;
            let d = (m[i + 1] - m[i]) / (6.0 * hi);
            coeffs.push([a, b, c, d]);
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            coeffs,
        })
    }

    fn interval(&self, x: f64) -> usize {
        // partition_point returns the count of nodes <= x; clamp to a valid interval
        let idx = self.nodes.partition_point(|&t| t <= x);
        idx.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let dx = x - self.nodes[i];
        let [a, b, c, d] = self.coeffs[i];
        a + dx * (b + dx * (c + dx * d))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let dx = x - self.nodes[i];
        let [_, b, c, d] = self.coeffs[i];
        b + dx * (2.0 * c + dx * 3.0 * d)
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        let i = self.interval(x);
        let dx = x - self.nodes[i];
        let [_, _, c, d] = self.coeffs[i];
        2.0 * c + 6.0 * d * dx
    }

    /// Third derivative on the interval right of node i (piecewise constant).
    pub fn third_deriv_right(&self, i: usize) -> f64 {
        6.0 * self.coeffs[i.min(self.coeffs.len() - 1)][3]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }
}

/// Tridiagonal solve for the interior moments (Thomas algorithm).
fn solve_moments(h: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut m = vec![0.0; n];
    if n == 3 {
        let rhs = (values[2] - values[1]) / h[1] - (values[1] - values[0]) / h[0];
        m[1] = 3.0 * rhs / (h[0] + h[1]);
        return m;
    }
    let interior = n - 2;
    let mut diag = vec![0.0; interior];
    let mut upper = vec![0.0; interior];
    let mut rhs = vec![0.0; interior];
    for i in 0..interior {
        diag[i] = (h[i] + h[i + 1]) / 3.0;
        upper[i] = h[i + 1] / 6.0;
        rhs[i] = (values[i + 2] - values[i + 1]) / h[i + 1] - (values[i + 1] - values[i]) / h[i];
    }
    // forward sweep; the lower diagonal at row i is h[i]/6
    for i in 1..interior {
        let w = (h[i] / 6.0) / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    m[interior] = rhs[interior - 1] / diag[interior - 1];
    for i in (1..interior).rev() {
        m[i] = (rhs[i - 1] - upper[i - 1] * m[i + 1]) / diag[i - 1];
    }
    m
}
