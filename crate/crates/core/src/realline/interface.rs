//! Spline-backed interface on a truncated line, flat at infinity.

use crate::error::{Error, Result};
use crate::realline::spline::CubicSpline;

/// Default tolerance for the flat-at-infinity check: |f| at the three
/// outermost nodes on each side must stay below this.
pub const DEFAULT_DECAY_TOL: f64 = 1e-6;

/// Interface graph on [-L, L], interpolated by a natural cubic spline and
/// extended by zero outside the domain.
#[derive(Debug, Clone)]
pub struct LineInterface {
    nodes: Vec<f64>,
    values: Vec<f64>,
    spline: CubicSpline,
    half_width: f64,
}

impl LineInterface {
    /// Build from nodes and samples. Nodes must be strictly increasing with
    /// endpoints at +-L; at least 8 of them.
    ///
    /// The decay invariant is checked separately (`check_decay`) at the call
    /// sites that rely on it, so that the spline itself stays usable for
    /// arbitrary data.
    pub fn build(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.len() < 8 {
            return Err(Error::Spline {
                reason: format!("need at least 8 nodes, got {}", nodes.len()),
            });
        }
        let last = *nodes.last().unwrap();
        let first = nodes[0];
        if !(last > 0.0) || (first + last).abs() > 1e-9 * last.max(1.0) {
            return Err(Error::Spline {
                reason: format!("endpoints must sit at -L and +L, got [{first}, {last}]"),
            });
        }
        let spline = CubicSpline::natural(&nodes, &values)?;
        Ok(Self {
            nodes,
            values,
            spline,
            half_width: last,
        })
    }

    /// Uniform nodes on [-L, L] sampling a closure.
    pub fn uniform(half_width: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Parameter {
                name: "half_width",
                value: half_width,
                expected: "(0, inf)",
            });
        }
        let nodes: Vec<f64> = (0..n)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
            .collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Self::build(nodes, values)
    }

    /// Uniform nodes on [-L, L] carrying precomputed samples.
    pub fn uniform_from_values(half_width: f64, values: Vec<f64>) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::Parameter {
                name: "half_width",
                value: half_width,
                expected: "(0, inf)",
            });
        }
        let n = values.len();
        if n < 8 {
            return Err(Error::Spline {
                reason: format!("need at least 8 nodes, got {n}"),
            });
        }
        let nodes: Vec<f64> = (0..n)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64)
            .collect();
        Self::build(nodes, values)
    }

    /// New samples on the same node set.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.nodes.len() {
            return Err(Error::SizeMismatch {
                left: values.len(),
                right: self.nodes.len(),
            });
        }
        let spline = CubicSpline::natural(&self.nodes, &values)?;
        Ok(Self {
            nodes: self.nodes.clone(),
            values,
            spline,
            half_width: self.half_width,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn spline(&self) -> &CubicSpline {
        &self.spline
    }

    /// f(x), zero outside [-L, L].
    pub fn value(&self, x: f64) -> f64 {
        if x.abs() > self.half_width {
            0.0
        } else {
            self.spline.value(x)
        }
    }

    /// f'(x), zero outside [-L, L].
    pub fn slope(&self, x: f64) -> f64 {
        if x.abs() > self.half_width {
            0.0
        } else {
            self.spline.deriv(x)
        }
    }

    pub fn curvature(&self, x: f64) -> f64 {
        if x.abs() > self.half_width {
            0.0
        } else {
            self.spline.second_deriv(x)
        }
    }

    pub fn min_spacing(&self) -> f64 {
        self.nodes
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Max of |f| over the nodes with its first index.
    pub fn max_abs(&self) -> (f64, usize) {
        let mut best = (0.0_f64, 0usize);
        for (i, &v) in self.values.iter().enumerate() {
            if v.abs() > best.0 {
                best = (v.abs(), i);
            }
        }
        best
    }

    /// Flat-at-infinity invariant: |f| at the 3 outermost nodes each side.
    pub fn check_decay(&self, tol: f64) -> Result<()> {
        let n = self.nodes.len();
        for &i in &[0, 1, 2, n - 3, n - 2, n - 1] {
            if self.values[i].abs() >= tol {
                return Err(Error::EdgeDecay {
                    value: self.values[i].abs(),
                    node: i,
                    tol,
                });
            }
        }
        Ok(())
    }

    /// Largest |f| and |f'| over the outermost nodes; feeds the truncation
    /// tail bounds.
    pub fn edge_envelope(&self) -> (f64, f64) {
        let n = self.nodes.len();
        let mut vmax = 0.0_f64;
        let mut smax = 0.0_f64;
        for &i in &[0, 1, 2, n - 3, n - 2, n - 1] {
            vmax = vmax.max(self.values[i].abs());
            smax = smax.max(self.spline.deriv(self.nodes[i]).abs());
        }
        (vmax, smax)
    }

    /// Index of the node closest to x, if within 1e-12.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&t| t < x);
        for cand in [i.saturating_sub(1), i] {
            if cand < self.nodes.len() && (self.nodes[cand] - x).abs() <= 1e-12 {
                return Some(cand);
            }
        }
        None
    }
}

/// Tolerances controlling the principal-value quadrature.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSettings {
    /// Absolute tolerance for the adaptive quadrature of one PV integral.
    pub abs_tol: f64,
    /// Half-width of the Taylor-desingularized cell around eta = 0.
    pub singular_halfwidth: f64,
    /// Truncation radius of the eta-integral.
    pub far_cutoff: f64,
    /// Budget for the flat-at-infinity modelling error. The evolution feeds
    /// algebraic tails (~ t / x^2) into the edge of the window, so this sits
    /// well above the quadrature tolerance; an evaluation whose edge-envelope
    /// tail bound exceeds it fails loudly instead of inventing physics.
    pub truncation_tol: f64,
}

impl QuadratureSettings {
    /// Defaults tied to the grid: cell = one node spacing, cutoff = 2L.
    pub fn for_interface(itf: &LineInterface) -> Self {
        Self {
            abs_tol: 1e-8,
            singular_halfwidth: itf.min_spacing(),
            far_cutoff: 2.0 * itf.half_width(),
            truncation_tol: 1e-3,
        }
    }

    pub fn validate(&self, itf: &LineInterface) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::Parameter {
                name: "abs_tol",
                value: self.abs_tol,
                expected: "(0, inf)",
            });
        }
        if !(self.truncation_tol > 0.0) {
            return Err(Error::Parameter {
                name: "truncation_tol",
                value: self.truncation_tol,
                expected: "(0, inf)",
            });
        }
        if !(self.singular_halfwidth > 0.0)
            || self.singular_halfwidth >= 2.0 * itf.min_spacing()
        {
            return Err(Error::Parameter {
                name: "singular_halfwidth",
                value: self.singular_halfwidth,
                expected: "(0, 2*min_spacing)",
            });
        }
        // The exterior tail cancellation needs |x| + L <= far_cutoff for
        // every node x.
        if !(self.far_cutoff >= 2.0 * itf.half_width()) {
            return Err(Error::Parameter {
                name: "far_cutoff",
                value: self.far_cutoff,
                expected: "[2*half_width, inf)",
            });
        }
        Ok(())
    }
}
