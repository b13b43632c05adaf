//! Periodic grid fields and their discrete Fourier representation.
//!
//! Fields live on the uniform grid `x_j = -pi + 2*pi*j/n`, `j = 0..n-1`,
//! over the 2*pi-periodic torus. Spectra store the coefficients `c_k` of
//! `f(x) = sum_k c_k e^{ikx}` for `k in {-n/2, ..., n/2-1}`, kept in FFT
//! storage order. With that convention `c_0` is the grid mean and the
//! forward/inverse pair round-trips exactly up to rounding.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

thread_local! {
    static PLANS: RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> = RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cache| {
        cache
            .borrow_mut()
            .entry((n, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                if forward {
                    planner.plan_fft_forward(n)
                } else {
                    planner.plan_fft_inverse(n)
                }
            })
            .clone()
    })
}

/// Real samples of a field on the uniform periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    n: usize,
    values: Vec<f64>,
    label: String,
}

impl PeriodicField {
    /// Wrap raw samples, rejecting bad grid sizes and non-finite entries.
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        let n = values.len();
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::BadGridSize { n });
        }
        for (node, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    label,
                    node,
                    value: v,
                });
            }
        }
        Ok(Self { n, values, label })
    }

    /// Sample a closure on the grid nodes.
    pub fn from_fn(n: usize, label: impl Into<String>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..n).map(|j| f(node(n, j))).collect();
        Self::new(values, label)
    }

    pub fn zeros(n: usize, label: impl Into<String>) -> Result<Self> {
        Self::new(vec![0.0; n], label)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Grid node `x_j = -pi + 2*pi*j/n`.
    pub fn node(&self, j: usize) -> f64 {
        node(self.n, j)
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.node(j))
    }

    /// Same grid and label, new samples.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.n {
            return Err(Error::SizeMismatch {
                left: values.len(),
                right: self.n,
            });
        }
        Self::new(values, self.label.clone())
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n as f64
    }

    /// Max of |f| with the first node attaining it.
    pub fn max_abs(&self) -> (f64, usize) {
        let mut best = (0.0_f64, 0usize);
        for (j, &v) in self.values.iter().enumerate() {
            if v.abs() > best.0 {
                best = (v.abs(), j);
            }
        }
        best
    }

    /// (min, argmin, max, argmax) over the nodes, lowest index wins ties.
    pub fn min_max(&self) -> (f64, usize, f64, usize) {
        let mut min = (self.values[0], 0usize);
        let mut max = (self.values[0], 0usize);
        for (j, &v) in self.values.iter().enumerate().skip(1) {
            if v < min.0 {
                min = (v, j);
            }
            if v > max.0 {
                max = (v, j);
            }
        }
        (min.0, min.1, max.0, max.1)
    }

    /// Sup-norm distance to the even part: max_j |f(x_j) - f(-x_j)| / 2.
    ///
    /// The grid maps x_j -> -x_j onto node (n - j) mod n, so the reflection
    /// is exact.
    pub fn even_residual(&self) -> f64 {
        self.reflect_residual(1.0)
    }

    /// Sup-norm distance to the odd part: max_j |f(x_j) + f(-x_j)| / 2.
    pub fn odd_residual(&self) -> f64 {
        self.reflect_residual(-1.0)
    }

    fn reflect_residual(&self, sign: f64) -> f64 {
        let mut worst = 0.0_f64;
        for j in 0..self.n {
            let jr = (self.n - j) % self.n;
            let r = (self.values[j] - sign * self.values[jr]).abs() / 2.0;
            worst = worst.max(r);
        }
        worst
    }
}

pub(crate) fn node(n: usize, j: usize) -> f64 {
    -PI + 2.0 * PI * j as f64 / n as f64
}

/// Discrete Fourier coefficients of a real periodic field.
#[derive(Debug, Clone)]
pub struct Spectrum {
    n: usize,
    /// FFT storage order: index i holds wavenumber i for i < n/2, i - n otherwise.
    coeffs: Vec<Complex64>,
    label: String,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Wavenumber stored at index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        wavenumber(self.n, i)
    }

    /// Coefficient of `e^{ikx}` for k in {-n/2, ..., n/2-1}.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let half = (self.n / 2) as i64;
        assert!(k >= -half && k < half, "wavenumber {k} out of range");
        let i = if k >= 0 { k as usize } else { (k + self.n as i64) as usize };
        self.coeffs[i]
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub(crate) fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }
}

pub(crate) fn wavenumber(n: usize, i: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Forward transform; `c_0` equals the grid mean and the pair
/// `to_field(to_spectrum(f))` reproduces `f` to rounding.
pub fn to_spectrum(field: &PeriodicField) -> Result<Spectrum> {
    // Re-validate: fields are only constructible in a valid state, but the
    // diagnostic that names the offending node belongs to this operation.
    for (node, &v) in field.values().iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFinite {
                label: field.label().to_string(),
                node,
                value: v,
            });
        }
    }
    let n = field.n();
    let mut buf: Vec<Complex64> = field
        .values()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    plan(n, true).process(&mut buf);
    // The grid starts at -pi, not 0, so the plain DFT picks up a phase
    // (-1)^k relative to the coefficients of e^{ikx}.
    let scale = 1.0 / n as f64;
    for (i, c) in buf.iter_mut().enumerate() {
        let k = wavenumber(n, i);
        let phase = if k & 1 == 0 { 1.0 } else { -1.0 };
        *c *= phase * scale;
    }
    Ok(Spectrum {
        n,
        coeffs: buf,
        label: field.label().to_string(),
    })
}

/// Inverse transform back to grid samples.
pub fn to_field(spectrum: &Spectrum) -> Result<PeriodicField> {
    let n = spectrum.n;
    let mut buf: Vec<Complex64> = spectrum
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let k = wavenumber(n, i);
            if k & 1 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    plan(n, false).process(&mut buf);
    let values = buf.iter().map(|c| c.re).collect();
    PeriodicField::new(values, spectrum.label.clone())
}
