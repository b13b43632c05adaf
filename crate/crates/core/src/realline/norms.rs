//! Norms on the truncated line.
//!
//! L2 and H1 use composite Simpson on the node grid; the H^{1/2} seminorm
//! uses the difference-quotient double integral
//! `||f||^2 = (1/2pi) iint ((f(x)-f(y))/(x-y))^2 dx dy`
//! over the data window, with the diagonal handled by its continuous limit
//! f'(x)^2. The 1/2pi normalization matches the Fourier-multiplier
//! definition of the seminorm.

use crate::error::{Error, Result};
use crate::realline::interface::LineInterface;

/// Composite Simpson weights on a uniform grid; an odd interval count gets
/// a 3/8 panel at the right end.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 4);
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    let simpson_end = if intervals % 2 == 0 { n - 1 } else { n - 4 };
    let mut i = 0;
    while i + 2 <= simpson_end {
        w[i] += h / 3.0;
        w[i + 1] += 4.0 * h / 3.0;
        w[i + 2] += h / 3.0;
        i += 2;
    }
    if intervals % 2 != 0 {
        let c = 3.0 * h / 8.0;
        w[n - 4] += c;
        w[n - 3] += 3.0 * c;
        w[n - 2] += 3.0 * c;
        w[n - 1] += c;
    }
    w
}

fn uniform_spacing(itf: &LineInterface) -> Result<f64> {
    let nodes = itf.nodes();
    let h = nodes[1] - nodes[0];
    for w in nodes.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h {
            return Err(Error::Invalid(
                "line norms require a uniform node grid".into(),
            ));
        }
    }
    Ok(h)
}

/// Simpson quadrature of a nodewise integrand.
pub fn integrate_nodes(itf: &LineInterface, values: &[f64]) -> Result<f64> {
    if values.len() != itf.len() {
        return Err(Error::SizeMismatch {
            left: values.len(),
            right: itf.len(),
        });
    }
    let h = uniform_spacing(itf)?;
    let w = simpson_weights(itf.len(), h);
    Ok(w.iter().zip(values).map(|(wi, vi)| wi * vi).sum())
}

pub fn l2_norm(itf: &LineInterface) -> Result<f64> {
    let sq: Vec<f64> = itf.values().iter().map(|v| v * v).collect();
    Ok(integrate_nodes(itf, &sq)?.max(0.0).sqrt())
}

/// H1 seminorm: Simpson of the squared spline slope at the nodes.
pub fn h1_seminorm(itf: &LineInterface) -> Result<f64> {
    let sq: Vec<f64> = itf
        .nodes()
        .iter()
        .map(|&x| {
            let s = itf.slope(x);
            s * s
        })
        .collect();
    Ok(integrate_nodes(itf, &sq)?.max(0.0).sqrt())
}

/// H^{1/2} seminorm through the difference-quotient double integral.
pub fn hhalf_seminorm(itf: &LineInterface) -> Result<f64> {
    let h = uniform_spacing(itf)?;
    let n = itf.len();
    let nodes = itf.nodes();
    let vals = itf.values();
    // trapezoid weights in each direction
    let wt = |i: usize| if i == 0 || i == n - 1 { 0.5 * h } else { h };
    let mut total = 0.0;
    for i in 0..n {
        let wi = wt(i);
        let mut row = 0.0;
        for j in 0..n {
            let f = if i == j {
                let s = itf.slope(nodes[i]);
                s * s
            } else {
                let q = (vals[i] - vals[j]) / (nodes[i] - nodes[j]);
                q * q
            };
            row += wt(j) * f;
        }
        total += wi * row;
    }
    Ok((total / (2.0 * std::f64::consts::PI)).max(0.0).sqrt())
}

pub fn linf_norm(itf: &LineInterface) -> (f64, usize) {
    itf.max_abs()
}
