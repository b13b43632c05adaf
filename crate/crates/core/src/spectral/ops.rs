//! Fourier-multiplier operators on periodic fields.
//!
//! All nonlocal operators are exact multipliers on the discrete spectrum:
//! `Lambda^s -> |k|^s`, `H -> -i sgn(k)`, `d/dx -> ik`, and the linear
//! semigroup `e^{-t c Lambda} -> e^{-t c |k|}`. Operators with an odd symbol
//! zero the unmatched Nyquist mode k = -n/2 so that real fields stay real.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::{to_field, to_spectrum, wavenumber, PeriodicField};

fn apply_multiplier(
    field: &PeriodicField,
    mut symbol: impl FnMut(i64) -> Complex64,
    zero_nyquist: bool,
) -> Result<PeriodicField> {
    let n = field.n();
    let mut spec = to_spectrum(field)?;
    for i in 0..n {
        let k = wavenumber(n, i);
        let m = if zero_nyquist && k == -(n as i64) / 2 {
            Complex64::new(0.0, 0.0)
        } else {
            symbol(k)
        };
        spec.coeffs_mut()[i] *= m;
    }
    to_field(&spec)
}

/// Fractional Laplacian `Lambda^s f`, multiplier |k|^s, s in (0, 2].
pub fn lambda_op(field: &PeriodicField, s: f64) -> Result<PeriodicField> {
    if !(s > 0.0 && s <= 2.0) {
        return Err(Error::Parameter {
            name: "s",
            value: s,
            expected: "(0, 2]",
        });
    }
    apply_multiplier(
        field,
        |k| Complex64::new((k as f64).abs().powf(s), 0.0),
        false,
    )
}

/// Hilbert transform, multiplier -i sgn(k); the mean is annihilated.
pub fn hilbert(field: &PeriodicField) -> Result<PeriodicField> {
    apply_multiplier(
        field,
        |k| Complex64::new(0.0, -(k.signum() as f64)),
        true,
    )
}

/// Spectral derivative, multiplier ik.
pub fn derivative(field: &PeriodicField) -> Result<PeriodicField> {
    apply_multiplier(field, |k| Complex64::new(0.0, k as f64), true)
}

/// Spectral second derivative, multiplier -k^2.
pub fn second_derivative(field: &PeriodicField) -> Result<PeriodicField> {
    apply_multiplier(field, |k| Complex64::new(-((k * k) as f64), 0.0), false)
}

/// Linear semigroup `e^{-t c Lambda} f`. At t = 0 this is the identity,
/// returned without a transform so it is bit-exact.
pub fn semigroup(field: &PeriodicField, t: f64, c: f64) -> Result<PeriodicField> {
    if t < 0.0 || !t.is_finite() {
        return Err(Error::Parameter {
            name: "t",
            value: t,
            expected: "[0, inf)",
        });
    }
    if !(c > 0.0) {
        return Err(Error::Parameter {
            name: "c",
            value: c,
            expected: "(0, inf)",
        });
    }
    if t == 0.0 {
        return Ok(field.clone());
    }
    apply_multiplier(
        field,
        |k| Complex64::new((-t * c * (k as f64).abs()).exp(), 0.0),
        false,
    )
}

/// Homogeneous Sobolev seminorm `||f||_{H^s}` (dot), s in [0, 4].
///
/// Parseval on the 2*pi torus: `||f||^2 = 2*pi * sum_{k != 0} |k|^{2s} |c_k|^2`;
/// at s = 0 this is the L2 norm of the zero-mean part.
pub fn sobolev_seminorm(field: &PeriodicField, s: f64) -> Result<f64> {
    if !(0.0..=4.0).contains(&s) {
        return Err(Error::Parameter {
            name: "s",
            value: s,
            expected: "[0, 4]",
        });
    }
    let spec = to_spectrum(field)?;
    let n = field.n();
    let mut sum = 0.0;
    for i in 0..n {
        let k = wavenumber(n, i);
        if k == 0 {
            continue;
        }
        sum += (k as f64).abs().powf(2.0 * s) * spec.coeffs()[i].norm_sqr();
    }
    Ok((2.0 * std::f64::consts::PI * sum).sqrt())
}

/// Full L2 norm (mean included) via Parseval.
pub fn l2_norm(field: &PeriodicField) -> f64 {
    let n = field.n() as f64;
    let sum: f64 = field.values().iter().map(|v| v * v).sum();
    (2.0 * std::f64::consts::PI * sum / n).sqrt()
}

/// 2/3-rule filter: zero every mode with |k| > n/3.
///
/// Used after the pointwise quotient nonlinearities, which alias badly at
/// moderate resolutions.
pub fn dealias(field: &PeriodicField) -> Result<PeriodicField> {
    let cut = field.n() as i64 / 3;
    apply_multiplier(
        field,
        |k| {
            if k.abs() > cut {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        },
        false,
    )
}
