//! Periodic pseudo-spectral backend: grid fields, FFT, multiplier operators.

mod field;
mod ops;

pub use field::{to_field, to_spectrum, PeriodicField, Spectrum};
pub use ops::{
    dealias, derivative, hilbert, l2_norm, lambda_op, second_derivative, semigroup,
    sobolev_seminorm,
};
