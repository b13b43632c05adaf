//! Right-hand sides checked against a dense DFT-matrix assembly at n = 64.
//!
//! The oracle applies the same pointwise formulas but realizes every
//! nonlocal operator through the dense trig-sum matrices, with no FFT and
//! no dealiasing on either side.

mod common;

use common::{max_abs_diff, random_band_limited, DenseOperators};
use muskat_core::models::{
    nonlinearity_nl, rhs_confined_model, rhs_deep_model, rhs_deep_model_derivative,
    EvalOptions,
};
use muskat_core::spectral::PeriodicField;
use std::f64::consts::FRAC_PI_2;

const N: usize = 64;

fn no_filter() -> EvalOptions {
    EvalOptions {
        dealias: false,
        allow_boundary_touch: false,
    }
}

#[test]
fn confined_model_matches_dense_assembly() {
    let dense = DenseOperators::build(N);
    let l = FRAC_PI_2;
    let f = PeriodicField::from_fn(N, "f", |x| 0.5 * x.cos()).unwrap();
    let got = rhs_confined_model(&f, l, &no_filter()).unwrap();
    let fx = DenseOperators::apply(&dense.derivative, f.values());
    let lam = DenseOperators::apply(&dense.lambda, f.values());
    let want: Vec<f64> = f
        .values()
        .iter()
        .zip(&fx)
        .zip(&lam)
        .map(|((&v, &s), &lv)| (-1.0 / (1.0 + s * s) + 1.0 / (1.0 + l * l - v * v)) * lv)
        .collect();
    assert!(max_abs_diff(got.values(), &want) < 1e-10);
}

#[test]
fn g_equation_matches_dense_assembly() {
    let dense = DenseOperators::build(N);
    let g = PeriodicField::from_fn(N, "g", |x| 0.5 + 0.1 * x.cos()).unwrap();
    let eps = 0.01;
    let got = rhs_deep_model_derivative(&g, eps, &no_filter()).unwrap();

    let lam = DenseOperators::apply(&dense.lambda, g.values());
    let hg = DenseOperators::apply(&dense.hilbert, g.values());
    let flux: Vec<f64> = g
        .values()
        .iter()
        .zip(&hg)
        .map(|(&v, &h)| v * v * h / (1.0 + v * v))
        .collect();
    let flux_x = DenseOperators::apply(&dense.derivative, &flux);
    // dense second derivative = D applied twice
    let gx = DenseOperators::apply(&dense.derivative, g.values());
    let gxx = DenseOperators::apply(&dense.derivative, &gx);
    let want: Vec<f64> = lam
        .iter()
        .zip(&flux_x)
        .zip(&gxx)
        .map(|((&lv, &fx), &d2)| -lv + fx + eps * d2)
        .collect();
    assert!(max_abs_diff(got.values(), &want) < 1e-10);
}

#[test]
fn deep_model_matches_dense_assembly() {
    let dense = DenseOperators::build(N);
    for seed in [5u64, 21] {
        let f = random_band_limited(N, seed);
        let got = rhs_deep_model(&f, &no_filter()).unwrap();
        let fx = DenseOperators::apply(&dense.derivative, f.values());
        let lam = DenseOperators::apply(&dense.lambda, f.values());
        let want: Vec<f64> = fx
            .iter()
            .zip(&lam)
            .map(|(&s, &lv)| -lv / (1.0 + s * s))
            .collect();
        assert!(max_abs_diff(got.values(), &want) < 1e-10, "seed {seed}");
    }
}

#[test]
fn duhamel_split_holds_for_100_random_admissible_fields() {
    use muskat_core::models::coefficient_c_l;
    use muskat_core::spectral::lambda_op;
    let l = FRAC_PI_2;
    let cl = coefficient_c_l(l);
    for seed in 0..100 {
        // scale amplitudes into the strip
        let raw = random_band_limited(128, 31000 + seed);
        let max = raw.values().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale = 0.8 * l / max.max(1e-9);
        let f = raw
            .with_values(raw.values().iter().map(|v| v * scale).collect())
            .unwrap();
        let opts = no_filter();
        let rhs = rhs_confined_model(&f, l, &opts).unwrap();
        let nl = nonlinearity_nl(&f, l, &opts).unwrap();
        let lam = lambda_op(&f, 1.0).unwrap();
        let worst = rhs
            .values()
            .iter()
            .zip(nl.values())
            .zip(lam.values())
            .map(|((&r, &n), &lv)| (r - (-cl * lv + n)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "seed {seed}: split residual {worst:e}");
    }
}
