//! Shared oracles for the integration tests.
//!
//! Everything here deliberately avoids the implementation paths it checks:
//! dense DFT matrices are built from trig sums, and principal values are
//! integrated with a plain midpoint rule that never touches eta = 0.

use muskat_core::realline::LineInterface;
use muskat_core::spectral::PeriodicField;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random band-limited field: modes |k| <= n/4 with coefficients in
/// [-1, 1] / (1 + k^2).
pub fn random_band_limited(n: usize, seed: u64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kmax = n / 4;
    let mut amps = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let a: f64 = rng.gen_range(-1.0..1.0);
        let b: f64 = rng.gen_range(-1.0..1.0);
        let damp = 1.0 / (1.0 + (k * k) as f64);
        amps.push((a * damp, b * damp));
    }
    let mean: f64 = rng.gen_range(-0.5..0.5);
    PeriodicField::from_fn(n, "f", |x| {
        let mut v = mean;
        for (k, (a, b)) in amps.iter().enumerate() {
            let kk = (k + 1) as f64;
            v += a * (kk * x).cos() + b * (kk * x).sin();
        }
        v
    })
    .unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Dense real matrices of the discrete multiplier operators at size n,
/// assembled entry-by-entry from the inverse/forward trig sums.
pub struct DenseOperators {
    pub lambda: Vec<Vec<f64>>,
    pub hilbert: Vec<Vec<f64>>,
    pub derivative: Vec<Vec<f64>>,
}

impl DenseOperators {
    pub fn build(n: usize) -> Self {
        let node = |j: usize| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / n as f64;
        let mut lambda = vec![vec![0.0; n]; n];
        let mut hilbert = vec![vec![0.0; n]; n];
        let mut derivative = vec![vec![0.0; n]; n];
        // entry (j, m) = (1/n) sum_k symbol(k) e^{ik(x_j - x_m)}, real part
        for j in 0..n {
            for m in 0..n {
                let dx = node(j) - node(m);
                let mut lam = 0.0;
                let mut hil = 0.0;
                let mut der = 0.0;
                for idx in 0..n {
                    let k = if idx < n / 2 {
                        idx as i64
                    } else {
                        idx as i64 - n as i64
                    };
                    let kf = k as f64;
                    let (c, s) = ((kf * dx).cos(), (kf * dx).sin());
                    // |k| (real symbol)
                    lam += kf.abs() * c;
                    // -i sgn(k): real part of -i sgn(k) e^{ik dx} = sgn(k) sin(k dx);
                    // the unmatched Nyquist mode is dropped as in the implementation
                    if k != -(n as i64) / 2 {
                        hil += kf.signum() * s;
                        // ik: real part = -k sin(k dx)
                        der += -kf * s;
                    }
                }
                lambda[j][m] = lam / n as f64;
                hilbert[j][m] = hil / n as f64;
                derivative[j][m] = der / n as f64;
            }
        }
        Self {
            lambda,
            hilbert,
            derivative,
        }
    }

    pub fn apply(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        m.iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Midpoint-rule principal value of a kernel built on the same interface:
/// `sum K(eta_i) * h` over [-r, r] with an even number of cells, so no
/// abscissa lands on eta = 0 and the odd part cancels in pairs.
pub fn midpoint_pv(kernel: impl Fn(f64) -> f64, r: f64, cells: usize) -> f64 {
    assert!(cells % 2 == 0);
    let h = 2.0 * r / cells as f64;
    let mut sum = 0.0;
    for i in 0..cells {
        let eta = -r + h * (i as f64 + 0.5);
        sum += kernel(eta);
    }
    sum * h
}

/// Deep-water kernel on an interface, for the midpoint oracle.
pub fn deep_kernel_at(itf: &LineInterface, x: f64) -> impl Fn(f64) -> f64 + '_ {
    let fx = itf.value(x);
    let sx = itf.slope(x);
    move |eta: f64| {
        let df = fx - itf.value(x - eta);
        let ds = sx - itf.slope(x - eta);
        ds * eta / (eta * eta + df * df)
    }
}

/// Confined two-kernel sum on an interface, for the midpoint oracle.
pub fn confined_kernel_at(itf: &LineInterface, x: f64) -> impl Fn(f64) -> f64 + '_ {
    let fx = itf.value(x);
    let sx = itf.slope(x);
    move |eta: f64| {
        let fy = itf.value(x - eta);
        let sy = itf.slope(x - eta);
        let k1 = (sx - sy) * eta.sinh() / (eta.cosh() - (fx - fy).cos());
        let k2 = (sx + sy) * eta.sinh() / (eta.cosh() + (fx + fy).cos());
        k1 + k2
    }
}

/// Flat Zygmund kernel (without the 1/pi), for the midpoint oracle.
pub fn flat_lambda_kernel_at(itf: &LineInterface, x: f64) -> impl Fn(f64) -> f64 + '_ {
    let fx = itf.value(x);
    move |eta: f64| (fx - itf.value(x - eta)) / (eta * eta)
}
