//! Time integrators: classical RK4, embedded Dormand-Prince 5(4), and an
//! exponential (Duhamel) stepper for the confined model.

use crate::error::{Error, Result};
use crate::models::{coefficient_c_l, nonlinearity_nl, EvalOptions};
use crate::spectral::{semigroup, PeriodicField};

/// Step-size policy of a run.
#[derive(Debug, Clone, Copy)]
pub enum Stepping {
    Fixed {
        dt: f64,
    },
    Adaptive {
        tol_rel: f64,
        tol_abs: f64,
        dt_min: f64,
        dt_max: f64,
        /// Starting step; clamped into [dt_min, dt_max].
        dt_init: f64,
    },
}

#[derive(Debug, Clone, Copy)]
pub struct StepController {
    pub stepping: Stepping,
    pub t_end: f64,
    /// Step-size safety factor of the accept/reject controller.
    pub safety: f64,
}

impl StepController {
    pub fn fixed(dt: f64, t_end: f64) -> Self {
        Self {
            stepping: Stepping::Fixed { dt },
            t_end,
            safety: 0.9,
        }
    }

    pub fn adaptive(tol_rel: f64, tol_abs: f64, t_end: f64) -> Self {
        Self {
            stepping: Stepping::Adaptive {
                tol_rel,
                tol_abs,
                dt_min: 1e-12,
                dt_max: 0.1,
                dt_init: 1e-3,
            },
            t_end,
            safety: 0.9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end >= 0.0) {
            return Err(Error::Parameter {
                name: "t_end",
                value: self.t_end,
                expected: "[0, inf)",
            });
        }
        if !(self.safety > 0.0 && self.safety < 1.0) {
            return Err(Error::Parameter {
                name: "safety",
                value: self.safety,
                expected: "(0, 1)",
            });
        }
        match self.stepping {
            Stepping::Fixed { dt } => {
                if !(dt > 0.0) {
                    return Err(Error::Parameter {
                        name: "dt",
                        value: dt,
                        expected: "(0, inf)",
                    });
                }
            }
            Stepping::Adaptive {
                tol_rel,
                tol_abs,
                dt_min,
                dt_max,
                dt_init,
            } => {
                for (name, v) in [
                    ("tol_rel", tol_rel),
                    ("tol_abs", tol_abs),
                    ("dt_min", dt_min),
                    ("dt_max", dt_max),
                    ("dt_init", dt_init),
                ] {
                    if !(v > 0.0) {
                        return Err(Error::Parameter {
                            name,
                            value: v,
                            expected: "(0, inf)",
                        });
                    }
                }
                if dt_min > dt_max {
                    return Err(Error::Parameter {
                        name: "dt_min",
                        value: dt_min,
                        expected: "<= dt_max",
                    });
                }
            }
        }
        Ok(())
    }
}

/// One classical RK4 step. The state is a flat vector; the step is not
/// committed if any stage evaluation fails.
pub fn rk4_step<F>(y: &[f64], rhs: &mut F, dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = y.len();
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, &k1, 0.5 * dt))?;
    let k3 = rhs(&axpy(y, &k2, 0.5 * dt))?;
    let k4 = rhs(&axpy(y, &k3, dt))?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    Ok(out)
}

fn axpy(y: &[f64], k: &[f64], a: f64) -> Vec<f64> {
    y.iter().zip(k).map(|(&yi, &ki)| yi + a * ki).collect()
}

/// Result of one accepted embedded step.
#[derive(Debug, Clone)]
pub struct Rk45Outcome {
    pub y: Vec<f64>,
    /// Step actually taken.
    pub dt_used: f64,
    /// Proposal for the next step.
    pub dt_next: f64,
    /// Mixed error norm of the accepted step (<= 1).
    pub error_estimate: f64,
    /// Attempts rejected before acceptance.
    pub rejections: u32,
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 5.0;

/// One accepted Dormand-Prince 5(4) step starting from proposal `dt`.
/// Rejected attempts shrink the step; dropping below `dt_min` is the
/// blow-up exit for unstable-regime runs.
pub fn rk45_step<F>(y: &[f64], rhs: &mut F, dt: f64, ctrl: &StepController) -> Result<Rk45Outcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let (tol_rel, tol_abs, dt_min, dt_max) = match ctrl.stepping {
        Stepping::Adaptive {
            tol_rel,
            tol_abs,
            dt_min,
            dt_max,
            ..
        } => (tol_rel, tol_abs, dt_min, dt_max),
        Stepping::Fixed { .. } => {
            return Err(Error::Invalid(
                "rk45_step needs an adaptive controller".into(),
            ))
        }
    };
    let n = y.len();
    let mut dt = dt.clamp(dt_min, dt_max);
    let mut rejections = 0u32;
    let _ = C; // stage times are unused: the right-hand sides are autonomous

    loop {
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(rhs(y)?);
        for s in 0..6 {
            let mut stage = y.to_vec();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..n {
                        stage[i] += dt * a * kj[i];
                    }
                }
            }
            k.push(rhs(&stage)?);
        }

        let mut y5 = y.to_vec();
        let mut y4 = y.to_vec();
        for (j, kj) in k.iter().enumerate() {
            for i in 0..n {
                y5[i] += dt * B5[j] * kj[i];
                y4[i] += dt * B4[j] * kj[i];
            }
        }

        let mut err_sq = 0.0;
        for i in 0..n {
            let scale = tol_abs + tol_rel * y[i].abs().max(y5[i].abs());
            let e = (y5[i] - y4[i]) / scale;
            err_sq += e * e;
        }
        let err = (err_sq / n as f64).sqrt();

        // step-size law with exponent 1/5; an overflowed estimate counts as
        // a hard reject
        let factor = if err == 0.0 {
            FAC_MAX
        } else if !err.is_finite() {
            FAC_MIN
        } else {
            (ctrl.safety * err.powf(-0.2)).clamp(FAC_MIN, FAC_MAX)
        };

        if err <= 1.0 {
            let dt_next = (dt * factor).clamp(dt_min, dt_max);
            return Ok(Rk45Outcome {
                y: y5,
                dt_used: dt,
                dt_next,
                error_estimate: err,
                rejections,
            });
        }

        let dt_new = dt * factor;
        if dt_new < dt_min {
            return Err(Error::DtUnderflow {
                dt: dt_new,
                dt_min,
            });
        }
        dt = dt_new;
        rejections += 1;
    }
}

/// One exponential-integrator step for the confined model:
/// `f <- e^{-dt C_l Lambda} f + dt e^{-(dt/2) C_l Lambda} NL(f)`
/// (midpoint-weighted quadrature of the Duhamel integral).
pub fn duhamel_step(
    f: &PeriodicField,
    l: f64,
    dt: f64,
    opts: &EvalOptions,
) -> Result<PeriodicField> {
    if !(dt > 0.0) {
        return Err(Error::Parameter {
            name: "dt",
            value: dt,
            expected: "(0, inf)",
        });
    }
    let cl = coefficient_c_l(l);
    let linear = semigroup(f, dt, cl)?;
    let nl = nonlinearity_nl(f, l, opts)?;
    let propagated = semigroup(&nl, 0.5 * dt, cl)?;
    let out: Vec<f64> = linear
        .values()
        .iter()
        .zip(propagated.values())
        .map(|(&a, &b)| a + dt * b)
        .collect();
    f.with_values(out)
}
