//! Solution diagnostics: norms, stability margins, energy/entropy balances,
//! decay bounds, and the boundary-touching trackers.
//!
//! A run produces one `DiagnosticsRecord` per committed sample; the bound
//! checks consume the record series and compare each measured quantity with
//! its analytic bound. Time integrals inside the balances use the trapezoid
//! rule on the committed sample grid, so their residuals scale with the
//! square of the sample spacing.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::models::{
    sigma_values, stability_report_field, stability_report_line, ModelKind, ModelSpec,
};
use crate::realline::{norms as line_norms, LineInterface};
use crate::spectral::{
    derivative, l2_norm, lambda_op, second_derivative, sobolev_seminorm, PeriodicField,
};

/// Parity class of the initial data, used to track symmetry propagation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Detect the parity class of a field (residual below `tol`).
pub fn detect_parity(f: &PeriodicField, tol: f64) -> Option<Parity> {
    if f.even_residual() < tol {
        Some(Parity::Even)
    } else if f.odd_residual() < tol {
        Some(Parity::Odd)
    } else {
        None
    }
}

/// What the record computation needs to know about the run.
#[derive(Debug, Clone, Copy)]
pub struct RecordContext {
    pub model: ModelSpec,
    pub parity: Option<Parity>,
    /// Node index of the armed touching-point tracker.
    pub touch_node: Option<usize>,
}

/// Per-sample bundle of everything the analysis bounds or balances.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub linf: f64,
    pub l2: f64,
    pub h_half: f64,
    pub h_one: f64,
    pub sigma: Option<f64>,
    /// ||f||_inf / l for finite depth.
    pub amplitude_param: Option<f64>,
    pub min_f: f64,
    pub min_node: usize,
    pub max_f: f64,
    pub max_node: usize,
    /// int g log(1+g^2), g the slope view of the state.
    pub entropy: f64,
    /// int arctan(g).
    pub arctan_mass: f64,
    /// ||g||_L2^2 + ||g||_L4^4 / 6.
    pub referee_energy: f64,
    /// ||g||_{H^1/2} (dot), the referee-energy dissipation density.
    pub g_hhalf: f64,
    /// int Lambda g / (1+g^2), spectral route (g-equation runs).
    pub entropy_diss_spectral: Option<f64>,
    /// Same quantity through the symmetrized double sum.
    pub entropy_diss_symmetric: Option<f64>,
    /// Residual against the initial parity class.
    pub parity_residual: Option<f64>,
    pub touch_value: Option<f64>,
    pub touch_curvature: Option<f64>,
    pub touch_lambda: Option<f64>,
    pub touch_sigma: Option<f64>,
    /// max_x 1/(l^2 - f^2 - f_x^2); emitted, never bounded.
    pub d_energy: Option<f64>,
    /// max_x 1/(l^2 - f^2); emitted, never bounded.
    pub dd_energy: Option<f64>,
}

/// One bound evaluation at one sample time.
#[derive(Debug, Clone)]
pub struct BoundCheck {
    pub name: String,
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub slack: f64,
}

impl BoundCheck {
    pub fn new(name: &str, t: f64, measured: f64, bound: f64, check_tol: f64) -> Self {
        let satisfied = measured <= bound * (1.0 + check_tol) + f64::MIN_POSITIVE;
        Self {
            name: name.to_string(),
            t,
            measured,
            bound,
            satisfied,
            slack: bound - measured,
        }
    }
}

/// Default relative tolerance of the bound checks; widened when the sample
/// spacing is coarse, since the trapezoid residual grows with it.
pub fn default_check_tol(max_sample_spacing: f64) -> f64 {
    if max_sample_spacing > 1e-3 {
        5e-3
    } else {
        1e-3
    }
}

fn max_spacing(records: &[DiagnosticsRecord]) -> f64 {
    records
        .windows(2)
        .map(|w| w[1].t - w[0].t)
        .fold(0.0, f64::max)
}

fn trapz_cumulative(records: &[DiagnosticsRecord], f: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        acc += 0.5 * dt * (f(&w[0]) + f(&w[1]));
        out.push(acc);
    }
    out
}

fn grid_integral(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() * 2.0 * PI / n as f64
}

/// Pointwise stability field Sigma(x); its maximum over the nodes is the
/// sigma(t) reported by `models::stability_report_field`, bit-exactly (the
/// two share the same values and reduction).
pub fn sigma_pointwise_field(f: &PeriodicField, l: f64) -> Result<PeriodicField> {
    let fx = derivative(f)?;
    f.with_values(sigma_values(f.values(), fx.values(), l))
}

/// Build the record for a periodic state.
pub fn record_spectral(f: &PeriodicField, t: f64, ctx: &RecordContext) -> Result<DiagnosticsRecord> {
    let n = f.n();
    let (min_f, min_node, max_f, max_node) = f.min_max();
    let linf = min_f.abs().max(max_f.abs());

    let (sigma, amplitude, d_energy, dd_energy) = match ctx.model.depth_l {
        Some(l) => {
            let rep = stability_report_field(f, l)?;
            let fx = derivative(f)?;
            let mut d_max: f64 = f64::NEG_INFINITY;
            let mut dd_max: f64 = f64::NEG_INFINITY;
            for (&v, &s) in f.values().iter().zip(fx.values()) {
                let den_d = l * l - v * v - s * s;
                d_max = if den_d <= 0.0 {
                    f64::INFINITY
                } else {
                    d_max.max(1.0 / den_d)
                };
                let den_dd = l * l - v * v;
                dd_max = if den_dd <= 0.0 {
                    f64::INFINITY
                } else {
                    dd_max.max(1.0 / den_dd)
                };
            }
            (Some(rep.sigma), Some(linf / l), Some(d_max), Some(dd_max))
        }
        None => (None, None, None, None),
    };

    // slope view of the state: the g-equation evolves g itself
    let g = if ctx.model.kind == ModelKind::DeepModelDerivative {
        f.clone()
    } else {
        derivative(f)?
    };
    let entropy = grid_integral(g.values().iter().map(|&v| v * (1.0 + v * v).ln()), n);
    let arctan_mass = grid_integral(g.values().iter().map(|&v| v.atan()), n);
    let g_l2_sq = l2_norm(&g).powi(2);
    let g_l4_4 = grid_integral(g.values().iter().map(|&v| v.powi(4)), n);
    let referee_energy = g_l2_sq + g_l4_4 / 6.0;
    let g_hhalf = sobolev_seminorm(&g, 0.5)?;

    let (diss_spec, diss_sym) = if ctx.model.kind == ModelKind::DeepModelDerivative {
        let lam_g = lambda_op(&g, 1.0)?;
        let spec = grid_integral(
            lam_g
                .values()
                .iter()
                .zip(g.values())
                .map(|(&lv, &v)| lv / (1.0 + v * v)),
            n,
        );
        (Some(spec), Some(symmetrized_dissipation(&g)?))
    } else {
        (None, None)
    };

    let parity_residual = ctx.parity.map(|p| match p {
        Parity::Even => f.even_residual(),
        Parity::Odd => f.odd_residual(),
    });

    let (touch_value, touch_curvature, touch_lambda, touch_sigma) = match ctx.touch_node {
        Some(j) => {
            let curv = second_derivative(f)?;
            let lam = lambda_op(f, 1.0)?;
            let l = ctx.model.depth_l.ok_or(Error::Invalid(
                "touching tracker needs a finite depth".into(),
            ))?;
            let sig = sigma_pointwise_field(f, l)?;
            (
                Some(f.values()[j]),
                Some(curv.values()[j]),
                Some(lam.values()[j]),
                Some(sig.values()[j]),
            )
        }
        None => (None, None, None, None),
    };

    Ok(DiagnosticsRecord {
        t,
        linf,
        l2: l2_norm(f),
        h_half: sobolev_seminorm(f, 0.5)?,
        h_one: sobolev_seminorm(f, 1.0)?,
        sigma,
        amplitude_param: amplitude,
        min_f,
        min_node,
        max_f,
        max_node,
        entropy,
        arctan_mass,
        referee_energy,
        g_hhalf,
        entropy_diss_spectral: diss_spec,
        entropy_diss_symmetric: diss_sym,
        parity_residual,
        touch_value,
        touch_curvature,
        touch_lambda,
        touch_sigma,
        d_energy,
        dd_energy,
    })
}

/// `int Lambda g/(1+g^2)` through the symmetrized double integral
/// `-(1/8pi) iint (g(x)-g(y))^2 (g(x)+g(y))
///              / (sin^2((x-y)/2) (1+g(x)^2)(1+g(y)^2)) dx dy`,
/// diagonal cells replaced by their continuous limit
/// `8 g'(x)^2 g(x) / (1+g(x)^2)^2`. Negative whenever g >= 0.
pub fn symmetrized_dissipation(g: &PeriodicField) -> Result<f64> {
    let n = g.n();
    let gx = derivative(g)?;
    let v = g.values();
    let h = 2.0 * PI / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let xi = g.node(i);
        let mut row = 0.0;
        for j in 0..n {
            let f = if i == j {
                let s = gx.values()[i];
                8.0 * s * s * v[i] / (1.0 + v[i] * v[i]).powi(2)
            } else {
                let d = v[i] - v[j];
                let s = ((xi - g.node(j)) / 2.0).sin();
                d * d * (v[i] + v[j]) / (s * s * (1.0 + v[i] * v[i]) * (1.0 + v[j] * v[j]))
            };
            row += f;
        }
        total += row;
    }
    Ok(-total * h * h / (8.0 * PI))
}

/// Build the record for a line state.
pub fn record_line(itf: &LineInterface, t: f64, ctx: &RecordContext) -> Result<DiagnosticsRecord> {
    let values = itf.values();
    let n = itf.len();
    let mut min = (values[0], 0usize);
    let mut max = (values[0], 0usize);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < min.0 {
            min = (v, i);
        }
        if v > max.0 {
            max = (v, i);
        }
    }
    let linf = min.0.abs().max(max.0.abs());

    let slopes: Vec<f64> = itf.nodes().iter().map(|&x| itf.slope(x)).collect();
    let (sigma, amplitude, d_energy, dd_energy) = match ctx.model.depth_l {
        Some(l) => {
            let rep = stability_report_line(itf, l);
            let mut d_max: f64 = f64::NEG_INFINITY;
            let mut dd_max: f64 = f64::NEG_INFINITY;
            for (&v, &s) in values.iter().zip(&slopes) {
                let den_d = l * l - v * v - s * s;
                d_max = if den_d <= 0.0 {
                    f64::INFINITY
                } else {
                    d_max.max(1.0 / den_d)
                };
                let den_dd = l * l - v * v;
                dd_max = if den_dd <= 0.0 {
                    f64::INFINITY
                } else {
                    dd_max.max(1.0 / den_dd)
                };
            }
            (Some(rep.sigma), Some(linf / l), Some(d_max), Some(dd_max))
        }
        None => (None, None, None, None),
    };

    let entropy_vals: Vec<f64> = slopes.iter().map(|&v| v * (1.0 + v * v).ln()).collect();
    let arctan_vals: Vec<f64> = slopes.iter().map(|&v| v.atan()).collect();
    let quartic: Vec<f64> = slopes.iter().map(|&v| v.powi(4)).collect();
    let sq: Vec<f64> = slopes.iter().map(|&v| v * v).collect();
    let g_itf = itf.with_values(slopes.clone())?;

    let parity_residual = ctx.parity.map(|p| {
        let mut worst = 0.0_f64;
        for i in 0..n {
            let mirrored = values[n - 1 - i];
            let r = match p {
                Parity::Even => (values[i] - mirrored).abs() / 2.0,
                Parity::Odd => (values[i] + mirrored).abs() / 2.0,
            };
            worst = worst.max(r);
        }
        worst
    });

    Ok(DiagnosticsRecord {
        t,
        linf,
        l2: line_norms::l2_norm(itf)?,
        h_half: line_norms::hhalf_seminorm(itf)?,
        h_one: line_norms::h1_seminorm(itf)?,
        sigma,
        amplitude_param: amplitude,
        min_f: min.0,
        min_node: min.1,
        max_f: max.0,
        max_node: max.1,
        entropy: line_norms::integrate_nodes(itf, &entropy_vals)?,
        arctan_mass: line_norms::integrate_nodes(itf, &arctan_vals)?,
        referee_energy: line_norms::integrate_nodes(itf, &sq)?
            + line_norms::integrate_nodes(itf, &quartic)? / 6.0,
        g_hhalf: line_norms::hhalf_seminorm(&g_itf)?,
        entropy_diss_spectral: None,
        entropy_diss_symmetric: None,
        parity_residual,
        touch_value: None,
        touch_curvature: None,
        touch_lambda: None,
        touch_sigma: None,
        d_energy,
        dd_energy,
    })
}

// ---------------------------------------------------------------------------
// Bound checks
// ---------------------------------------------------------------------------

/// Torus sup-norm decay for odd data:
/// `||f(t)||_inf <= e^{-Ct} M0 / (1 + A (e^{-Ct} - 1))`, C = C_l / l,
/// A = M0 / l.
pub struct TorusDecayChecks {
    pub primary: Vec<BoundCheck>,
    /// The closed form the l = pi/2 analysis produces; algebraically equal
    /// to `primary` at that depth and emitted alongside it.
    pub proof_form: Option<Vec<BoundCheck>>,
}

pub fn decay_bound_linf_torus(
    records: &[DiagnosticsRecord],
    f0: &PeriodicField,
    l: f64,
) -> Result<TorusDecayChecks> {
    let odd_res = f0.odd_residual();
    if odd_res > 1e-10 {
        return Err(Error::Invalid(format!(
            "decay bound needs odd initial data (odd-part residual {odd_res:.3e})"
        )));
    }
    let tol = default_check_tol(max_spacing(records));
    let m0 = records[0].linf;
    let a = m0 / l;
    let c = l / (1.0 + l * l); // C_l / l
    let primary: Vec<BoundCheck> = records
        .iter()
        .map(|r| {
            let e = (-c * r.t).exp();
            let bound = e * m0 / (1.0 + a * (e - 1.0));
            BoundCheck::new("decay_linf_torus", r.t, r.linf, bound, tol)
        })
        .collect();
    let proof_form = if (l - std::f64::consts::FRAC_PI_2).abs() < 1e-12 {
        Some(
            records
                .iter()
                .map(|r| {
                    let e = (c * r.t).exp();
                    let bound = PI * m0 / (PI * e + 2.0 * m0 * (1.0 - e));
                    BoundCheck::new("decay_linf_torus_proof_form", r.t, r.linf, bound, tol)
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(TorusDecayChecks {
        primary,
        proof_form,
    })
}

pub struct HhalfDecayChecks {
    pub checks: Vec<BoundCheck>,
    /// First sample time at which the run left the stable regime, if any;
    /// the check stops there.
    pub inapplicable_from: Option<f64>,
}

/// H^1/2 decay in the stable regime. The Gronwall argument bounds the
/// squared seminorm, `||f(t)||^2 <= e^{2 int sigma} ||f0||^2`, which is what
/// is checked here (the unsquared variant is not satisfied by the actual
/// dynamics).
pub fn decay_bound_hhalf(records: &[DiagnosticsRecord]) -> Result<HhalfDecayChecks> {
    let tol = default_check_tol(max_spacing(records));
    let sigma_at = |r: &DiagnosticsRecord| -> Result<f64> {
        r.sigma
            .ok_or_else(|| Error::Invalid("hhalf decay check needs sigma(t)".into()))
    };
    let mut usable = records.len();
    for (i, r) in records.iter().enumerate() {
        if sigma_at(r)? >= 0.0 {
            usable = i;
            break;
        }
    }
    let cut = &records[..usable];
    if cut.is_empty() {
        return Ok(HhalfDecayChecks {
            checks: vec![],
            inapplicable_from: records.first().map(|r| r.t),
        });
    }
    let cum = trapz_cumulative(cut, |r| r.sigma.unwrap());
    let h0_sq = cut[0].h_half.powi(2);
    let checks = cut
        .iter()
        .zip(&cum)
        .map(|(r, &integral)| {
            let bound = (2.0 * integral).exp() * h0_sq;
            BoundCheck::new("decay_hhalf_sq", r.t, r.h_half.powi(2), bound, tol)
        })
        .collect();
    Ok(HhalfDecayChecks {
        checks,
        inapplicable_from: if usable < records.len() {
            Some(records[usable].t)
        } else {
            None
        },
    })
}

/// Energy balance
/// `||f(t)||_{H^1/2}^2 - 2 int_0^t sigma ||f||_{H^1}^2 ds <= ||f0||_{H^1/2}^2`.
pub fn energy_balance_sigma(records: &[DiagnosticsRecord]) -> Result<Vec<BoundCheck>> {
    let tol = default_check_tol(max_spacing(records));
    for r in records {
        if r.sigma.is_none() {
            return Err(Error::Invalid("energy balance needs sigma(t)".into()));
        }
    }
    let cum = trapz_cumulative(records, |r| r.sigma.unwrap() * r.h_one.powi(2));
    let rhs = records[0].h_half.powi(2);
    Ok(records
        .iter()
        .zip(&cum)
        .map(|(r, &integral)| {
            let lhs = r.h_half.powi(2) - 2.0 * integral;
            BoundCheck::new("energy_balance_sigma", r.t, lhs, rhs, tol)
        })
        .collect())
}

/// Real-line algebraic sup-norm decay
/// `||f(t)||_inf <= [ ((1-A)/A)/(1+l^2) * 3t/c(f0,T) + ||f0||_inf^{-3} ]^{-1/3}`
/// with `c(f0,T) = ||f0||_2 + 2 sqrt(T) ||f0||_{H^1/2} / min sqrt|sigma|`.
pub fn decay_bound_linf_line(
    records: &[DiagnosticsRecord],
    l: f64,
    t_horizon: f64,
) -> Result<Vec<BoundCheck>> {
    let tol = default_check_tol(max_spacing(records));
    let m0 = records[0].linf;
    let a = m0 / l;
    if a >= 1.0 {
        return Err(Error::Invalid(
            "line decay bound degenerates at amplitude parameter >= 1".into(),
        ));
    }
    let mut min_abs_sigma = f64::INFINITY;
    for r in records.iter().filter(|r| r.t <= t_horizon) {
        let s = r
            .sigma
            .ok_or_else(|| Error::Invalid("line decay check needs sigma(t)".into()))?;
        if s >= 0.0 {
            return Err(Error::Invalid(format!(
                "line decay bound needs the stable regime; sigma = {s:.3e} at t = {:.3e}",
                r.t
            )));
        }
        min_abs_sigma = min_abs_sigma.min(s.abs());
    }
    let c_f0 = records[0].l2 + 2.0 * t_horizon.sqrt() * records[0].h_half / min_abs_sigma.sqrt();
    let coef = ((1.0 - a) / a) / (1.0 + l * l);
    Ok(records
        .iter()
        .filter(|r| r.t <= t_horizon)
        .map(|r| {
            let bound = (coef * 3.0 * r.t / c_f0 + m0.powi(-3)).powf(-1.0 / 3.0);
            BoundCheck::new("decay_linf_line", r.t, r.linf, bound, tol)
        })
        .collect())
}

/// Entropy balance of the g-equation:
/// `int g log(1+g^2) + 2 int arctan g - int_0^t int Lambda g/(1+g^2) = const`.
pub struct EntropyChecks {
    /// |balance residual| against `residual_tol`.
    pub residual: Vec<BoundCheck>,
    /// Symmetrized dissipation against zero (applicable when min g > 0).
    pub dissipation_sign: Vec<BoundCheck>,
    /// Relative disagreement of the two dissipation routes.
    pub route_agreement: Vec<BoundCheck>,
    pub max_residual: f64,
}

pub fn entropy_balance_deep(
    records: &[DiagnosticsRecord],
    residual_tol: f64,
    route_rel_tol: f64,
) -> Result<EntropyChecks> {
    for r in records {
        if r.entropy_diss_spectral.is_none() || r.entropy_diss_symmetric.is_none() {
            return Err(Error::Invalid(
                "entropy balance needs the g-equation dissipation columns".into(),
            ));
        }
    }
    let cum = trapz_cumulative(records, |r| r.entropy_diss_spectral.unwrap());
    let initial = records[0].entropy + 2.0 * records[0].arctan_mass;
    let positive_g = records.iter().all(|r| r.min_f > 0.0);
    let mut residual = Vec::new();
    let mut dissipation_sign = Vec::new();
    let mut route_agreement = Vec::new();
    let mut max_residual = 0.0_f64;
    for (r, &integral) in records.iter().zip(&cum) {
        let res = (r.entropy + 2.0 * r.arctan_mass - integral - initial).abs();
        max_residual = max_residual.max(res);
        residual.push(BoundCheck::new(
            "entropy_balance_residual",
            r.t,
            res,
            residual_tol,
            0.0,
        ));
        if positive_g {
            dissipation_sign.push(BoundCheck::new(
                "entropy_dissipation_sign",
                r.t,
                r.entropy_diss_symmetric.unwrap(),
                0.0,
                0.0,
            ));
        }
        let spec = r.entropy_diss_spectral.unwrap();
        let sym = r.entropy_diss_symmetric.unwrap();
        let rel = (spec - sym).abs() / spec.abs().max(1e-300);
        route_agreement.push(BoundCheck::new(
            "entropy_dissipation_routes",
            r.t,
            rel,
            route_rel_tol,
            0.0,
        ));
    }
    Ok(EntropyChecks {
        residual,
        dissipation_sign,
        route_agreement,
        max_residual,
    })
}

/// Conservation of `||g||_2^2 + ||g||_4^4/6 + 2 int_0^t ||g||_{H^1/2}^2 ds`
/// along the deep model, g = f_x.
///
/// The dissipation enters with coefficient 2: testing the g-equation with
/// `2g + (2/3) g^3` gives `dE/dt = 2 int g_x Lambda f = -2 ||g||_{H^1/2}^2`
/// after the cubic transport terms cancel against each other.
pub fn referee_energy_balance(
    records: &[DiagnosticsRecord],
    residual_tol: f64,
) -> (Vec<BoundCheck>, f64) {
    let cum = trapz_cumulative(records, |r| r.g_hhalf.powi(2));
    let initial = records[0].referee_energy;
    let mut out = Vec::with_capacity(records.len());
    let mut max_residual = 0.0_f64;
    for (r, &integral) in records.iter().zip(&cum) {
        let res = (r.referee_energy + 2.0 * integral - initial).abs();
        max_residual = max_residual.max(res);
        out.push(BoundCheck::new(
            "referee_energy_residual",
            r.t,
            res,
            residual_tol,
            0.0,
        ));
    }
    (out, max_residual)
}

// ---------------------------------------------------------------------------
// Boundary-touching trackers
// ---------------------------------------------------------------------------

/// Arm the tracker: the initial data must attain max f = l at a node.
pub fn arm_touching_tracker(f0: &PeriodicField, l: f64) -> Result<usize> {
    let (_, _, max_f, max_node) = f0.min_max();
    if (max_f - l).abs() > 1e-10 {
        return Err(Error::Invalid(format!(
            "touching tracker refused: max f = {max_f:.12e} does not reach l = {l:.12e}"
        )));
    }
    Ok(max_node)
}

/// Scalar-ODE cross-check of the tracked curvature:
/// `dc/dt = 2 c Lf(t) (l + c)` driven by the recorded `Lambda f(x~, t)`,
/// integrated with RK4 on the sample grid and compared with the measured
/// spectral curvature.
pub struct CurvatureOdeCheck {
    pub times: Vec<f64>,
    pub measured: Vec<f64>,
    pub modeled: Vec<f64>,
    pub max_rel_discrepancy: f64,
}

pub fn curvature_ode_check(records: &[DiagnosticsRecord], l: f64) -> Result<CurvatureOdeCheck> {
    let data: Vec<(f64, f64, f64)> = records
        .iter()
        .map(|r| {
            match (r.touch_curvature, r.touch_lambda) {
                (Some(c), Some(lam)) => Ok((r.t, c, lam)),
                _ => Err(Error::Invalid(
                    "curvature cross-check needs an armed touching tracker".into(),
                )),
            }
        })
        .collect::<Result<_>>()?;
    if data.len() < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let mut c = data[0].1;
    let mut modeled = vec![c];
    const SUBSTEPS: usize = 32;
    for w in data.windows(2) {
        let (t0, _, lam0) = w[0];
        let (t1, _, lam1) = w[1];
        let dt = (t1 - t0) / SUBSTEPS as f64;
        let lam_at = |t: f64| lam0 + (lam1 - lam0) * (t - t0) / (t1 - t0).max(1e-300);
        let mut t = t0;
        for _ in 0..SUBSTEPS {
            let f = |tt: f64, cc: f64| 2.0 * cc * lam_at(tt) * (l + cc);
            let k1 = f(t, c);
            let k2 = f(t + 0.5 * dt, c + 0.5 * dt * k1);
            let k3 = f(t + 0.5 * dt, c + 0.5 * dt * k2);
            let k4 = f(t + dt, c + dt * k3);
            c += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += dt;
        }
        modeled.push(c);
    }
    let mut max_rel = 0.0_f64;
    for (i, &(_, measured, _)) in data.iter().enumerate() {
        let rel = (modeled[i] - measured).abs() / measured.abs().max(1e-12);
        max_rel = max_rel.max(rel);
    }
    Ok(CurvatureOdeCheck {
        times: data.iter().map(|d| d.0).collect(),
        measured: data.iter().map(|d| d.1).collect(),
        modeled,
        max_rel_discrepancy: max_rel,
    })
}

/// The integrated curvature-bound factor `e^{l int_0^t Lambda f(x~, s) ds}`
/// per sample, and the smallest constant c with
/// `|curvature(t)| <= c * factor(t)` over the series.
pub fn curvature_growth_factors(
    records: &[DiagnosticsRecord],
    l: f64,
) -> Result<(Vec<f64>, f64)> {
    for r in records {
        if r.touch_lambda.is_none() || r.touch_curvature.is_none() {
            return Err(Error::Invalid(
                "curvature growth factors need an armed touching tracker".into(),
            ));
        }
    }
    let cum = trapz_cumulative(records, |r| r.touch_lambda.unwrap());
    let factors: Vec<f64> = cum.iter().map(|&i| (l * i).exp()).collect();
    let fitted = records
        .iter()
        .zip(&factors)
        .map(|(r, &f)| r.touch_curvature.unwrap().abs() / f)
        .fold(0.0_f64, f64::max);
    Ok((factors, fitted))
}

// ---------------------------------------------------------------------------
// Run-series invariants
// ---------------------------------------------------------------------------

/// Sampled maximum principle: ||f||_inf non-increasing up to `slack`.
/// Returns the first violating sample index.
pub fn max_principle_violation(records: &[DiagnosticsRecord], slack: f64) -> Option<usize> {
    for (i, w) in records.windows(2).enumerate() {
        if w[1].linf > w[0].linf + slack {
            return Some(i + 1);
        }
    }
    None
}

/// Interior monotonicity: max f non-increasing and min f non-decreasing.
pub fn interior_monotonicity_violation(
    records: &[DiagnosticsRecord],
    slack: f64,
) -> Option<usize> {
    for (i, w) in records.windows(2).enumerate() {
        if w[1].max_f > w[0].max_f + slack || w[1].min_f < w[0].min_f - slack {
            return Some(i + 1);
        }
    }
    None
}

/// Largest recorded parity residual, if parity was tracked.
pub fn max_parity_residual(records: &[DiagnosticsRecord]) -> Option<f64> {
    records
        .iter()
        .filter_map(|r| r.parity_residual)
        .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
}

/// True when sigma stayed negative at every sample.
pub fn stable_regime_persisted(records: &[DiagnosticsRecord]) -> bool {
    records.iter().all(|r| r.sigma.map_or(false, |s| s < 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_field_max_matches_report_bitexactly() {
        let l = std::f64::consts::FRAC_PI_2;
        let f = PeriodicField::from_fn(128, "f", |x| 0.4 * x.sin() + 0.2 * (2.0 * x).cos())
            .unwrap();
        let field = sigma_pointwise_field(&f, l).unwrap();
        let max = field.values().iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let rep = stability_report_field(&f, l).unwrap();
        assert_eq!(max, rep.sigma);
    }

    #[test]
    fn sigma_examples() {
        let l = std::f64::consts::FRAC_PI_2;
        let zero = PeriodicField::zeros(64, "f").unwrap();
        let s = sigma_pointwise_field(&zero, l).unwrap();
        let want = 1.0 / (1.0 + l * l) - 1.0;
        assert!(s.values().iter().all(|v| (v - want).abs() < 1e-14));

        let steady = PeriodicField::from_fn(128, "f", |x| l * x.sin()).unwrap();
        let s = sigma_pointwise_field(&steady, l).unwrap();
        assert!(s.values().iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn hhalf_bound_with_synthetic_constant_sigma() {
        // sigma == -0.5 gives bound e^{-t} * ||f0||^2 on the squared seminorm
        let mut records = Vec::new();
        for i in 0..=10 {
            let t = 0.1 * i as f64;
            records.push(synthetic_record(t, Some(-0.5), 2.0));
        }
        let out = decay_bound_hhalf(&records).unwrap();
        assert!(out.inapplicable_from.is_none());
        for (r, c) in records.iter().zip(&out.checks) {
            let want = (-r.t).exp() * 4.0;
            assert!((c.bound - want).abs() < 1e-12);
        }
    }

    #[test]
    fn hhalf_bound_stops_when_unstable() {
        let mut records: Vec<DiagnosticsRecord> = (0..5)
            .map(|i| synthetic_record(0.1 * i as f64, Some(-0.5), 1.0))
            .collect();
        records.push(synthetic_record(0.5, Some(0.1), 1.0));
        let out = decay_bound_hhalf(&records).unwrap();
        assert_eq!(out.checks.len(), 5);
        assert_eq!(out.inapplicable_from, Some(0.5));
    }

    #[test]
    fn torus_decay_bound_at_t0_equals_initial_norm() {
        let f0 = PeriodicField::from_fn(64, "f", |x| 0.5 * x.sin()).unwrap();
        let records = vec![synthetic_record_linf(0.0, 0.5)];
        let out =
            decay_bound_linf_torus(&records, &f0, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((out.primary[0].bound - 0.5).abs() < 1e-15);
        assert!(out.primary[0].satisfied);
        // the proof-form closed expression agrees at l = pi/2
        let pf = out.proof_form.unwrap();
        assert!((pf[0].bound - 0.5).abs() < 1e-12);
    }

    #[test]
    fn torus_decay_refuses_even_data() {
        let f0 = PeriodicField::from_fn(64, "f", |x| 0.5 * x.cos()).unwrap();
        let records = vec![synthetic_record_linf(0.0, 0.5)];
        assert!(decay_bound_linf_torus(&records, &f0, 1.0).is_err());
    }

    #[test]
    fn line_decay_bound_shapes() {
        // at t = 0 the bound is exactly ||f0||_inf; at A -> 1 it freezes
        let recs: Vec<DiagnosticsRecord> = (0..=4)
            .map(|i| synthetic_record(0.25 * i as f64, Some(-0.5), 1.0))
            .collect();
        let out = decay_bound_linf_line(&recs, std::f64::consts::FRAC_PI_2, 1.0).unwrap();
        assert!((out[0].bound - recs[0].linf).abs() < 1e-12);
        assert!(out.iter().all(|c| c.bound <= recs[0].linf + 1e-12));
    }

    fn synthetic_record(t: f64, sigma: Option<f64>, h_half: f64) -> DiagnosticsRecord {
        DiagnosticsRecord {
            t,
            linf: 0.5,
            l2: 1.0,
            h_half,
            h_one: 1.0,
            sigma,
            amplitude_param: Some(0.3),
            min_f: -0.5,
            min_node: 0,
            max_f: 0.5,
            max_node: 1,
            entropy: 0.0,
            arctan_mass: 0.0,
            referee_energy: 0.0,
            g_hhalf: 0.0,
            entropy_diss_spectral: None,
            entropy_diss_symmetric: None,
            parity_residual: None,
            touch_value: None,
            touch_curvature: None,
            touch_lambda: None,
            touch_sigma: None,
            d_energy: None,
            dd_energy: None,
        }
    }

    fn synthetic_record_linf(t: f64, linf: f64) -> DiagnosticsRecord {
        let mut r = synthetic_record(t, Some(-0.5), 1.0);
        r.linf = linf;
        r
    }
}
