//! Sampled simulation loop shared by the library tests and the CLI.
//!
//! The runner owns the state, advances it with the configured scheme, and
//! emits a `DiagnosticsRecord` at the sample cadence. Leaving the admissible
//! strip or running the adaptive step into the ground are expected endings
//! for unstable-regime experiments, so they terminate the run with a reason
//! instead of failing it.

use crate::diagnostics::{
    arm_touching_tracker, detect_parity, record_line, record_spectral, DiagnosticsRecord,
    RecordContext,
};
use crate::error::{Error, Result};
use crate::models::{
    rhs_confined_model, rhs_confined_model_line, rhs_confined_muskat, rhs_deep_model,
    rhs_deep_model_derivative, rhs_deep_muskat, EvalOptions, ModelKind, ModelSpec,
};
use crate::realline::{LineInterface, QuadratureSettings};
use crate::spectral::PeriodicField;
use crate::timestep::{duhamel_step, rk45_step, rk4_step, StepController, Stepping};

/// State of a simulation, either backend.
#[derive(Debug, Clone)]
pub enum SimState {
    Spectral(PeriodicField),
    Line(LineInterface),
}

impl SimState {
    pub fn values(&self) -> &[f64] {
        match self {
            SimState::Spectral(f) => f.values(),
            SimState::Line(i) => i.values(),
        }
    }

    pub fn len(&self) -> usize {
        self.values().len()
    }

    pub fn is_empty(&self) -> bool {
        self.values().is_empty()
    }

    fn with_values(&self, values: Vec<f64>) -> Result<SimState> {
        Ok(match self {
            SimState::Spectral(f) => SimState::Spectral(f.with_values(values)?),
            SimState::Line(i) => SimState::Line(i.with_values(values)?),
        })
    }

    fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }
}

/// Time scheme of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    Rk45,
    Duhamel,
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Termination {
    Completed,
    /// The state left the admissible strip (or blew up into non-finite
    /// values, which for these models is the same ending).
    HaltedBoundary(String),
    HaltedDtUnderflow(String),
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::Completed => "completed",
            Termination::HaltedBoundary(_) => "halted-boundary",
            Termination::HaltedDtUnderflow(_) => "halted-dt-underflow",
        }
    }

    pub fn detail(&self) -> Option<&str> {
        match self {
            Termination::Completed => None,
            Termination::HaltedBoundary(d) | Termination::HaltedDtUnderflow(d) => Some(d),
        }
    }
}

/// Everything needed to advance one model.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub model: ModelSpec,
    pub opts: EvalOptions,
    /// Quadrature settings; required by the line backends.
    pub quad: Option<QuadratureSettings>,
    pub scheme: Scheme,
    pub controller: StepController,
    /// Record cadence in accepted steps.
    pub sample_every: usize,
    /// Arm the touching-point tracker (boundary experiments).
    pub track_touch: bool,
}

impl RunSetup {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.controller.validate()?;
        if self.sample_every == 0 {
            return Err(Error::Invalid("sample_every must be at least 1".into()));
        }
        match (self.scheme, &self.controller.stepping) {
            (Scheme::Rk45, Stepping::Fixed { .. }) => {
                return Err(Error::Invalid(
                    "rk45 needs an adaptive controller".into(),
                ))
            }
            (Scheme::Rk4 | Scheme::Duhamel, Stepping::Adaptive { .. }) => {
                return Err(Error::Invalid(format!(
                    "{:?} needs a fixed step controller",
                    self.scheme
                )))
            }
            _ => {}
        }
        if self.scheme == Scheme::Duhamel && self.model.kind != ModelKind::ConfinedModel {
            return Err(Error::Invalid(
                "the duhamel stepper only integrates the confined model".into(),
            ));
        }
        Ok(())
    }
}

/// A finished run: sample times, sampled states, diagnostics, ending.
#[derive(Debug, Clone)]
pub struct SampledRun {
    pub times: Vec<f64>,
    pub states: Vec<SimState>,
    pub records: Vec<DiagnosticsRecord>,
    pub termination: Termination,
    pub accepted_steps: usize,
    pub context: RecordContext,
}

/// Slack above |f| = l tolerated in boundary-touching runs before the run
/// halts; generic runs halt at the strict guard instead.
pub const TOUCH_HALT_SLACK: f64 = 1e-8;

fn rhs_for(setup: &RunSetup, proto: &SimState, y: &[f64]) -> Result<Vec<f64>> {
    let state = proto.with_values(y.to_vec())?;
    match (&state, setup.model.kind) {
        (SimState::Spectral(f), ModelKind::ConfinedModel) => {
            let l = setup.model.depth_l.expect("validated");
            Ok(rhs_confined_model(f, l, &setup.opts)?.values().to_vec())
        }
        (SimState::Spectral(f), ModelKind::DeepModel) => {
            Ok(rhs_deep_model(f, &setup.opts)?.values().to_vec())
        }
        (SimState::Spectral(g), ModelKind::DeepModelDerivative) => Ok(rhs_deep_model_derivative(
            g,
            setup.model.viscosity_eps,
            &setup.opts,
        )?
        .values()
        .to_vec()),
        (SimState::Line(itf), ModelKind::DeepMuskat) => {
            let q = setup.quad.as_ref().expect("quadrature settings required");
            rhs_deep_muskat(itf, &setup.model, q)
        }
        (SimState::Line(itf), ModelKind::ConfinedMuskat) => {
            let q = setup.quad.as_ref().expect("quadrature settings required");
            rhs_confined_muskat(itf, &setup.model, q)
        }
        (SimState::Line(itf), ModelKind::ConfinedModel) => {
            let q = setup.quad.as_ref().expect("quadrature settings required");
            rhs_confined_model_line(itf, setup.model.depth_l.expect("validated"), q)
        }
        (state, kind) => Err(Error::Invalid(format!(
            "model {} cannot run on the {} backend",
            kind.as_str(),
            match state {
                SimState::Spectral(_) => "spectral",
                SimState::Line(_) => "line",
            }
        ))),
    }
}

/// Committed-state admissibility police. Returns the halt reason, if any.
fn halt_reason(setup: &RunSetup, state: &SimState) -> Option<String> {
    if let Some(l) = setup.model.depth_l {
        let max_abs = state.max_abs();
        if setup.opts.allow_boundary_touch {
            if max_abs > l + TOUCH_HALT_SLACK {
                return Some(format!(
                    "max|f| = {max_abs:.12e} drifted above l = {l:.12e}"
                ));
            }
        } else if max_abs >= l - crate::models::ADMISSIBILITY_GUARD {
            return Some(format!(
                "max|f| = {max_abs:.12e} reached the admissibility guard at l = {l:.12e}"
            ));
        }
    }
    if let Some(bad) = state.values().iter().find(|v| !v.is_finite()) {
        return Some(format!("state became non-finite ({bad})"));
    }
    None
}

/// Run the simulation, sampling every `sample_every` accepted steps.
/// The initial and final committed states are always sampled.
pub fn run_sampled(setup: &RunSetup, state0: SimState) -> Result<SampledRun> {
    setup.validate()?;

    // line runs must start from flat-at-infinity data; the evolution then
    // feeds slow tails into the window, policed per evaluation by the
    // truncation budget of the quadrature settings
    if let SimState::Line(itf) = &state0 {
        itf.check_decay(crate::realline::DEFAULT_DECAY_TOL)?;
    }

    let parity = match &state0 {
        SimState::Spectral(f) => detect_parity(f, 1e-12),
        SimState::Line(_) => None,
    };
    let touch_node = if setup.track_touch {
        match (&state0, setup.model.depth_l) {
            (SimState::Spectral(f), Some(l)) => Some(arm_touching_tracker(f, l)?),
            _ => {
                return Err(Error::Invalid(
                    "touching tracker needs a spectral state and finite depth".into(),
                ))
            }
        }
    } else {
        None
    };
    let context = RecordContext {
        model: setup.model,
        parity,
        touch_node,
    };

    let record = |state: &SimState, t: f64| -> Result<DiagnosticsRecord> {
        match state {
            SimState::Spectral(f) => record_spectral(f, t, &context),
            SimState::Line(itf) => record_line(itf, t, &context),
        }
    };

    if let Some(reason) = halt_reason(setup, &state0) {
        // even a refused start emits its diagnostics row
        let rec = record(&state0, 0.0)?;
        return Ok(SampledRun {
            times: vec![0.0],
            states: vec![state0],
            records: vec![rec],
            termination: Termination::HaltedBoundary(reason),
            accepted_steps: 0,
            context,
        });
    }

    let t_end = setup.controller.t_end;
    let mut t = 0.0_f64;
    let mut state = state0;
    let mut times = vec![t];
    let mut records = vec![record(&state, t)?];
    let mut states = vec![state.clone()];
    let mut accepted = 0usize;
    let mut dt_next = match setup.controller.stepping {
        Stepping::Fixed { dt } => dt,
        Stepping::Adaptive { dt_init, dt_min, dt_max, .. } => dt_init.clamp(dt_min, dt_max),
    };
    let mut termination = Termination::Completed;
    let mut last_sampled = 0usize;

    while t < t_end && t_end > 0.0 {
        let dt = dt_next.min(t_end - t);
        let stepped: Result<(Vec<f64>, f64, f64)> = match setup.scheme {
            Scheme::Rk4 => {
                let mut rhs = |y: &[f64]| rhs_for(setup, &state, y);
                rk4_step(state.values(), &mut rhs, dt).map(|y| (y, dt, dt_next))
            }
            Scheme::Duhamel => {
                let l = setup.model.depth_l.expect("validated");
                match &state {
                    SimState::Spectral(f) => duhamel_step(f, l, dt, &setup.opts)
                        .map(|g| (g.values().to_vec(), dt, dt_next)),
                    SimState::Line(_) => unreachable!("validated"),
                }
            }
            Scheme::Rk45 => {
                let mut rhs = |y: &[f64]| rhs_for(setup, &state, y);
                rk45_step(state.values(), &mut rhs, dt, &setup.controller)
                    .map(|out| (out.y, out.dt_used, out.dt_next))
            }
        };

        match stepped {
            Ok((y, dt_used, proposal)) => {
                match state.with_values(y) {
                    Ok(next) => {
                        state = next;
                        t += dt_used;
                        dt_next = proposal;
                        accepted += 1;
                        if let Some(reason) = halt_reason(setup, &state) {
                            termination = Termination::HaltedBoundary(reason);
                            break;
                        }
                        if accepted % setup.sample_every == 0 {
                            times.push(t);
                            records.push(record(&state, t)?);
                            states.push(state.clone());
                            last_sampled = accepted;
                        }
                    }
                    Err(e) => {
                        termination = Termination::HaltedBoundary(e.to_string());
                        break;
                    }
                }
            }
            Err(Error::DtUnderflow { dt, dt_min }) => {
                termination = Termination::HaltedDtUnderflow(format!(
                    "dt = {dt:.3e} underflowed dt_min = {dt_min:.3e} at t = {t:.6e}"
                ));
                break;
            }
            Err(Error::Admissibility { max_abs, node, limit }) => {
                termination = Termination::HaltedBoundary(format!(
                    "rhs evaluation refused: max|f| = {max_abs:.12e} at node {node} (limit {limit:.12e})"
                ));
                break;
            }
            Err(Error::BoundaryProximity { max_abs, node, limit }) => {
                termination = Termination::HaltedBoundary(format!(
                    "interface within guard of the wall: max|f| = {max_abs:.12e} at node {node} (limit {limit:.12e})"
                ));
                break;
            }
            Err(Error::NonFinite { label, node, value }) => {
                termination = Termination::HaltedBoundary(format!(
                    "state '{label}' became non-finite at node {node} ({value})"
                ));
                break;
            }
            Err(e) => return Err(e),
        }
    }

    // final committed state, sampled exactly once
    if accepted != last_sampled {
        times.push(t);
        records.push(record(&state, t)?);
        states.push(state.clone());
    }

    Ok(SampledRun {
        times,
        states,
        records,
        termination,
        accepted_steps: accepted,
        context,
    })
}
