//! Solver-driven checks of the analytic bounds and balances.

mod common;

use muskat_core::diagnostics::{
    curvature_ode_check, decay_bound_hhalf, decay_bound_linf_line, decay_bound_linf_torus,
    energy_balance_sigma, entropy_balance_deep, interior_monotonicity_violation,
    max_parity_residual, max_principle_violation, referee_energy_balance,
    stable_regime_persisted,
};
use muskat_core::models::{EvalOptions, ModelSpec};
use muskat_core::realline::{LineInterface, QuadratureSettings};
use muskat_core::runner::{run_sampled, RunSetup, Scheme, SimState, Termination};
use muskat_core::spectral::PeriodicField;
use muskat_core::timestep::StepController;
use std::f64::consts::FRAC_PI_2;

const L: f64 = FRAC_PI_2;

fn spectral_setup(model: ModelSpec, scheme: Scheme, ctrl: StepController, every: usize) -> RunSetup {
    RunSetup {
        model,
        opts: EvalOptions::default(),
        quad: None,
        scheme,
        controller: ctrl,
        sample_every: every,
        track_touch: false,
    }
}

#[test]
fn torus_decay_bound_on_odd_data() {
    let f0 = PeriodicField::from_fn(256, "f", |x| 0.5 * x.sin()).unwrap();
    let setup = spectral_setup(
        ModelSpec::confined(L),
        Scheme::Rk45,
        StepController::adaptive(1e-8, 1e-10, 1.0),
        1,
    );
    let run = run_sampled(&setup, SimState::Spectral(f0.clone())).unwrap();
    assert_eq!(run.termination, Termination::Completed);
    let checks = decay_bound_linf_torus(&run.records, &f0, L).unwrap();
    assert!(checks.primary.iter().all(|c| c.satisfied));
    // the two closed forms coincide at l = pi/2
    let proof = checks.proof_form.unwrap();
    for (a, b) in checks.primary.iter().zip(&proof) {
        assert!((a.bound - b.bound).abs() < 1e-12);
    }
    // t = 0 bound equals the initial sup norm
    assert!((checks.primary[0].bound - 0.5).abs() < 1e-14);
}

#[test]
fn hhalf_decay_and_sigma_energy_balance() {
    let f0 = PeriodicField::from_fn(256, "f", |x| 0.3 * x.cos()).unwrap();
    let setup = spectral_setup(
        ModelSpec::confined(L),
        Scheme::Rk45,
        StepController::adaptive(1e-8, 1e-10, 2.0),
        1,
    );
    let run = run_sampled(&setup, SimState::Spectral(f0)).unwrap();
    assert_eq!(run.termination, Termination::Completed);
    assert!(stable_regime_persisted(&run.records));

    let decay = decay_bound_hhalf(&run.records).unwrap();
    assert!(decay.inapplicable_from.is_none());
    assert!(decay.checks.iter().all(|c| c.satisfied));
    // equality at t = 0
    assert!((decay.checks[0].measured - decay.checks[0].bound).abs() < 1e-14);

    let energy = energy_balance_sigma(&run.records).unwrap();
    assert!(energy.iter().all(|c| c.satisfied));
    assert!((energy[0].measured - energy[0].bound).abs() < 1e-14);
}

#[test]
fn maximum_principle_monotonicity_and_parity() {
    let f0 = PeriodicField::from_fn(512, "f", |x| 0.5 * x.cos() + 0.2 * (3.0 * x).cos())
        .unwrap();
    let setup = spectral_setup(
        ModelSpec::confined(L),
        Scheme::Rk45,
        StepController::adaptive(1e-8, 1e-10, 1.0),
        1,
    );
    let run = run_sampled(&setup, SimState::Spectral(f0)).unwrap();
    assert_eq!(run.termination, Termination::Completed);
    assert!(max_principle_violation(&run.records, 1e-8).is_none());
    assert!(interior_monotonicity_violation(&run.records, 1e-8).is_none());
    let parity = max_parity_residual(&run.records).expect("even data is tracked");
    assert!(parity < 1e-9, "even-parity residual {parity:e}");
}

#[test]
fn entropy_balance_on_positive_g() {
    let g0 = PeriodicField::from_fn(256, "g", |x| 1.0 + 0.5 * x.cos()).unwrap();
    let setup = spectral_setup(
        ModelSpec::g_equation(0.0),
        Scheme::Rk4,
        StepController::fixed(1e-3, 0.5),
        1,
    );
    let run = run_sampled(&setup, SimState::Spectral(g0)).unwrap();
    assert_eq!(run.termination, Termination::Completed);
    let checks = entropy_balance_deep(&run.records, 1e-6, 1e-3).unwrap();
    assert!(
        checks.max_residual < 1e-6,
        "entropy residual {:.3e}",
        checks.max_residual
    );
    assert!(checks.residual.iter().all(|c| c.satisfied));
    assert!(!checks.dissipation_sign.is_empty(), "g stays positive");
    assert!(checks.dissipation_sign.iter().all(|c| c.satisfied));
    assert!(checks.route_agreement.iter().all(|c| c.satisfied));
}

#[test]
fn constant_g_is_steady_with_zero_residual() {
    let g0 = PeriodicField::from_fn(64, "g", |_| 0.7).unwrap();
    let setup = spectral_setup(
        ModelSpec::g_equation(0.0),
        Scheme::Rk4,
        StepController::fixed(1e-2, 0.2),
        4,
    );
    let run = run_sampled(&setup, SimState::Spectral(g0.clone())).unwrap();
    for state in &run.states {
        for (a, b) in state.values().iter().zip(g0.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
    let checks = entropy_balance_deep(&run.records, 1e-12, 1e-3).unwrap();
    assert!(checks.max_residual < 1e-12);
}

#[test]
fn referee_energy_conservation_on_deep_model() {
    // deep-model run tracked through g = f_x; g0 = 0.5 cos x
    let f0 = PeriodicField::from_fn(256, "f", |x| 0.5 * x.sin()).unwrap();
    let setup = spectral_setup(
        ModelSpec::deep(),
        Scheme::Rk4,
        StepController::fixed(1e-3, 0.5),
        1,
    );
    let run = run_sampled(&setup, SimState::Spectral(f0)).unwrap();
    let (checks, max_res) = referee_energy_balance(&run.records, 1e-4);
    assert!(max_res < 1e-4, "referee residual {max_res:.3e}");
    assert!(checks.iter().all(|c| c.satisfied));

    // residual shrinks at the trapezoid rate under dt halving
    let setup_half = spectral_setup(
        ModelSpec::deep(),
        Scheme::Rk4,
        StepController::fixed(5e-4, 0.5),
        1,
    );
    let f0 = PeriodicField::from_fn(256, "f", |x| 0.5 * x.sin()).unwrap();
    let run_half = run_sampled(&setup_half, SimState::Spectral(f0)).unwrap();
    let (_, res_half) = referee_energy_balance(&run_half.records, 1e-4);
    assert!(
        res_half <= max_res / 2.0,
        "residual did not halve: {max_res:.3e} -> {res_half:.3e}"
    );
}

#[test]
fn zero_g_referee_residual_is_zero() {
    let recs = {
        let g0 = PeriodicField::zeros(64, "g").unwrap();
        let setup = spectral_setup(
            ModelSpec::g_equation(0.0),
            Scheme::Rk4,
            StepController::fixed(1e-2, 0.1),
            1,
        );
        run_sampled(&setup, SimState::Spectral(g0)).unwrap().records
    };
    let (_, max_res) = referee_energy_balance(&recs, 1e-12);
    assert_eq!(max_res, 0.0);
}

#[test]
fn touching_point_tracker_and_curvature_ode() {
    let a = 0.1;
    let f0 = PeriodicField::from_fn(1024, "f", |x| a * x.cos() + (L - a)).unwrap();
    let setup = RunSetup {
        model: ModelSpec::confined(L),
        opts: EvalOptions::boundary_touching(),
        quad: None,
        scheme: Scheme::Rk45,
        controller: StepController::adaptive(1e-9, 1e-11, 0.02),
        sample_every: 1,
        track_touch: true,
    };
    let run = run_sampled(&setup, SimState::Spectral(f0)).unwrap();
    assert!(run.records.len() >= 3);
    // the crest stays glued to the wall and Sigma stays zero there
    for r in &run.records {
        assert!((r.touch_value.unwrap() - L).abs() < 1e-6);
        assert!(r.touch_sigma.unwrap().abs() < 1e-6);
    }
    let ode = curvature_ode_check(&run.records, L).unwrap();
    assert!(
        ode.max_rel_discrepancy < 0.05,
        "curvature ODE discrepancy {:.3}",
        ode.max_rel_discrepancy
    );
}

#[test]
fn tracker_refuses_interior_data() {
    let f0 = PeriodicField::from_fn(128, "f", |x| 0.3 * x.cos()).unwrap();
    let setup = RunSetup {
        model: ModelSpec::confined(L),
        opts: EvalOptions::boundary_touching(),
        quad: None,
        scheme: Scheme::Rk45,
        controller: StepController::adaptive(1e-8, 1e-10, 0.1),
        sample_every: 1,
        track_touch: true,
    };
    assert!(run_sampled(&setup, SimState::Spectral(f0)).is_err());
}

#[test]
fn line_decay_bound_for_confined_model() {
    let itf = LineInterface::uniform(10.0, 101, |x| 0.5 * (-x * x).exp()).unwrap();
    let q = QuadratureSettings::for_interface(&itf);
    let setup = RunSetup {
        model: ModelSpec::confined(L),
        opts: EvalOptions::default(),
        quad: Some(q),
        scheme: Scheme::Rk4,
        controller: StepController::fixed(2e-3, 1.0),
        sample_every: 25,
        track_touch: false,
    };
    let run = run_sampled(&setup, SimState::Line(itf)).unwrap();
    assert_eq!(run.termination, Termination::Completed);
    let checks = decay_bound_linf_line(&run.records, L, 1.0).unwrap();
    assert!(!checks.is_empty());
    for c in &checks {
        assert!(c.satisfied, "violated at t = {}: {} > {}", c.t, c.measured, c.bound);
    }
    assert!((checks[0].bound - 0.5).abs() < 1e-12, "t = 0 bound is ||f0||_inf");
}
