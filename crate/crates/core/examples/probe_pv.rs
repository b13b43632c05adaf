use muskat_core::models::ModelSpec;
use muskat_core::realline::{LineInterface, QuadratureSettings};
use muskat_core::runner::{run_sampled, RunSetup, Scheme, SimState};
use muskat_core::timestep::StepController;
use muskat_core::models::EvalOptions;
use std::f64::consts::FRAC_PI_2;

fn main() {
    for (n, dt) in [(150usize, 2e-3), (150, 5e-4), (300, 1e-3), (150, 1e-4)] {
        let itf = LineInterface::uniform(10.0, n, |x| (FRAC_PI_2 - 1e-4) * (-x.powi(6)).exp()).unwrap();
        let q = QuadratureSettings::for_interface(&itf);
        let setup = RunSetup {
            model: ModelSpec::confined_muskat(),
            opts: EvalOptions::default(),
            quad: Some(q),
            scheme: Scheme::Rk4,
            controller: StepController::fixed(dt, 0.1),
            sample_every: 10,
            track_touch: false,
        };
        match run_sampled(&setup, SimState::Line(itf)) {
            Ok(run) => {
                let rl = run.records.last().unwrap();
                println!("N={n} dt={dt:.0e}: {:?} at t={:.4}, linf {:.9} (max over run {:.9})",
                    run.termination.as_str(), rl.t, rl.linf,
                    run.records.iter().map(|r| r.linf).fold(0.0_f64, f64::max));
            }
            Err(e) => println!("N={n} dt={dt:.0e}: ERROR {e}"),
        }
    }
}
