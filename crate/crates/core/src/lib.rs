//! Numerical laboratory for one-dimensional nonlocal interface models of
//! flow in porous media.
//!
//! Two backends share one diagnostics layer:
//! * [`spectral`] — Fourier collocation on the 2*pi torus with exact
//!   multiplier operators (Zygmund operator, Hilbert transform, spectral
//!   derivatives, linear semigroup);
//! * [`realline`] — cubic splines on a truncated line with adaptive Lobatto
//!   quadrature for the principal-value Muskat kernels.
//!
//! [`models`] holds the five right-hand sides, [`timestep`] the RK4 /
//! Dormand-Prince 5(4) / exponential integrators, [`diagnostics`] every
//! tracked quantity and analytic bound, and [`runner`] the sampled
//! simulation loop.

pub mod diagnostics;
pub mod error;
pub mod models;
pub mod realline;
pub mod runner;
pub mod spectral;
pub mod timestep;

pub use error::{Error, Result};
pub use models::{EvalOptions, ModelKind, ModelSpec, StabilityReport};
pub use realline::{LineInterface, QuadratureSettings};
pub use runner::{run_sampled, RunSetup, SampledRun, Scheme, SimState, Termination};
pub use spectral::PeriodicField;
pub use timestep::{StepController, Stepping};
