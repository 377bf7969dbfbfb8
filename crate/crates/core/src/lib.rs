//! Shooting-method laboratory for radial backward self-similar profiles of
//! the compressible Navier-Stokes equations.
//!
//! Profiles are launched at a small radius `δ` from near-origin expansions
//! ([`initdata`]), integrated outward with an adaptive Dormand-Prince 5(4)
//! scheme ([`integrator`]) and classified by the sign of the velocity at
//! blow-up or at the integration horizon ([`sweep`]). The [`diagnostics`]
//! module evaluates weights, the smallness functional, energy integrals and
//! tail fits along computed profiles.

pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod initdata;
pub mod integrator;
pub mod model;
pub mod output;
pub mod quadrature;
pub mod sweep;

pub use error::{Error, Result};
pub use initdata::{CavitatingParams, SmoothParams, VelocityInterpretation};
pub use integrator::{
    integrate, integrate_system, IntegratorConfig, OdeSystem, ProfileTrajectory, TerminationKind,
    Trajectory,
};
pub use model::{PhysConsts, ProfileState, RhsDerivative};
pub use sweep::{classify, run_sweep, CellResult, Classification, Regime, SweepSpec};
