//! Riemann-slope dynamics along rays: the decoupled quadratic slope
//! system, its reduction to two equations, the first integral, blow-up
//! time estimation and phase portraits.

mod chaplygin;
mod first_integral;
pub mod integrator;
mod portrait;
mod slopes;
mod trajectory;

pub use chaplygin::{chaplygin_solve, ChaplyginOutcome, ChaplyginSolution};
pub use first_integral::{first_integral, first_integral_terms, orbit_sup_abs_r1, FirstIntegralC};
pub use portrait::{phase_portrait, separatrix_point, PortraitCurve, SeedSpec, SeedSpecError};
pub use slopes::{
    ray_derivative, reduce_to_r, rhs_augmented_ray, rhs_p, rhs_r, riemann_slopes, KValue,
    PVector, RState, RayState, Slopes, EPS_ZERO,
};
pub use trajectory::{
    blowup_time_estimate, integrate, integrate_with, BlowUpEstimate, IntegrateOptions, OdeError,
    Outcome, Trajectory, DEFAULT_TOL, ESCAPE_THRESHOLD,
};
