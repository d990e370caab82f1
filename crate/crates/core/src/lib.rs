//! Gradient-catastrophe analysis for the 1D non-isentropic polytropic
//! Euler equations.
//!
//! * [`gas`]: polytropic gas model.
//! * [`dsl`]: initial-data expressions with exact first derivatives.
//! * [`criterion`]: pointwise smooth/blow-up classification.
//! * [`riemann`]: Riemann-slope ODEs along rays.
//! * [`euler`]: finite-volume cross-check solver.
//! * [`scenario`], [`report`], [`commands`]: configuration, output and
//!   the command drivers behind the `gdblow` binary.

pub mod commands;
pub mod criterion;
pub mod dsl;
pub mod euler;
pub mod gas;
pub mod report;
pub mod riemann;
pub mod scenario;
