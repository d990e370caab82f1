//! Named profile families.

use super::profile::{Domain, Profile, ProfileError};

/// Constant state.
pub fn constant(v: f64, rho: f64, p: f64, domain: Domain) -> Result<Profile, ProfileError> {
    Profile::parse(&v.to_string(), &rho.to_string(), &p.to_string(), domain)
}

/// Gaussian bump `a*exp(-(x-m)^2/s)` as expression text.
pub fn gaussian_bump(a: f64, m: f64, s: f64) -> String {
    format!("{a}*exp(-(x-({m}))^2/{s})")
}

/// Density exponent `k = 1 + 2/gamma` of the exponential family with `b == 1`.
pub fn remark1_density_rate(gamma: f64) -> f64 {
    1.0 + 2.0 / gamma
}

/// `p0 = exp(x)`, `rho0 = exp((1 + 2/gamma) x)` with arbitrary velocity.
/// Every point of this family has `b = 1` and `R2 != 0`, so it is smooth
/// whatever `v0` is.
pub fn remark1(gamma: f64, v0: &str, domain: Domain) -> Result<Profile, ProfileError> {
    let rho0 = format!("exp((1+2/{gamma})*x)");
    Profile::parse(v0, &rho0, "exp(x)", domain)
}

/// `rho0^gamma / gamma` as expression text.
pub fn isentropic_pressure(rho0: &str, gamma: f64) -> String {
    format!("({rho0})^{gamma}/{gamma}")
}
