//! Polytropic gas model: parameters, primitive states and the
//! thermodynamic conversions every other module builds on.
//!
//! Interfaces take primitive variables `(v, rho, p)`. The Riemann-slope
//! formulas in [`crate::riemann`] work with `(v, tau, p)` where
//! `tau = 1/rho` is the specific volume; [`PrimitiveState::specific_volume`]
//! does that conversion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GasError {
    #[error("domain error: {field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("domain error: adiabatic exponent must be finite and non-zero, got {0}")]
    InvalidGamma(f64),
    #[error("domain error: sound speed needs gamma > 0, got {0}")]
    NonHyperbolicGamma(f64),
}

/// Adiabatic exponent of the polytropic law `p = rho^gamma e^S / gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasParams {
    gamma: f64,
}

impl GasParams {
    pub fn new(gamma: f64) -> Result<Self, GasError> {
        if !gamma.is_finite() || gamma == 0.0 {
            return Err(GasError::InvalidGamma(gamma));
        }
        Ok(Self { gamma })
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `gamma == 1`, the logarithmic first-integral branch.
    pub fn is_isothermal(&self) -> bool {
        self.gamma == 1.0
    }

    /// `gamma == -1`.
    pub fn is_chaplygin(&self) -> bool {
        self.gamma == -1.0
    }
}

impl Default for GasParams {
    fn default() -> Self {
        Self { gamma: 1.4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveState {
    pub v: f64,
    pub rho: f64,
    pub p: f64,
}

impl PrimitiveState {
    pub fn new(v: f64, rho: f64, p: f64) -> Result<Self, GasError> {
        let s = Self { v, rho, p };
        s.validate()?;
        Ok(s)
    }

    /// Checks the away-from-vacuum condition `rho > 0, p > 0`.
    pub fn validate(&self) -> Result<(), GasError> {
        // `!(x > 0)` also rejects NaN.
        if !(self.rho > 0.0) {
            return Err(GasError::NonPositive {
                field: "rho",
                value: self.rho,
            });
        }
        if !(self.p > 0.0) {
            return Err(GasError::NonPositive {
                field: "p",
                value: self.p,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn specific_volume(&self) -> f64 {
        1.0 / self.rho
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharSpeeds {
    pub xi1: f64,
    pub xi2: f64,
    pub xi3: f64,
}

/// `c = sqrt(gamma p / rho)`.
pub fn sound_speed(state: &PrimitiveState, gp: &GasParams) -> Result<f64, GasError> {
    state.validate()?;
    if gp.gamma <= 0.0 {
        return Err(GasError::NonHyperbolicGamma(gp.gamma));
    }
    Ok((gp.gamma * state.p / state.rho).sqrt())
}

/// Eigenvalues `(v - c, v, v + c)` of the 1D Euler system.
pub fn char_speeds(state: &PrimitiveState, gp: &GasParams) -> Result<CharSpeeds, GasError> {
    let c = sound_speed(state, gp)?;
    Ok(CharSpeeds {
        xi1: state.v - c,
        xi2: state.v,
        xi3: state.v + c,
    })
}

/// Specific entropy `S = ln(gamma p / rho^gamma)`, i.e. the polytropic law
/// `p = rho^gamma e^S / gamma` solved for `S`.
///
/// The alternative normalisation `ln(p / rho^gamma)` differs by the
/// constant `ln gamma`, so every derivative-based quantity agrees.
pub fn entropy(state: &PrimitiveState, gp: &GasParams) -> Result<f64, GasError> {
    state.validate()?;
    Ok((gp.gamma * state.p).ln() - gp.gamma * state.rho.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn gp(g: f64) -> GasParams {
        GasParams::new(g).unwrap()
    }

    #[test]
    fn sound_speed_examples() {
        for g in [1.1, 1.4, 2.0, 3.0] {
            let s = PrimitiveState::new(0.0, 1.0, 1.0 / g).unwrap();
            assert_relative_eq!(sound_speed(&s, &gp(g)).unwrap(), 1.0, epsilon = 1e-15);
        }
        let s = PrimitiveState::new(0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(sound_speed(&s, &gp(1.4)).unwrap(), 1.4f64.sqrt());
        let s = PrimitiveState::new(5.0, 4.0, 1.0).unwrap();
        assert_relative_eq!(sound_speed(&s, &gp(2.0)).unwrap(), 0.5f64.sqrt());
    }

    #[test]
    fn char_speed_examples() {
        let g = 1.4;
        let c = char_speeds(&PrimitiveState::new(0.0, 1.0, 1.0 / g).unwrap(), &gp(g)).unwrap();
        assert_relative_eq!(c.xi1, -1.0, epsilon = 1e-15);
        assert_eq!(c.xi2, 0.0);
        assert_relative_eq!(c.xi3, 1.0, epsilon = 1e-15);

        let c = char_speeds(&PrimitiveState::new(2.0, 1.0, 1.0 / g).unwrap(), &gp(g)).unwrap();
        assert_relative_eq!(c.xi1, 1.0, epsilon = 1e-15);
        assert_relative_eq!(c.xi3, 3.0, epsilon = 1e-15);

        let c = char_speeds(&PrimitiveState::new(0.0, 1.0, 1.0).unwrap(), &gp(g)).unwrap();
        assert_relative_eq!(c.xi3, 1.4f64.sqrt());
        assert_relative_eq!(c.xi1, -(1.4f64.sqrt()));
    }

    #[test]
    fn entropy_examples() {
        let e = std::f64::consts::E;
        for g in [1.2, 1.4, 3.0] {
            let s = |rho: f64, p: f64| entropy(&PrimitiveState { v: 0.0, rho, p }, &gp(g)).unwrap();
            assert!(s(1.0, 1.0 / g).abs() < 1e-15);
            assert_relative_eq!(s(1.0, e / g), 1.0, epsilon = 1e-15);
            assert!(s(2.0, 2f64.powf(g) / g).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_vacuum_and_bad_gamma() {
        assert_eq!(
            PrimitiveState::new(0.0, 0.0, 1.0),
            Err(GasError::NonPositive {
                field: "rho",
                value: 0.0
            })
        );
        assert!(matches!(
            PrimitiveState::new(0.0, 1.0, -1.0),
            Err(GasError::NonPositive { field: "p", .. })
        ));
        assert!(PrimitiveState::new(0.0, f64::NAN, 1.0).is_err());
        assert!(GasParams::new(0.0).is_err());
        assert!(GasParams::new(f64::INFINITY).is_err());
        let s = PrimitiveState::new(0.0, 1.0, 1.0).unwrap();
        assert!(sound_speed(&s, &gp(-1.0)).is_err());
    }

    proptest! {
        #[test]
        fn speeds_are_strictly_ordered(
            v in -10.0f64..10.0, rho in 1e-3f64..1e3, p in 1e-3f64..1e3, g in 1.0f64..5.0
        ) {
            let s = PrimitiveState::new(v, rho, p).unwrap();
            let c = char_speeds(&s, &gp(g)).unwrap();
            prop_assert!(c.xi1 < c.xi2 && c.xi2 < c.xi3);
            prop_assert_eq!(c.xi2, v);
            let cs = sound_speed(&s, &gp(g)).unwrap();
            prop_assert!(((c.xi3 - c.xi1) - 2.0 * cs).abs() <= 1e-12 * (1.0 + v.abs() + cs));
        }

        #[test]
        fn isentropic_normalisation(rho in 1e-3f64..1e3, g in 1.0f64..5.0) {
            let s = entropy(&PrimitiveState { v: 0.0, rho, p: rho.powf(g) / g }, &gp(g)).unwrap();
            prop_assert!(s.abs() < 1e-11);
        }

        #[test]
        fn sound_speed_ignores_velocity(
            v in -100.0f64..100.0, rho in 1e-3f64..1e3, p in 1e-3f64..1e3
        ) {
            let a = sound_speed(&PrimitiveState { v, rho, p }, &gp(1.4)).unwrap();
            let b = sound_speed(&PrimitiveState { v: 0.0, rho, p }, &gp(1.4)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
