//! Conserved quantity of the reduced slope system.
//!
//! For `gamma != 1`:
//! `R1^2 = C |R2|^(4/(gamma+1)) - (2b/(gamma-1)) R2^2`, so
//! `C = (R1^2 + 2b/(gamma-1) R2^2) |R2|^(-4/(gamma+1))`.
//!
//! For `gamma == 1`: `R1^2 = C R2^2 - 2b R2^2 ln|R2|`, so
//! `C = R1^2/R2^2 + 2b ln|R2|`.
//!
//! Differentiating either form along `rhs_r` gives zero; the coefficient
//! of `R2^2` must be `2b/(gamma-1)` for the `gamma != 1` cancellation.

use serde::{Deserialize, Serialize};

use super::slopes::RState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum FirstIntegralC {
    Value(f64),
    /// `R2 = 0`: the system reduces to a scalar Riccati equation.
    Degenerate,
}

impl FirstIntegralC {
    pub fn value(self) -> Option<f64> {
        match self {
            FirstIntegralC::Value(c) => Some(c),
            FirstIntegralC::Degenerate => None,
        }
    }
}

/// `C` and the sum of the absolute values of its two terms. The latter
/// is the scale used for relative drift.
pub fn first_integral_terms(r: &RState) -> Option<(f64, f64)> {
    if r.r2 == 0.0 || r.gamma == -1.0 || !r.r2.is_finite() {
        return None;
    }
    let a2 = r.r2.abs();
    if r.gamma == 1.0 {
        let t1 = (r.r1 / r.r2).powi(2);
        let t2 = 2.0 * r.b * a2.ln();
        return Some((t1 + t2, t1.abs() + t2.abs()));
    }
    let alpha = 4.0 / (r.gamma + 1.0);
    let beta = 2.0 * r.b / (r.gamma - 1.0);
    let w = a2.powf(-alpha);
    let t1 = r.r1 * r.r1 * w;
    let t2 = beta * r.r2 * r.r2 * w;
    Some((t1 + t2, t1.abs() + t2.abs()))
}

pub fn first_integral(r: &RState) -> FirstIntegralC {
    match first_integral_terms(r) {
        Some((c, _)) => FirstIntegralC::Value(c),
        None => FirstIntegralC::Degenerate,
    }
}

/// Supremum of `|R1|` over the forward orbit of a bounded initial state,
/// from the level set of `C`. `None` when the orbit escapes or the
/// closed form does not apply.
pub fn orbit_sup_abs_r1(r: &RState) -> Option<f64> {
    let g = r.gamma;
    if !(g >= 1.0) {
        return None;
    }
    if r.r2 == 0.0 || r.b <= 0.0 {
        // Monotone decay of R1 towards 0 when it starts non-negative.
        return (r.r1 >= 0.0).then_some(r.r1);
    }
    // b > 0, R2 != 0: closed loop through the origin.
    let (c, _) = first_integral_terms(r)?;
    let peak = if g == 1.0 {
        // max of r^2 (C - 2b ln r): ln r* = (C - b)/(2b), value b r*^2.
        let rs = ((c - r.b) / (2.0 * r.b)).exp();
        (r.b * rs * rs).sqrt()
    } else {
        let alpha = 4.0 / (g + 1.0);
        let beta = 2.0 * r.b / (g - 1.0);
        let rs = (alpha * c / (2.0 * beta)).powf(1.0 / (2.0 - alpha));
        (beta * (2.0 - alpha) / alpha).sqrt() * rs
    };
    Some(peak.max(r.r1.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::slopes::rhs_r;
    use proptest::prelude::*;

    #[test]
    fn separatrix_has_zero_constant() {
        for g in [1.2, 1.4, 3.0] {
            let b: f64 = -0.7;
            let r2: f64 = 0.8;
            let r1 = (-2.0 * b / (g - 1.0)).sqrt() * r2.abs();
            let c = first_integral(&RState::new(r1, r2, b, g)).value().unwrap();
            assert!(c.abs() < 1e-14, "{c}");
        }
    }

    #[test]
    fn isothermal_unit_r2() {
        for (r1, b) in [(0.0, 1.0), (2.5, -3.0), (-1.0, 0.2)] {
            assert_eq!(first_integral(&RState::new(r1, 1.0, b, 1.0)), FirstIntegralC::Value(r1 * r1));
        }
    }

    #[test]
    fn degenerate_on_r2_zero() {
        assert_eq!(first_integral(&RState::new(1.0, 0.0, 1.0, 1.4)), FirstIntegralC::Degenerate);
        assert_eq!(first_integral(&RState::new(1.0, 1.0, 1.0, -1.0)), FirstIntegralC::Degenerate);
    }

    fn dc_dt(r: &RState, h: f64) -> f64 {
        // Central difference of C along the exact vector field.
        let d = rhs_r(&[r.r1, r.r2], r.b, r.gamma);
        let fwd = r.with_point(r.r1 + h * d[0], r.r2 + h * d[1]);
        let bwd = r.with_point(r.r1 - h * d[0], r.r2 - h * d[1]);
        let cf = first_integral(&fwd).value().unwrap();
        let cb = first_integral(&bwd).value().unwrap();
        (cf - cb) / (2.0 * h)
    }

    proptest! {
        #[test]
        fn constant_along_vector_field(
            r1 in -3.0f64..3.0, r2 in 0.2f64..3.0, b in -2.0f64..2.0,
            g in prop_oneof![Just(1.0), 1.1f64..3.0],
        ) {
            let r = RState::new(r1, r2, b, g);
            let (_, scale) = first_integral_terms(&r).unwrap();
            let rate = dc_dt(&r, 1e-5);
            prop_assert!(rate.abs() <= 1e-6 * scale.max(1.0), "dC/dt = {rate}");
        }
    }
}
