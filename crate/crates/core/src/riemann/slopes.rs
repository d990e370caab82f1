//! Riemann slopes of the augmented gas-dynamics system and their
//! right-hand sides along rays.
//!
//! With `u = (v, tau, p)`, `tau = 1/rho` and `s = sqrt(gamma u3 / u2)`,
//! the slopes are the left-eigenvector projections of `(v', tau', p')`:
//!
//! ```text
//! P1 = v' - p'/s,   P2 = s tau' + p'/s,   P3 = v' + p'/s
//! ```

use serde::{Deserialize, Serialize};

use crate::gas::{GasError, GasParams, PrimitiveState};

/// Relative zero threshold shared with the criterion.
pub const EPS_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PVector {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl PVector {
    pub fn new(p1: f64, p2: f64, p3: f64) -> Self {
        Self { p1, p2, p3 }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.p1, self.p2, self.p3]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Reduction constant `K = P2 / (P1 - P3)`, conserved along rays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum KValue {
    Finite(f64),
    /// `P1 = P3` with `P2 != 0`, or the `R2 = 0` convention of the criterion.
    Infinite,
    /// `P1 = P3` and `P2 = 0`.
    Indeterminate,
}

impl KValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            KValue::Finite(k) => Some(k),
            _ => None,
        }
    }
}

/// Reduced slopes `R1 = (P1+P3)/2`, `R2 = (P3-P1)/2` with the constant
/// `b = K - (gamma-1)/2` of the ray they start on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RState {
    pub r1: f64,
    pub r2: f64,
    pub b: f64,
    pub gamma: f64,
}

impl RState {
    pub fn new(r1: f64, r2: f64, b: f64, gamma: f64) -> Self {
        Self { r1, r2, b, gamma }
    }

    pub fn with_point(self, r1: f64, r2: f64) -> Self {
        Self { r1, r2, ..self }
    }
}

/// State transported along a ray: `u = (velocity, specific volume,
/// pressure)` and the slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RayState {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub p: PVector,
}

impl RayState {
    pub fn to_array(self) -> [f64; 6] {
        [self.u1, self.u2, self.u3, self.p.p1, self.p.p2, self.p.p3]
    }

    pub fn from_array(a: [f64; 6]) -> Self {
        Self {
            u1: a[0],
            u2: a[1],
            u3: a[2],
            p: PVector::new(a[3], a[4], a[5]),
        }
    }

    pub fn from_primitive(state: &PrimitiveState, p: PVector) -> Self {
        Self {
            u1: state.v,
            u2: state.specific_volume(),
            u3: state.p,
            p,
        }
    }
}

/// Spatial slopes `(dv/dx, drho/dx, dp/dx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slopes {
    pub dv: f64,
    pub drho: f64,
    pub dp: f64,
}

pub fn riemann_slopes(
    state: &PrimitiveState,
    slopes: Slopes,
    gp: &GasParams,
) -> Result<PVector, GasError> {
    state.validate()?;
    if gp.gamma() <= 0.0 {
        return Err(GasError::NonHyperbolicGamma(gp.gamma()));
    }
    let s = (gp.gamma() * state.p * state.rho).sqrt();
    let dtau = -slopes.drho / (state.rho * state.rho);
    let q = slopes.dp / s;
    Ok(PVector::new(slopes.dv - q, s * dtau + q, slopes.dv + q))
}

/// `(R1, R2, K)` from a slope vector.
pub fn reduce_to_r(p: PVector) -> (f64, f64, KValue) {
    let r1 = 0.5 * (p.p1 + p.p3);
    let r2 = 0.5 * (p.p3 - p.p1);
    let diff = p.p1 - p.p3;
    let scale = p.p1.abs().max(p.p3.abs()).max(1.0);
    let k = if diff.abs() > EPS_ZERO * scale {
        KValue::Finite(p.p2 / diff)
    } else if p.p2.abs() > EPS_ZERO * p.p2.abs().max(scale) {
        KValue::Infinite
    } else {
        KValue::Indeterminate
    };
    (r1, r2, k)
}

/// Quadratic slope sources; they do not depend on `u`.
pub fn rhs_p(p: &[f64; 3], gamma: f64) -> [f64; 3] {
    let [p1, p2, p3] = *p;
    let a = (gamma + 1.0) / 4.0;
    let c = (3.0 - gamma) / 4.0;
    let cross = 0.25 * p1 * p2 - c * p1 * p3 - 0.25 * p2 * p3;
    [
        -a * p1 * p1 + cross,
        -a * p2 * (p1 + p3),
        -a * p3 * p3 + cross,
    ]
}

/// `dR1/dt = -R1^2 + b R2^2`, `dR2/dt = -(gamma+1)/2 R1 R2`.
pub fn rhs_r(r: &[f64; 2], b: f64, gamma: f64) -> [f64; 2] {
    let [r1, r2] = *r;
    [-r1 * r1 + b * r2 * r2, -0.5 * (gamma + 1.0) * r1 * r2]
}

/// Six-component ray system `(U1, U2, U3, F1, F2, F3)`.
pub fn rhs_augmented_ray(s: &[f64; 6], gamma: f64) -> [f64; 6] {
    let [_, u2, u3, p1, p2, p3] = *s;
    let f = rhs_p(&[p1, p2, p3], gamma);
    [
        -(gamma * u2 * u3).sqrt() * p3,
        0.5 * u2 * p1 + u2 / (2.0 * gamma * u3) * p3,
        -gamma * u3 * p1,
        f[0],
        f[1],
        f[2],
    ]
}

/// Checked variant of [`rhs_augmented_ray`].
pub fn ray_derivative(s: &RayState, gp: &GasParams) -> Result<RayState, GasError> {
    if !(s.u2 > 0.0) {
        return Err(GasError::NonPositive {
            field: "u2",
            value: s.u2,
        });
    }
    if !(s.u3 > 0.0) {
        return Err(GasError::NonPositive {
            field: "u3",
            value: s.u3,
        });
    }
    Ok(RayState::from_array(rhs_augmented_ray(
        &s.to_array(),
        gp.gamma(),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn slopes_examples() {
        let g = 1.4;
        let gp = GasParams::new(g).unwrap();
        let st = PrimitiveState::new(0.3, 1.0, 1.0 / g).unwrap();
        let zero = Slopes {
            dv: 0.0,
            drho: 0.0,
            dp: 0.0,
        };
        assert_eq!(riemann_slopes(&st, zero, &gp).unwrap(), PVector::new(0.0, 0.0, 0.0));
        let p = riemann_slopes(
            &st,
            Slopes {
                dv: 1.0,
                drho: 0.0,
                dp: 0.0,
            },
            &gp,
        )
        .unwrap();
        assert_eq!(p, PVector::new(1.0, 0.0, 1.0));
        let (r1, r2, k) = reduce_to_r(p);
        assert_eq!((r1, r2, k), (1.0, 0.0, KValue::Indeterminate));
    }

    #[test]
    fn isentropic_slopes_match_density_weight() {
        // p = rho^g/g  =>  p' = rho^(g-1) rho'
        for g in [1.2, 1.4, 2.0, 3.0] {
            let gp = GasParams::new(g).unwrap();
            for (rho, drho) in [(1.3, 0.4), (0.7, -1.1), (2.0, 0.05)] {
                let st = PrimitiveState::new(0.0, rho, rho.powf(g) / g).unwrap();
                let sl = Slopes {
                    dv: 0.2,
                    drho,
                    dp: rho.powf(g - 1.0) * drho,
                };
                let (_, r2, k) = reduce_to_r(riemann_slopes(&st, sl, &gp).unwrap());
                assert_relative_eq!(r2, rho.powf((g - 3.0) / 2.0) * drho, max_relative = 1e-13);
                assert!(k.finite().unwrap().abs() < 1e-13);
            }
        }
    }

    #[test]
    fn reduce_examples() {
        let (r1, r2, k) = reduce_to_r(PVector::new(0.0, 2.0, 2.0));
        assert_eq!((r1, r2, k), (1.0, 1.0, KValue::Finite(-1.0)));
        let (_, _, k) = reduce_to_r(PVector::new(1.0, 3.0, 1.0));
        assert_eq!(k, KValue::Infinite);
    }

    #[test]
    fn rhs_p_examples() {
        assert_eq!(rhs_p(&[0.0; 3], 1.4), [0.0; 3]);
        assert_eq!(rhs_p(&[1.0, 0.0, 1.0], 3.0), [-1.0, 0.0, -1.0]);
    }

    #[test]
    fn rhs_r_examples() {
        assert_eq!(rhs_r(&[2.0, 0.0], 0.7, 1.4), [-4.0, 0.0]);
        assert_eq!(rhs_r(&[0.0, 1.0], 1.0, 1.4), [1.0, 0.0]);
    }

    #[test]
    fn augmented_examples() {
        let g = 1.4;
        let d = rhs_augmented_ray(&[0.5, 2.0, 3.0, 0.0, 0.0, 0.0], g);
        assert_eq!(d, [0.0; 6]);
        let d = rhs_augmented_ray(&[0.0, 1.0, 1.0 / g, 1.0, 0.0, 1.0], g);
        assert_relative_eq!(d[0], -1.0, epsilon = 1e-15);
        assert_relative_eq!(d[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(d[2], -1.0, epsilon = 1e-15);
        let gp = GasParams::new(g).unwrap();
        let bad = RayState::from_array([0.0, -1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(ray_derivative(&bad, &gp).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        // Equivariance under (P1, P2, P3) -> (P3, -P2, P1), i.e. R2 -> -R2.
        #[test]
        fn swap_symmetry(p1 in -5.0f64..5.0, p2 in -5.0f64..5.0, p3 in -5.0f64..5.0, g in 1.0f64..3.0) {
            let f = rhs_p(&[p1, p2, p3], g);
            let fs = rhs_p(&[p3, -p2, p1], g);
            let tol = 1e-12 * (1.0 + p1.abs() + p2.abs() + p3.abs()).powi(2);
            prop_assert!((fs[0] - f[2]).abs() <= tol);
            prop_assert!((fs[1] + f[1]).abs() <= tol);
            prop_assert!((fs[2] - f[0]).abs() <= tol);
        }

        // The linear map P -> R carries the P-system onto the R-system.
        #[test]
        fn p_to_r_equivalence(p1 in -5.0f64..5.0, p2 in -5.0f64..5.0, p3 in -5.0f64..5.0, g in 1.0f64..3.0) {
            prop_assume!((p1 - p3).abs() > 1e-3);
            let (r1, r2, k) = reduce_to_r(PVector::new(p1, p2, p3));
            let b = k.finite().unwrap() - 0.5 * (g - 1.0);
            let f = rhs_p(&[p1, p2, p3], g);
            let want = rhs_r(&[r1, r2], b, g);
            let got = [0.5 * (f[0] + f[2]), 0.5 * (f[2] - f[0])];
            let tol = 1e-11 * (1.0 + p1.abs() + p2.abs() + p3.abs()).powi(2);
            prop_assert!((got[0] - want[0]).abs() <= tol, "{got:?} {want:?}");
            prop_assert!((got[1] - want[1]).abs() <= tol, "{got:?} {want:?}");
        }
    }
}
