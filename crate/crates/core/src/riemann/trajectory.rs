use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::first_integral::first_integral_terms;
use super::integrator::{solve, StepControl, Stop};
use super::slopes::{rhs_r, RState};

/// Magnitude at which a trajectory counts as escaped.
pub const ESCAPE_THRESHOLD: f64 = 1e8;
/// Default relative tolerance; the absolute one is a hundredth of it.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("integration horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("initial state is not finite")]
    NonFiniteState,
    #[error("trajectory did not escape; no blow-up time to estimate")]
    NotEscaped,
    #[error("integration exceeded the step budget at t = {0}")]
    StepBudget(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Bounded {
        t_end: f64,
    },
    Escaped {
        t_escape: f64,
    },
    BlowUpEstimated {
        t: f64,
        bracket: (f64, f64),
        low_confidence: bool,
    },
}

impl Outcome {
    pub fn is_bounded(&self) -> bool {
        matches!(self, Outcome::Bounded { .. })
    }

    pub fn blowup_time(&self) -> Option<f64> {
        match self {
            Outcome::BlowUpEstimated { t, .. } => Some(*t),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Bounded { .. } => "bounded",
            Outcome::Escaped { .. } => "escaped",
            Outcome::BlowUpEstimated { .. } => "blowup",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial: RState,
    /// `-1` for trajectories integrated backwards in time.
    pub direction: f64,
    pub times: Vec<f64>,
    pub states: Vec<[f64; 2]>,
    /// Largest relative change of the first integral; `None` on the
    /// `R2 = 0` branch and for `gamma = -1`.
    pub c_drift: Option<f64>,
    pub outcome: Outcome,
}

impl Trajectory {
    pub fn last(&self) -> [f64; 2] {
        *self.states.last().expect("trajectory has at least one state")
    }

    pub fn max_abs_r1(&self) -> f64 {
        self.states.iter().fold(0.0, |m, s| m.max(s[0].abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub rtol: f64,
    pub atol: f64,
    pub escape_threshold: f64,
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol * 1e-2,
            escape_threshold: ESCAPE_THRESHOLD,
        }
    }
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self::with_tol(DEFAULT_TOL)
    }
}

fn validate(r0: &RState, t_max: f64, opts: &IntegrateOptions) -> Result<(), OdeError> {
    if !(opts.rtol > 0.0 && opts.rtol.is_finite()) {
        return Err(OdeError::InvalidTolerance(opts.rtol));
    }
    if !(opts.atol >= 0.0 && opts.atol.is_finite()) {
        return Err(OdeError::InvalidTolerance(opts.atol));
    }
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(OdeError::InvalidHorizon(t_max));
    }
    if ![r0.r1, r0.r2, r0.b, r0.gamma].iter().all(|v| v.is_finite()) {
        return Err(OdeError::NonFiniteState);
    }
    Ok(())
}

/// Integrates the reduced slope system forward from `r0` until `t_max` or
/// escape, with relative tolerance `tol`. Escapes are upgraded to a
/// blow-up time estimate.
pub fn integrate(r0: &RState, t_max: f64, tol: f64) -> Result<Trajectory, OdeError> {
    integrate_with(r0, t_max, &IntegrateOptions::with_tol(tol), 1.0)
}

/// `direction = -1.0` integrates backwards in time (times stay positive
/// and measure elapsed backward time).
pub fn integrate_with(
    r0: &RState,
    t_max: f64,
    opts: &IntegrateOptions,
    direction: f64,
) -> Result<Trajectory, OdeError> {
    validate(r0, t_max, opts)?;
    let (b, g) = (r0.b, r0.gamma);
    let sign = direction.signum();
    let ctl = StepControl {
        rtol: opts.rtol,
        atol: opts.atol,
        escape_threshold: opts.escape_threshold,
        ..StepControl::default()
    };
    let sol = solve(
        |y: &[f64; 2]| {
            let d = rhs_r(y, b, g);
            [sign * d[0], sign * d[1]]
        },
        |y| y[0].abs().max(y[1].abs()),
        [r0.r1, r0.r2],
        t_max,
        ctl,
    );
    let t_last = *sol.times.last().unwrap();
    let outcome = match sol.stop {
        Stop::Reached => Outcome::Bounded { t_end: t_last },
        Stop::Escaped | Stop::StepUnderflow => Outcome::Escaped { t_escape: t_last },
        Stop::MaxSteps => return Err(OdeError::StepBudget(t_last)),
    };
    let c_drift = first_integral_terms(r0).map(|(c0, s0)| {
        sol.states
            .iter()
            .filter_map(|s| first_integral_terms(&r0.with_point(s[0], s[1])))
            .map(|(c, sc)| (c - c0).abs() / s0.max(sc))
            .fold(0.0, f64::max)
    });
    let mut traj = Trajectory {
        initial: *r0,
        direction: sign,
        times: sol.times,
        states: sol.states,
        c_drift,
        outcome,
    };
    if matches!(traj.outcome, Outcome::Escaped { .. }) && sign > 0.0 {
        if let Ok(est) = blowup_time_estimate(&traj) {
            traj.outcome = Outcome::BlowUpEstimated {
                t: est.t,
                bracket: est.bracket,
                low_confidence: est.low_confidence,
            };
        }
    }
    Ok(traj)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowUpEstimate {
    pub t: f64,
    pub bracket: (f64, f64),
    pub low_confidence: bool,
}

/// Extrapolates the blow-up time from the escape tail.
///
/// In every escaping regime `R1 ~ -k/(T - t)`, so `1/|R1|` is linear in
/// `t` near `T` (tail exponent 1). The line is fitted by least squares
/// over the last decade of growth and its root is `T`. On the pure
/// Riccati branch (`R2 = 0`) the closed form `R1 = -1/(T - t)` is exact.
pub fn blowup_time_estimate(traj: &Trajectory) -> Result<BlowUpEstimate, OdeError> {
    if !matches!(
        traj.outcome,
        Outcome::Escaped { .. } | Outcome::BlowUpEstimated { .. }
    ) {
        return Err(OdeError::NotEscaped);
    }
    let n = traj.times.len();
    let t_last = traj.times[n - 1];
    let m_last = traj.states[n - 1][0].abs();
    if traj.initial.r2 == 0.0 || m_last == 0.0 {
        let t = if m_last > 0.0 { t_last + 1.0 / m_last } else { t_last };
        return Ok(BlowUpEstimate {
            t,
            bracket: (t_last, t + 1e-12 * t.max(1.0)),
            low_confidence: m_last == 0.0,
        });
    }
    let tail: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(_, s)| s[0] < 0.0 && s[0].abs() >= 0.1 * m_last)
        .map(|(&t, s)| (t, 1.0 / s[0].abs()))
        .collect();
    // Two-point secant through the final samples.
    let two_point = if n >= 2 {
        let (t0, y0) = (traj.times[n - 2], 1.0 / traj.states[n - 2][0].abs());
        let y1 = 1.0 / m_last;
        if y0 > y1 {
            t_last + y1 * (t_last - t0) / (y0 - y1)
        } else {
            t_last + y1
        }
    } else {
        t_last + 1.0 / m_last
    };
    if tail.len() < 4 {
        let t = two_point.max(t_last);
        let width = (t - t_last).max(1.0 / m_last);
        return Ok(BlowUpEstimate {
            t,
            bracket: (t_last, t + 10.0 * width),
            low_confidence: true,
        });
    }
    let k = tail.len() as f64;
    let (st, sy) = tail.iter().fold((0.0, 0.0), |(a, b), (t, y)| (a + t, b + y));
    let (mt, my) = (st / k, sy / k);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, y) in &tail {
        sxy += (t - mt) * (y - my);
        sxx += (t - mt) * (t - mt);
    }
    let slope = sxy / sxx;
    let fit = if slope < 0.0 { mt - my / slope } else { two_point };
    let t = fit.max(t_last);
    let spread = (fit - two_point).abs();
    Ok(BlowUpEstimate {
        t,
        bracket: (t_last, t.max(two_point) + spread.max(1e-12 * t)),
        low_confidence: !(slope < 0.0) || fit < t_last,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn riccati_blowup_times() {
        for (r1, want) in [(-1.0, 1.0), (-2.0, 0.5), (-10.0, 0.1), (-0.1, 10.0)] {
            for b in [-1.0, 0.0, 2.0] {
                let tr = integrate(&RState::new(r1, 0.0, b, 1.4), 100.0, DEFAULT_TOL).unwrap();
                let t = tr.outcome.blowup_time().unwrap();
                assert!((t - want).abs() <= 1e-6 * want, "r1={r1} t={t}");
                assert!(tr.c_drift.is_none());
            }
        }
    }

    #[test]
    fn riccati_closed_form_along_trajectory() {
        let r10 = -1.5;
        let tr = integrate(&RState::new(r10, 0.0, 0.3, 1.4), 100.0, DEFAULT_TOL).unwrap();
        let t_star = 1.0 / r10.abs();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            if *t > 0.9 * t_star {
                break;
            }
            let exact = r10 / (1.0 + r10 * t);
            assert!((s[0] - exact).abs() <= 1e-9 * exact.abs().max(1.0), "t={t}");
            assert_eq!(s[1], 0.0);
        }
    }

    #[test]
    fn positive_riccati_decays() {
        let tr = integrate(&RState::new(2.0, 0.0, 0.0, 1.4), 50.0, DEFAULT_TOL).unwrap();
        assert_eq!(tr.outcome, Outcome::Bounded { t_end: 50.0 });
        assert_relative_eq!(tr.last()[0], 2.0 / (1.0 + 100.0), max_relative = 1e-8);
    }

    #[test]
    fn closed_loop_is_homoclinic() {
        // b > 0, R2 != 0: the level set of C is a loop through the origin;
        // both time directions approach the origin and stay on the loop.
        let r0 = RState::new(0.0, 1.0, 1.0, 1.4);
        let fwd = integrate(&r0, 200.0, DEFAULT_TOL).unwrap();
        let bwd = integrate_with(&r0, 200.0, &IntegrateOptions::default(), -1.0).unwrap();
        for tr in [&fwd, &bwd] {
            assert!(tr.outcome.is_bounded());
            assert!(tr.c_drift.unwrap() < 1e-8, "{:?}", tr.c_drift);
            let [r1, r2] = tr.last();
            assert!(r1.abs() < 0.05 && r2.abs() < 0.05 && r2 > 0.0, "{r1} {r2}");
        }
        assert!(fwd.last()[0] > 0.0);
        assert!(bwd.last()[0] < 0.0);
    }

    #[test]
    fn separatrix_side_decays() {
        // b < 0, R1 > 0, C > 0.
        let r0 = RState::new(3.0, 1.0, -1.0, 1.4);
        let c = crate::riemann::first_integral(&r0).value().unwrap();
        assert!(c > 0.0);
        let tr = integrate(&r0, 100.0, DEFAULT_TOL).unwrap();
        assert!(tr.outcome.is_bounded());
        let [r1, r2] = tr.last();
        assert!(r1 > 0.0 && r1 < 0.05 && r2 > 0.0 && r2 < 0.05);
    }

    #[test]
    fn r2_sign_is_preserved() {
        for (r1, r2, b) in [(-1.0, 0.5, 1.0), (-0.5, -2.0, -1.0), (1.0, -0.3, 0.5)] {
            let tr = integrate(&RState::new(r1, r2, b, 1.4), 30.0, DEFAULT_TOL).unwrap();
            assert!(tr.states.iter().all(|s| s[1].signum() == r2.signum()));
        }
    }

    #[test]
    fn estimate_rejects_bounded() {
        let tr = integrate(&RState::new(1.0, 0.0, 0.0, 1.4), 1.0, DEFAULT_TOL).unwrap();
        assert_eq!(blowup_time_estimate(&tr), Err(OdeError::NotEscaped));
    }

    #[test]
    fn invalid_arguments() {
        let r = RState::new(1.0, 0.0, 0.0, 1.4);
        assert!(matches!(integrate(&r, 1.0, 0.0), Err(OdeError::InvalidTolerance(_))));
        assert!(matches!(integrate(&r, -1.0, 1e-8), Err(OdeError::InvalidHorizon(_))));
        let r = RState::new(f64::NAN, 0.0, 0.0, 1.4);
        assert!(matches!(integrate(&r, 1.0, 1e-8), Err(OdeError::NonFiniteState)));
    }

    /// Fixed-step RK4 with `dt = 1e-7`, stopped once `max|R| >= 1e5`; the
    /// remaining time to the singularity is then below `1e-4`.
    fn brute_force_blowup(r0: &RState) -> f64 {
        let dt = 1e-7;
        let (b, g) = (r0.b, r0.gamma);
        let mut y = [r0.r1, r0.r2];
        let mut t = 0.0;
        while y[0].abs().max(y[1].abs()) < 1e5 {
            let k1 = rhs_r(&y, b, g);
            let k2 = rhs_r(&[y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]], b, g);
            let k3 = rhs_r(&[y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]], b, g);
            let k4 = rhs_r(&[y[0] + dt * k3[0], y[1] + dt * k3[1]], b, g);
            for i in 0..2 {
                y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            t += dt;
        }
        t
    }

    #[test]
    fn tail_fit_matches_brute_force() {
        let r0 = RState::new(-1.0, 1.0, -1.0, 1.4);
        let tr = integrate(&r0, 100.0, DEFAULT_TOL).unwrap();
        let Outcome::BlowUpEstimated { t, bracket, low_confidence } = tr.outcome else {
            panic!("{:?}", tr.outcome)
        };
        assert!(!low_confidence);
        assert!(bracket.0 <= t && t <= bracket.1);
        let oracle = brute_force_blowup(&r0);
        assert!((t - oracle).abs() <= 1e-3 * oracle, "fit {t} oracle {oracle}");
    }
}
