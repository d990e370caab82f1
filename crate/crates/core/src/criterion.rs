//! Pointwise smooth/blow-up classification of Cauchy data.
//!
//! Indicator fields at each point:
//!
//! ```text
//! R1 = v0',  R2 = p0' / sqrt(gamma rho0 p0),
//! K  = gamma p0 rho0' / (2 rho0 p0') - 1/2,  b = K - (gamma-1)/2
//! ```
//!
//! A point is safe when one of four inequality sets holds:
//!
//! 1. `b >= 0` and `R1 >= 0`
//! 2. `b > 0` and `R2 != 0`
//! 3. `b < 0`, `R1 >= 0` and `R1^2 + 2b/(gamma-1) R2^2 >= 0`
//! 4. `R2 = 0` and `R1 >= 0`
//!
//! The data stay smooth for all time iff every point is safe. The verdict
//! is relative to the sampled window `[a, b]`; grid refinement brackets
//! safe/unsafe transitions but does not certify the continuum.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Field, PointData, Profile, ProfileError};
use crate::gas::GasParams;
use crate::riemann::{
    chaplygin_solve, integrate, KValue, Outcome, RState, DEFAULT_TOL, EPS_ZERO,
};

/// Default half-width of the band around inequality boundaries.
pub const DEFAULT_INEQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriterionError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("unsupported adiabatic exponent {0}: the classifier needs gamma >= 1")]
    UnsupportedGamma(f64),
    #[error("grid needs at least 2 nodes, got {0}")]
    GridTooSmall(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    pub r1: f64,
    pub r2: f64,
    pub k: KValue,
    /// `None` exactly when `k` is infinite.
    pub b: Option<f64>,
    pub gamma: f64,
}

impl Indicators {
    /// Initial state of the reduced slope system on the ray through this
    /// point. On the `R2 = 0` branch `b` is irrelevant and set to 0.
    pub fn ray_state(&self) -> RState {
        RState::new(self.r1, self.r2, self.b.unwrap_or(0.0), self.gamma)
    }
}

/// Membership flags for the four safe sets, plus the Chaplygin bound for
/// `gamma = -1` verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConditionSets {
    pub b_nonneg_r1_nonneg: bool,
    pub b_pos_r2_nonzero: bool,
    pub b_neg_c_nonneg: bool,
    pub r2_zero_r1_nonneg: bool,
    pub chaplygin_bound: bool,
}

impl ConditionSets {
    pub fn any(&self) -> bool {
        self.b_nonneg_r1_nonneg
            || self.b_pos_r2_nonzero
            || self.b_neg_c_nonneg
            || self.r2_zero_r1_nonneg
            || self.chaplygin_bound
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointVerdict {
    pub x: f64,
    pub indicators: Indicators,
    pub sets: ConditionSets,
    pub safe: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    /// Derivatives blow up while the solution stays bounded.
    GradientCatastrophe,
    /// `gamma = -1`: the singularity is a loss of strict hyperbolicity.
    HyperbolicityLoss,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub nodes: usize,
    pub refine: bool,
    /// Bisection stops once the bracket is below `width * factor`.
    pub min_spacing_factor: f64,
    pub ineq_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            nodes: 401,
            refine: true,
            min_spacing_factor: 1e-6,
            ineq_tol: DEFAULT_INEQ_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub a: f64,
    pub b: f64,
    pub base_nodes: usize,
    pub refined_nodes: usize,
    pub min_spacing: f64,
    /// Brackets `[x_l, x_r]` around each safe/unsafe transition.
    pub transitions: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalVerdict {
    pub kind: VerdictKind,
    pub smooth: bool,
    /// Every classified node in coordinate order.
    pub points: Vec<PointVerdict>,
    pub witnesses: Vec<PointVerdict>,
    pub predicted_t: Option<f64>,
    pub grid: GridMeta,
}

fn is_zero(q: f64, scale: f64) -> bool {
    q.abs() <= EPS_ZERO * scale.max(1.0)
}

/// Indicator fields at one point.
pub fn point_indicators(pd: &PointData, gp: &GasParams) -> Indicators {
    let g = gp.gamma();
    let r1 = pd.dv0;
    if is_zero(pd.dp0, pd.p0) {
        return Indicators {
            r1,
            r2: 0.0,
            k: KValue::Infinite,
            b: None,
            gamma: g,
        };
    }
    let r2 = pd.dp0 / (g * pd.rho0 * pd.p0).sqrt();
    let k = g * pd.p0 * pd.drho0 / (2.0 * pd.rho0 * pd.dp0) - 0.5;
    Indicators {
        r1,
        r2,
        k: KValue::Finite(k),
        b: Some(k - 0.5 * (g - 1.0)),
        gamma: g,
    }
}

/// Evaluates the four safe sets with a symmetric band `tol` around each
/// boundary; non-strict inequalities resolve towards safe, the strict
/// `b > 0` of set 2 does not.
pub fn classify_point(x: f64, ind: &Indicators, tol: f64) -> PointVerdict {
    let ge0 = |q: f64| q >= -tol;
    let mut sets = ConditionSets::default();
    match ind.b {
        None => {
            sets.r2_zero_r1_nonneg = ge0(ind.r1);
        }
        Some(b) => {
            sets.b_nonneg_r1_nonneg = ge0(b) && ge0(ind.r1);
            sets.b_pos_r2_nonzero = b > tol && ind.r2 != 0.0;
            // At gamma = 1 the coefficient 2b/(gamma-1) is -infinity for
            // b < 0, so set 3 holds only on R2 = 0, which routes to set 4.
            if b < -tol && ge0(ind.r1) && ind.gamma != 1.0 {
                let beta = 2.0 * b / (ind.gamma - 1.0);
                let lhs = ind.r1 * ind.r1 + beta * ind.r2 * ind.r2;
                let scale = ind.r1 * ind.r1 + beta.abs() * ind.r2 * ind.r2;
                sets.b_neg_c_nonneg = lhs >= -tol * scale.max(1.0);
            }
            if ind.r2 == 0.0 {
                sets.r2_zero_r1_nonneg = ge0(ind.r1);
            }
        }
    }
    PointVerdict {
        x,
        indicators: *ind,
        sets,
        safe: sets.any(),
    }
}

fn require_classical_gamma(gp: &GasParams) -> Result<(), CriterionError> {
    if gp.gamma() >= 1.0 {
        Ok(())
    } else {
        Err(CriterionError::UnsupportedGamma(gp.gamma()))
    }
}

/// Samples the window, classifies each node and bisects every safe/unsafe
/// transition down to the minimum spacing.
fn classify_grid<F>(
    pr: &Profile,
    grid: &GridSpec,
    kind: VerdictKind,
    classify: F,
) -> Result<GlobalVerdict, CriterionError>
where
    F: Fn(f64) -> Result<PointVerdict, CriterionError>,
{
    if grid.nodes < 2 {
        return Err(CriterionError::GridTooSmall(grid.nodes));
    }
    let d = pr.domain;
    let xs = d.linspace(grid.nodes);
    let mut points = xs.iter().map(|&x| classify(x)).collect::<Result<Vec<_>, _>>()?;
    let min_spacing = d.width() * grid.min_spacing_factor;
    let mut transitions = Vec::new();
    let mut extra = Vec::new();
    if grid.refine {
        for w in points.windows(2) {
            let (mut lo, mut hi) = (w[0], w[1]);
            if lo.safe == hi.safe {
                continue;
            }
            while hi.x - lo.x >= min_spacing {
                let mid = classify(0.5 * (lo.x + hi.x))?;
                extra.push(mid);
                if mid.safe == lo.safe {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            transitions.push((lo.x, hi.x));
        }
    }
    let refined_nodes = extra.len();
    points.extend(extra);
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    let witnesses: Vec<PointVerdict> = points.iter().filter(|p| !p.safe).copied().collect();
    Ok(GlobalVerdict {
        kind,
        smooth: witnesses.is_empty(),
        points,
        witnesses,
        predicted_t: None,
        grid: GridMeta {
            a: d.a,
            b: d.b,
            base_nodes: grid.nodes,
            refined_nodes,
            min_spacing,
            transitions,
        },
    })
}

/// Full non-isentropic classification.
pub fn classify_profile(
    pr: &Profile,
    gp: &GasParams,
    grid: &GridSpec,
) -> Result<GlobalVerdict, CriterionError> {
    require_classical_gamma(gp)?;
    classify_grid(pr, grid, VerdictKind::GradientCatastrophe, |x| {
        let pd = pr.point(x)?;
        Ok(classify_point(x, &point_indicators(&pd, gp), grid.ineq_tol))
    })
}

/// Isentropic criterion `v0' >= rho0^((gamma-3)/2) |rho0'|`, evaluated
/// directly from `v0` and `rho0`; `p0` is ignored.
pub fn classify_isentropic(
    pr: &Profile,
    gp: &GasParams,
    grid: &GridSpec,
) -> Result<GlobalVerdict, CriterionError> {
    require_classical_gamma(gp)?;
    let g = gp.gamma();
    let tol = grid.ineq_tol;
    classify_grid(pr, grid, VerdictKind::GradientCatastrophe, |x| {
        let (_, dv) = pr.eval_field(Field::V0, x)?;
        let (rho, drho) = positive_density(pr, x)?;
        let flat = is_zero(drho, rho);
        let weight = if flat { 0.0 } else { rho.powf(0.5 * (g - 3.0)) * drho };
        let ok = dv >= weight.abs() - tol;
        let mut sets = ConditionSets::default();
        if flat {
            sets.r2_zero_r1_nonneg = ok;
        } else {
            sets.b_neg_c_nonneg = ok;
        }
        let indicators = Indicators {
            r1: dv,
            r2: weight,
            k: if flat { KValue::Infinite } else { KValue::Finite(0.0) },
            b: (!flat).then_some(-0.5 * (g - 1.0)),
            gamma: g,
        };
        Ok(PointVerdict {
            x,
            indicators,
            sets,
            safe: ok,
        })
    })
}

fn positive_density(pr: &Profile, x: f64) -> Result<(f64, f64), CriterionError> {
    let (rho, drho) = pr.eval_field(Field::Rho0, x)?;
    if !(rho > 0.0) {
        return Err(ProfileError::Positivity {
            field: "rho0",
            x,
            value: rho,
        }
        .into());
    }
    Ok((rho, drho))
}

/// Chaplygin gas (`gamma = -1`, `p0 = -1/rho0`, so `K = 0`, `b = 1` and
/// `R2 = rho0'/rho0^2`): unsafe iff `R1 < -|R2|`. `p0` is ignored.
pub fn classify_chaplygin(pr: &Profile, grid: &GridSpec) -> Result<GlobalVerdict, CriterionError> {
    let tol = grid.ineq_tol;
    classify_grid(pr, grid, VerdictKind::HyperbolicityLoss, |x| {
        let (_, dv) = pr.eval_field(Field::V0, x)?;
        let (rho, drho) = positive_density(pr, x)?;
        let r2 = drho / (rho * rho);
        let ok = !(dv < -r2.abs() - tol);
        let sets = ConditionSets {
            chaplygin_bound: ok,
            ..Default::default()
        };
        Ok(PointVerdict {
            x,
            indicators: Indicators {
                r1: dv,
                r2,
                k: KValue::Finite(0.0),
                b: Some(1.0),
                gamma: -1.0,
            },
            sets,
            safe: ok,
        })
    })
}

/// Remark-style entropy expression `-(1/2) S0' / (rho0^(gamma+1) (ln p0)')`.
/// Differs from [`point_indicators`]' `K` by the factor `rho0^-(gamma+1)`;
/// reported for comparison only, never used for classification.
pub fn entropy_form_k(pd: &PointData, gp: &GasParams) -> KValue {
    if is_zero(pd.dp0, pd.p0) {
        return KValue::Infinite;
    }
    let g = gp.gamma();
    let dlnp = pd.dp0 / pd.p0;
    let ds = dlnp - g * pd.drho0 / pd.rho0;
    KValue::Finite(-0.5 * ds / (pd.rho0.powf(g + 1.0) * dlnp))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSettings {
    pub t_max: f64,
    pub tol: f64,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self {
            t_max: 100.0,
            tol: DEFAULT_TOL,
        }
    }
}

/// Ray-ODE summary for one witness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessOde {
    pub x: f64,
    pub outcome: Outcome,
    pub blowup_time: Option<f64>,
    pub c_drift: Option<f64>,
}

/// Integrates the slope system from every witness.
pub fn witness_odes(verdict: &GlobalVerdict, settings: &OdeSettings) -> Vec<WitnessOde> {
    verdict
        .witnesses
        .iter()
        .map(|w| {
            if verdict.kind == VerdictKind::HyperbolicityLoss {
                let o = chaplygin_solve(w.indicators.r1, w.indicators.r2, 0.0);
                let outcome = match o.blowup_time {
                    Some(t) => Outcome::BlowUpEstimated {
                        t,
                        bracket: (t, t),
                        low_confidence: false,
                    },
                    None => Outcome::Bounded {
                        t_end: settings.t_max,
                    },
                };
                return WitnessOde {
                    x: w.x,
                    outcome,
                    blowup_time: o.blowup_time,
                    c_drift: None,
                };
            }
            match integrate(&w.indicators.ray_state(), settings.t_max, settings.tol) {
                Ok(tr) => WitnessOde {
                    x: w.x,
                    outcome: tr.outcome,
                    blowup_time: tr.outcome.blowup_time(),
                    c_drift: tr.c_drift,
                },
                Err(_) => WitnessOde {
                    x: w.x,
                    outcome: Outcome::Bounded { t_end: 0.0 },
                    blowup_time: None,
                    c_drift: None,
                },
            }
        })
        .collect()
}

/// Fills `predicted_t` with the earliest witness blow-up time.
pub fn attach_predicted_time(verdict: &mut GlobalVerdict, odes: &[WitnessOde]) {
    verdict.predicted_t = odes
        .iter()
        .filter_map(|o| o.blowup_time)
        .filter(|t| *t > 0.0)
        .min_by(f64::total_cmp);
}
