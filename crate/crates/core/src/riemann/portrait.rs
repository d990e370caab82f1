use std::str::FromStr;

use thiserror::Error;

use super::slopes::RState;
use super::trajectory::{integrate_with, IntegrateOptions, OdeError, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid seed spec {spec:?}: {reason}")]
pub struct SeedSpecError {
    pub spec: String,
    pub reason: String,
}

/// Seed layouts for phase portraits.
///
/// * `circle:N:RADIUS`: `N` points on a circle about the origin.
/// * `grid:R1LO:R1HI:N1:R2LO:R2HI:N2`: tensor grid, endpoints included.
/// * `list:R1,R2;R1,R2;...`: explicit points.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    Circle { n: usize, radius: f64 },
    Grid { r1: (f64, f64, usize), r2: (f64, f64, usize) },
    List(Vec<(f64, f64)>),
}

fn lin(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

impl SeedSpec {
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self {
            SeedSpec::Circle { n, radius } => (0..*n)
                .map(|i| {
                    let th = std::f64::consts::TAU * i as f64 / *n as f64;
                    (radius * th.cos(), radius * th.sin())
                })
                .collect(),
            SeedSpec::Grid { r1, r2 } => {
                let a = lin(r1.0, r1.1, r1.2);
                let b = lin(r2.0, r2.1, r2.2);
                a.iter()
                    .flat_map(|&x| b.iter().map(move |&y| (x, y)))
                    .collect()
            }
            SeedSpec::List(v) => v.clone(),
        }
    }
}

impl FromStr for SeedSpec {
    type Err = SeedSpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| SeedSpecError {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = s.split_once(':').ok_or_else(|| err("missing ':'"))?;
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| err("bad number"));
        let count = |t: &str| match t.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(err("bad count")),
        };
        match kind {
            "circle" => {
                let p: Vec<&str> = rest.split(':').collect();
                if p.len() != 2 {
                    return Err(err("expected circle:N:RADIUS"));
                }
                Ok(SeedSpec::Circle {
                    n: count(p[0])?,
                    radius: num(p[1])?,
                })
            }
            "grid" => {
                let p: Vec<&str> = rest.split(':').collect();
                if p.len() != 6 {
                    return Err(err("expected grid:R1LO:R1HI:N1:R2LO:R2HI:N2"));
                }
                Ok(SeedSpec::Grid {
                    r1: (num(p[0])?, num(p[1])?, count(p[2])?),
                    r2: (num(p[3])?, num(p[4])?, count(p[5])?),
                })
            }
            "list" => {
                let pts = rest
                    .split(';')
                    .filter(|t| !t.trim().is_empty())
                    .map(|pair| {
                        let (a, b) = pair.split_once(',').ok_or_else(|| err("expected R1,R2"))?;
                        Ok((num(a)?, num(b)?))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if pts.is_empty() {
                    return Err(err("empty list"));
                }
                Ok(SeedSpec::List(pts))
            }
            _ => Err(err("unknown layout (circle, grid, list)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PortraitCurve {
    pub seed: (f64, f64),
    pub forward: Trajectory,
    /// Present when the forward orbit is bounded.
    pub backward: Option<Trajectory>,
}

impl PortraitCurve {
    /// Backward branch (reversed, time negated) followed by the forward one.
    pub fn polyline(&self) -> Vec<(f64, [f64; 2])> {
        let mut out = Vec::new();
        if let Some(bw) = &self.backward {
            for (t, s) in bw.times.iter().zip(&bw.states).skip(1).rev() {
                out.push((-t, *s));
            }
        }
        out.extend(self.forward.times.iter().copied().zip(self.forward.states.iter().copied()));
        out
    }
}

/// Integrates every seed; failures stay local to their seed.
pub fn phase_portrait(
    b: f64,
    gamma: f64,
    seeds: &[(f64, f64)],
    t_max: f64,
    opts: &IntegrateOptions,
) -> Vec<Result<PortraitCurve, OdeError>> {
    seeds
        .iter()
        .map(|&(r1, r2)| {
            let r0 = RState::new(r1, r2, b, gamma);
            let forward = integrate_with(&r0, t_max, opts, 1.0)?;
            let backward = if forward.outcome.is_bounded() {
                Some(integrate_with(&r0, t_max, opts, -1.0)?)
            } else {
                None
            };
            Ok(PortraitCurve {
                seed: (r1, r2),
                forward,
                backward,
            })
        })
        .collect()
}

/// Point with `R1 > 0` on the `C = 0` separatrix (`b < 0`, `gamma > 1`).
pub fn separatrix_point(b: f64, gamma: f64, r2: f64) -> Option<(f64, f64)> {
    (b < 0.0 && gamma > 1.0).then(|| ((-2.0 * b / (gamma - 1.0)).sqrt() * r2.abs(), r2))
}
