//! Finite-volume solver for the conservative 1D Euler equations
//! `(rho, rho v, E)`, `E = p/(gamma-1) + rho v^2/2`.
//!
//! MUSCL reconstruction of primitive variables with the minmod limiter,
//! local Lax–Friedrichs flux, two-stage SSP Runge–Kutta. No artificial
//! viscosity beyond what the limiter and flux provide.
//!
//! The physical problem lives on the whole line. On a finite window we
//! either wrap around (`Periodic`) or extrapolate the edge cell
//! (`Outflow`); profiles should be flat near the window edges in the
//! latter case.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::{Profile, ProfileError};
use crate::gas::GasParams;

pub const MIN_CELLS: usize = 16;
pub const STEEPEN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EulerError {
    #[error("need at least {MIN_CELLS} cells, got {0}")]
    TooFewCells(usize),
    #[error("cfl must lie in (0, 0.5], got {0}")]
    InvalidCfl(f64),
    #[error("the energy formulation needs gamma > 1, got {0}")]
    UnsupportedGamma(f64),
    #[error("invalid end time {0}")]
    InvalidTime(f64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error("positivity lost at t = {t} in cell {cell} (x = {x}): rho = {rho}, p = {p}")]
    Positivity {
        t: f64,
        cell: usize,
        x: f64,
        rho: f64,
        p: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Periodic,
    Outflow,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub a: f64,
    pub b: f64,
    pub h: f64,
    pub gamma: f64,
    pub t: f64,
    pub x: Vec<f64>,
    /// Conserved `(rho, rho v, E)` per cell.
    pub u: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Prim {
    rho: f64,
    v: f64,
    p: f64,
}

fn to_prim(u: &[f64; 3], g: f64) -> Prim {
    let rho = u[0];
    let v = u[1] / rho;
    Prim {
        rho,
        v,
        p: (g - 1.0) * (u[2] - 0.5 * rho * v * v),
    }
}

fn to_cons(w: Prim, g: f64) -> [f64; 3] {
    [w.rho, w.rho * w.v, w.p / (g - 1.0) + 0.5 * w.rho * w.v * w.v]
}

fn flux(w: Prim, g: f64) -> [f64; 3] {
    let e = w.p / (g - 1.0) + 0.5 * w.rho * w.v * w.v;
    [w.rho * w.v, w.rho * w.v * w.v + w.p, (e + w.p) * w.v]
}

fn minmod(a: f64, b: f64) -> f64 {
    if a * b <= 0.0 {
        0.0
    } else if a.abs() < b.abs() {
        a
    } else {
        b
    }
}

impl GridState {
    pub fn cells(&self) -> usize {
        self.u.len()
    }

    /// `(rho, v, p)` in cell `i`.
    pub fn primitive(&self, i: usize) -> (f64, f64, f64) {
        let w = to_prim(&self.u[i], self.gamma);
        (w.rho, w.v, w.p)
    }

    pub fn mass(&self) -> f64 {
        self.u.iter().map(|c| c[0]).sum::<f64>() * self.h
    }

    pub fn momentum(&self) -> f64 {
        self.u.iter().map(|c| c[1]).sum::<f64>() * self.h
    }

    pub fn energy(&self) -> f64 {
        self.u.iter().map(|c| c[2]).sum::<f64>() * self.h
    }

    /// `S = ln(gamma p / rho^gamma)` per cell.
    pub fn entropy(&self) -> Vec<f64> {
        let g = self.gamma;
        (0..self.cells())
            .map(|i| {
                let (rho, _, p) = self.primitive(i);
                (g * p).ln() - g * rho.ln()
            })
            .collect()
    }

    /// Largest signal speed `|v| + c` over the grid.
    pub fn max_wave_speed(&self) -> f64 {
        (0..self.cells())
            .map(|i| {
                let (rho, v, p) = self.primitive(i);
                v.abs() + (self.gamma * p / rho).sqrt()
            })
            .fold(0.0, f64::max)
    }

    pub fn stable_dt(&self, cfl: f64) -> f64 {
        cfl * self.h / self.max_wave_speed()
    }

    fn check_positivity(&self) -> Result<(), EulerError> {
        for i in 0..self.cells() {
            let (rho, _, p) = self.primitive(i);
            if !(rho > 0.0 && p > 0.0 && rho.is_finite() && p.is_finite()) {
                return Err(EulerError::Positivity {
                    t: self.t,
                    cell: i,
                    x: self.x[i],
                    rho,
                    p,
                });
            }
        }
        Ok(())
    }

    fn ghost(&self, i: isize, bc: Boundary) -> Prim {
        let n = self.cells() as isize;
        let j = match bc {
            Boundary::Periodic => i.rem_euclid(n),
            Boundary::Outflow => i.clamp(0, n - 1),
        };
        to_prim(&self.u[j as usize], self.gamma)
    }

    /// `-(F_{i+1/2} - F_{i-1/2}) / h` for every cell.
    fn residual(&self, bc: Boundary) -> Vec<[f64; 3]> {
        let n = self.cells();
        let g = self.gamma;
        let w: Vec<Prim> = (-2..n as isize + 2).map(|i| self.ghost(i, bc)).collect();
        // Limited slopes for cells -1..=n (indices 1..=n+2 in `w`).
        let slope = |k: usize| -> Prim {
            let (l, c, r) = (w[k - 1], w[k], w[k + 1]);
            Prim {
                rho: minmod(c.rho - l.rho, r.rho - c.rho),
                v: minmod(c.v - l.v, r.v - c.v),
                p: minmod(c.p - l.p, r.p - c.p),
            }
        };
        let face = |k: usize, s: Prim, sign: f64| Prim {
            rho: w[k].rho + 0.5 * sign * s.rho,
            v: w[k].v + 0.5 * sign * s.v,
            p: w[k].p + 0.5 * sign * s.p,
        };
        // Faces between cell k and k+1 in `w` coordinates, k = 1..=n+1
        // covers the n+1 faces bounding the physical cells.
        let mut fluxes = Vec::with_capacity(n + 1);
        let mut s_left = slope(1);
        for k in 1..=n + 1 {
            let s_right = slope(k + 1);
            let mut wl = face(k, s_left, 1.0);
            let mut wr = face(k + 1, s_right, -1.0);
            // Fall back to first order where reconstruction leaves the
            // admissible set.
            if !(wl.rho > 0.0 && wl.p > 0.0) {
                wl = w[k];
            }
            if !(wr.rho > 0.0 && wr.p > 0.0) {
                wr = w[k + 1];
            }
            let al = wl.v.abs() + (g * wl.p / wl.rho).sqrt();
            let ar = wr.v.abs() + (g * wr.p / wr.rho).sqrt();
            let alpha = al.max(ar);
            let (fl, fr) = (flux(wl, g), flux(wr, g));
            let (ul, ur) = (to_cons(wl, g), to_cons(wr, g));
            let mut f = [0.0; 3];
            for m in 0..3 {
                f[m] = 0.5 * (fl[m] + fr[m]) - 0.5 * alpha * (ur[m] - ul[m]);
            }
            fluxes.push(f);
            s_left = s_right;
        }
        (0..n)
            .map(|i| {
                let mut r = [0.0; 3];
                for m in 0..3 {
                    r[m] = -(fluxes[i + 1][m] - fluxes[i][m]) / self.h;
                }
                r
            })
            .collect()
    }

    fn add_scaled(&self, r: &[[f64; 3]], dt: f64) -> Vec<[f64; 3]> {
        self.u
            .iter()
            .zip(r)
            .map(|(u, r)| [u[0] + dt * r[0], u[1] + dt * r[1], u[2] + dt * r[2]])
            .collect()
    }

    /// One SSP-RK2 step of fixed size `dt`.
    pub fn step_dt(&self, dt: f64, bc: Boundary) -> Result<GridState, EulerError> {
        let r0 = self.residual(bc);
        let stage = GridState {
            u: self.add_scaled(&r0, dt),
            t: self.t + dt,
            ..self.clone()
        };
        stage.check_positivity()?;
        let r1 = stage.residual(bc);
        let u1 = stage.add_scaled(&r1, dt);
        let u = self
            .u
            .iter()
            .zip(&u1)
            .map(|(a, b)| {
                [
                    0.5 * (a[0] + b[0]),
                    0.5 * (a[1] + b[1]),
                    0.5 * (a[2] + b[2]),
                ]
            })
            .collect();
        let next = GridState {
            u,
            t: self.t + dt,
            ..self.clone()
        };
        next.check_positivity()?;
        Ok(next)
    }

    /// Largest one-sided difference quotients of `v` and `p` and the face
    /// location of the `v` maximum.
    pub fn gradients(&self, bc: Boundary) -> GradientSample {
        let n = self.cells();
        let pairs = match bc {
            Boundary::Periodic => n,
            Boundary::Outflow => n - 1,
        };
        let mut out = GradientSample {
            t: self.t,
            dvdx_max: 0.0,
            dpdx_max: 0.0,
            x_argmax: self.x[0],
        };
        for i in 0..pairs {
            let j = (i + 1) % n;
            let (_, v0, p0) = self.primitive(i);
            let (_, v1, p1) = self.primitive(j);
            let dv = (v1 - v0).abs() / self.h;
            let dp = (p1 - p0).abs() / self.h;
            if dv > out.dvdx_max {
                out.dvdx_max = dv;
                out.x_argmax = self.x[i] + 0.5 * self.h;
            }
            out.dpdx_max = out.dpdx_max.max(dp);
        }
        out
    }

    /// Reference scale for steepening: the larger of `max |dv/dx|` and
    /// the impedance-scaled `max |dp/dx| / (rho c)`. The two agree on a
    /// simple wave; the second keeps the scale positive for data that
    /// start at rest.
    pub fn acoustic_gradient_scale(&self, bc: Boundary) -> f64 {
        let n = self.cells();
        let pairs = match bc {
            Boundary::Periodic => n,
            Boundary::Outflow => n - 1,
        };
        let mut m: f64 = 0.0;
        for i in 0..pairs {
            let j = (i + 1) % n;
            let (r0, v0, p0) = self.primitive(i);
            let (r1, v1, p1) = self.primitive(j);
            let z = 0.5 * ((self.gamma * p0 * r0).sqrt() + (self.gamma * p1 * r1).sqrt());
            m = m.max((v1 - v0).abs()).max((p1 - p0).abs() / z);
        }
        m / self.h
    }

    pub fn snapshot(&self) -> Snapshot {
        let n = self.cells();
        let mut s = Snapshot {
            t: self.t,
            x: self.x.clone(),
            rho: Vec::with_capacity(n),
            v: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
            s: self.entropy(),
        };
        for i in 0..n {
            let (rho, v, p) = self.primitive(i);
            s.rho.push(rho);
            s.v.push(v);
            s.p.push(p);
        }
        s
    }
}

fn check_gamma(gp: &GasParams) -> Result<(), EulerError> {
    if gp.gamma() > 1.0 {
        Ok(())
    } else {
        Err(EulerError::UnsupportedGamma(gp.gamma()))
    }
}

/// Cell averages by midpoint sampling.
pub fn init_grid(pr: &Profile, gp: &GasParams, cells: usize) -> Result<GridState, EulerError> {
    if cells < MIN_CELLS {
        return Err(EulerError::TooFewCells(cells));
    }
    check_gamma(gp)?;
    let (a, b) = (pr.domain.a, pr.domain.b);
    let h = (b - a) / cells as f64;
    let g = gp.gamma();
    let x: Vec<f64> = (0..cells).map(|i| a + (i as f64 + 0.5) * h).collect();
    let u = x
        .iter()
        .map(|&xi| {
            let pd = pr.point(xi)?;
            Ok(to_cons(
                Prim {
                    rho: pd.rho0,
                    v: pd.v0,
                    p: pd.p0,
                },
                g,
            ))
        })
        .collect::<Result<Vec<_>, ProfileError>>()?;
    Ok(GridState {
        a,
        b,
        h,
        gamma: g,
        t: 0.0,
        x,
        u,
    })
}

/// One step with `dt = cfl h / max(|v| + c)`.
pub fn step(g: &GridState, cfl: f64, bc: Boundary) -> Result<GridState, EulerError> {
    if !(cfl > 0.0 && cfl <= 0.5) {
        return Err(EulerError::InvalidCfl(cfl));
    }
    g.step_dt(g.stable_dt(cfl), bc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientSample {
    pub t: f64,
    pub dvdx_max: f64,
    pub dpdx_max: f64,
    pub x_argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    /// Extra snapshot times in `(0, t_end)`; `0` and the final time are
    /// always recorded.
    pub snapshot_times: Vec<f64>,
    /// Stop as soon as steepening is detected.
    pub stop_at_steepen: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cells: 512,
            cfl: 0.4,
            t_end: 1.0,
            boundary: Boundary::Periodic,
            snapshot_times: Vec::new(),
            stop_at_steepen: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SimOutcome {
    Completed,
    /// Stopped on purpose after the steepening threshold was crossed.
    Steepened,
    Breakdown {
        t: f64,
        cell: usize,
        x: f64,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub snapshots: Vec<Snapshot>,
    pub history: Vec<GradientSample>,
    pub t_steepen: Option<f64>,
    /// `max |dv/dx|` level that defines `t_steepen`.
    pub steepen_threshold: f64,
    pub outcome: SimOutcome,
    pub steps: usize,
    pub initial_mass: f64,
    pub initial_momentum: f64,
    pub last: GridState,
}

impl SimResult {
    pub fn max_dvdx(&self) -> f64 {
        self.history.iter().map(|s| s.dvdx_max).fold(0.0, f64::max)
    }

    pub fn final_time(&self) -> f64 {
        self.last.t
    }
}

/// Runs to `t_end` or breakdown. `t_steepen` is the first time the largest
/// `|dv/dx|` exceeds ten times the initial
/// [`GridState::acoustic_gradient_scale`], interpolated linearly between
/// steps; absent for constant data.
pub fn simulate(pr: &Profile, gp: &GasParams, opts: &SimOptions) -> Result<SimResult, EulerError> {
    if !(opts.cfl > 0.0 && opts.cfl <= 0.5) {
        return Err(EulerError::InvalidCfl(opts.cfl));
    }
    if !(opts.t_end > 0.0 && opts.t_end.is_finite()) {
        return Err(EulerError::InvalidTime(opts.t_end));
    }
    let mut g = init_grid(pr, gp, opts.cells)?;
    let bc = opts.boundary;
    let mut stops: Vec<f64> = opts
        .snapshot_times
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && t < opts.t_end)
        .collect();
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops.push(opts.t_end);

    let first = g.gradients(bc);
    let threshold = STEEPEN_FACTOR * g.acoustic_gradient_scale(bc);
    let mut history = vec![first];
    let mut snapshots = vec![g.snapshot()];
    let (initial_mass, initial_momentum) = (g.mass(), g.momentum());
    let mut t_steepen = None;
    let mut steps = 0;
    let mut outcome = SimOutcome::Completed;

    'outer: for &target in &stops {
        while g.t < target {
            let dt = g.stable_dt(opts.cfl);
            let hit = g.t + dt >= target * (1.0 - 1e-14);
            let dt = if hit { target - g.t } else { dt };
            match g.step_dt(dt, bc) {
                Ok(mut next) => {
                    if hit {
                        next.t = target;
                    }
                    g = next;
                }
                Err(EulerError::Positivity { t, cell, x, rho, p }) => {
                    outcome = SimOutcome::Breakdown {
                        t,
                        cell,
                        x,
                        message: format!("positivity lost: rho = {rho}, p = {p}"),
                    };
                    break 'outer;
                }
                Err(e) => return Err(e),
            }
            steps += 1;
            let s = g.gradients(bc);
            let prev = *history.last().unwrap();
            history.push(s);
            if t_steepen.is_none() && threshold > 0.0 && s.dvdx_max > threshold {
                let w = (threshold - prev.dvdx_max) / (s.dvdx_max - prev.dvdx_max);
                t_steepen = Some(prev.t + w * (s.t - prev.t));
                if opts.stop_at_steepen {
                    outcome = SimOutcome::Steepened;
                    snapshots.push(g.snapshot());
                    break 'outer;
                }
            }
        }
        snapshots.push(g.snapshot());
    }

    Ok(SimResult {
        snapshots,
        history,
        t_steepen,
        steepen_threshold: threshold,
        outcome,
        steps,
        initial_mass,
        initial_momentum,
        last: g,
    })
}
