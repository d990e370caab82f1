//! Command drivers behind the `gdblow` binary. Each returns data; the
//! binary decides where it goes.

use thiserror::Error;

use crate::criterion::{
    attach_predicted_time, classify_chaplygin, classify_isentropic, classify_point, classify_profile,
    entropy_form_k, witness_odes, CriterionError, GlobalVerdict, WitnessOde,
    DEFAULT_INEQ_TOL,
};
use crate::euler::{simulate, EulerError, SimOptions, SimOutcome, SimResult, STEEPEN_FACTOR};
use crate::report::{
    CrossValidation, Discrepancy, PdeLevel, PdeSummary, PointRow, Report, StageStatus, VerdictSummary,
};
use crate::riemann::{
    chaplygin_solve, first_integral, integrate, integrate_with, orbit_sup_abs_r1, phase_portrait,
    IntegrateOptions, KValue, OdeError, Outcome, PortraitCurve, RState, SeedSpec, Trajectory,
};
use crate::scenario::{Mode, Scenario, ScenarioError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_DISCREPANT: i32 = 3;
pub const EXIT_INCOMPLETE: i32 = 4;

/// Ratio window for `t_steepen / predicted_T` accepted by `xval`.
pub const STEEPEN_WINDOW: (f64, f64) = (0.5, 1.5);
/// Slack on the ODE-derived gradient bound for smooth data.
pub const GRADIENT_SLACK: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommandError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("classifier error: {0}")]
    Criterion(#[from] CriterionError),
    #[error("pde error: {0}")]
    Euler(#[from] EulerError),
    #[error("ode error: {0}")]
    Ode(#[from] OdeError),
    #[error("argument error: {0}")]
    Argument(String),
}

fn verdict_for(sc: &Scenario) -> Result<GlobalVerdict, CommandError> {
    let pr = sc.profile().map_err(ScenarioError::from)?;
    let gp = sc.gas();
    Ok(match sc.mode {
        Mode::General => classify_profile(&pr, &gp, &sc.grid)?,
        Mode::Isentropic => classify_isentropic(&pr, &gp, &sc.grid)?,
        Mode::Chaplygin => classify_chaplygin(&pr, &sc.grid)?,
    })
}

fn point_rows(sc: &Scenario, v: &GlobalVerdict) -> Vec<PointRow> {
    let pr = sc.profile().ok();
    let gp = sc.gas();
    v.points
        .iter()
        .map(|p| PointRow {
            x: p.x,
            safe: p.safe,
            indicators: p.indicators,
            sets: p.sets,
            k_entropy_form: match (&pr, sc.mode) {
                (Some(pr), Mode::General) => pr.point(p.x).ok().map(|pd| entropy_form_k(&pd, &gp)),
                _ => None,
            },
        })
        .collect()
}

fn summarize(v: &GlobalVerdict) -> VerdictSummary {
    VerdictSummary {
        kind: v.kind,
        smooth: v.smooth,
        predicted_t: v.predicted_t,
        witness_count: v.witnesses.len(),
        witnesses: v.witnesses.clone(),
        grid: v.grid.clone(),
    }
}

pub struct Classified {
    pub report: Report,
    pub verdict: GlobalVerdict,
}

impl Classified {
    pub fn exit_code(&self) -> i32 {
        if self.verdict.smooth {
            EXIT_OK
        } else {
            EXIT_BLOWUP
        }
    }
}

/// Classifier plus the slope ODE from every witness.
pub fn classify(sc: &Scenario) -> Result<Classified, CommandError> {
    let mut verdict = verdict_for(sc)?;
    let odes = witness_odes(&verdict, &sc.ode);
    attach_predicted_time(&mut verdict, &odes);
    let mut report = Report::new("classify", sc);
    report.mark("classify", StageStatus::Ok, None);
    report.verdict = Some(summarize(&verdict));
    report.points = point_rows(sc, &verdict);
    report.ode = odes;
    Ok(Classified { report, verdict })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeRequest {
    pub r1: f64,
    pub r2: f64,
    pub b: f64,
    pub gamma: f64,
    pub t_max: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSummary {
    pub outcome: Outcome,
    pub c0: Option<f64>,
    pub c_drift: Option<f64>,
    /// Pointwise verdict for this initial state; `None` where no criterion
    /// applies (`gamma` outside `[1, inf)` and not `-1`).
    pub safe: Option<bool>,
    /// `b > 0` and `R2 != 0`: the orbit lies on a closed level curve of
    /// `C` through the origin.
    pub closed_curve: bool,
}

impl OdeSummary {
    pub fn line(&self) -> String {
        let opt = |v: Option<f64>| v.map(crate::report::fmt_f64).unwrap_or_else(|| "none".into());
        let head = match self.outcome {
            Outcome::Bounded { t_end } => format!("outcome=bounded t_end={}", crate::report::fmt_f64(t_end)),
            Outcome::Escaped { t_escape } => {
                format!("outcome=escaped t_escape={}", crate::report::fmt_f64(t_escape))
            }
            Outcome::BlowUpEstimated { t, bracket, low_confidence } => format!(
                "outcome=blowup T={} bracket=[{},{}] low_confidence={low_confidence}",
                crate::report::fmt_f64(t),
                crate::report::fmt_f64(bracket.0),
                crate::report::fmt_f64(bracket.1)
            ),
        };
        let safe = self.safe.map(|s| s.to_string()).unwrap_or_else(|| "n/a".into());
        format!(
            "{head} C={} c_drift={} safe={safe} closed_curve={}",
            opt(self.c0),
            opt(self.c_drift),
            self.closed_curve
        )
    }

    pub fn exit_code(&self) -> i32 {
        if self.outcome.is_bounded() {
            EXIT_OK
        } else {
            EXIT_BLOWUP
        }
    }
}

pub fn ode(req: &OdeRequest) -> Result<(Trajectory, OdeSummary), CommandError> {
    if req.gamma == 0.0 || !req.gamma.is_finite() {
        return Err(CommandError::Argument(format!("invalid gamma {}", req.gamma)));
    }
    let r0 = RState::new(req.r1, req.r2, req.b, req.gamma);
    let tr = integrate(&r0, req.t_max, req.tol)?;
    let safe = if req.gamma >= 1.0 {
        let ind = crate::criterion::Indicators {
            r1: req.r1,
            r2: req.r2,
            k: if req.r2 == 0.0 {
                KValue::Infinite
            } else {
                KValue::Finite(req.b + 0.5 * (req.gamma - 1.0))
            },
            b: (req.r2 != 0.0).then_some(req.b),
            gamma: req.gamma,
        };
        Some(classify_point(0.0, &ind, DEFAULT_INEQ_TOL).safe)
    } else if req.gamma == -1.0 {
        Some(!chaplygin_solve(req.r1, req.r2, req.b - 1.0).blows_up)
    } else {
        None
    };
    let summary = OdeSummary {
        outcome: tr.outcome,
        c0: first_integral(&r0).value(),
        c_drift: tr.c_drift,
        safe,
        closed_curve: req.b > 0.0 && req.r2 != 0.0 && req.gamma >= 1.0,
    };
    Ok((tr, summary))
}

pub struct Portrait {
    pub curves: Vec<PortraitCurve>,
    /// Seeds whose integration failed, with the reason.
    pub failures: Vec<((f64, f64), String)>,
}

pub fn portrait(b: f64, gamma: f64, seeds: &SeedSpec, t_max: f64, tol: f64) -> Portrait {
    let pts = seeds.points();
    let mut out = Portrait {
        curves: Vec::new(),
        failures: Vec::new(),
    };
    for (seed, r) in pts.iter().zip(phase_portrait(b, gamma, &pts, t_max, &IntegrateOptions::with_tol(tol))) {
        match r {
            Ok(c) => out.curves.push(c),
            Err(e) => out.failures.push((*seed, e.to_string())),
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PdeOverrides {
    pub cells: Option<usize>,
    pub cfl: Option<f64>,
    pub t_end: Option<f64>,
}

fn sim_options(sc: &Scenario, cells: usize, stop_at_steepen: bool) -> SimOptions {
    SimOptions {
        cells,
        cfl: sc.pde.cfl,
        t_end: sc.pde.t_end,
        boundary: sc.pde.boundary,
        snapshot_times: sc.pde.snapshot_times.clone(),
        stop_at_steepen,
    }
}

fn level(cells: usize, r: &SimResult) -> PdeLevel {
    PdeLevel {
        cells,
        t_steepen: r.t_steepen,
        outcome: r.outcome.clone(),
        final_time: r.final_time(),
        steps: r.steps,
        initial_max_dvdx: r.history[0].dvdx_max,
        steepen_threshold: r.steepen_threshold,
        max_dvdx: r.max_dvdx(),
        mass_drift: (r.last.mass() - r.initial_mass).abs() / r.initial_mass,
    }
}

fn statement(l: &PdeLevel) -> String {
    match (&l.outcome, l.t_steepen) {
        (SimOutcome::Breakdown { t, cell, x, message }, _) => {
            format!("breakdown at t = {t} in cell {cell} (x = {x}): {message}")
        }
        (_, Some(ts)) => format!(
            "gradient steepening: max |dv/dx| exceeded {STEEPEN_FACTOR}x its initial value at t = {ts}"
        ),
        _ => format!(
            "bounded gradients: max |dv/dx| = {} up to t = {}",
            l.max_dvdx, l.final_time
        ),
    }
}

fn check_pde(sc: &Scenario) -> Result<(), CommandError> {
    if sc.pde_supported() {
        Ok(())
    } else {
        Err(CommandError::Argument(format!(
            "the PDE solver needs gamma > 1, scenario has {}",
            sc.gamma
        )))
    }
}

/// Single PDE run at the configured (or overridden) resolution.
pub fn pde(sc: &Scenario, ov: &PdeOverrides) -> Result<(SimResult, PdeSummary), CommandError> {
    check_pde(sc)?;
    let mut sc = sc.clone();
    if let Some(c) = ov.cfl {
        sc.pde.cfl = c;
    }
    if let Some(t) = ov.t_end {
        sc.pde.t_end = t;
    }
    let cells = ov.cells.unwrap_or(sc.pde.cells);
    let pr = sc.profile().map_err(ScenarioError::from)?;
    let r = simulate(&pr, &sc.gas(), &sim_options(&sc, cells, false))?;
    let l = level(cells, &r);
    let summary = PdeSummary {
        t_end: sc.pde.t_end,
        statement: statement(&l),
        levels: vec![l],
        gradient_bound: None,
    };
    Ok((r, summary))
}

impl PdeSummary {
    pub fn exit_code(&self) -> i32 {
        match self.finest() {
            Some(l) if l.t_steepen.is_none() && matches!(l.outcome, SimOutcome::Completed) => EXIT_OK,
            _ => EXIT_BLOWUP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct XvalOptions {
    /// Replaces the classifier's catastrophe time; a negative control for
    /// the consistency check.
    pub predicted_t_override: Option<f64>,
    /// Upper bound on the ODE sample rows recorded for smooth data.
    pub max_samples: Option<usize>,
}

/// Largest `|R1|` any sampled ray can reach, from the first integral.
fn ode_gradient_bound(v: &GlobalVerdict) -> Option<f64> {
    v.points
        .iter()
        .map(|p| orbit_sup_abs_r1(&p.indicators.ray_state()))
        .try_fold(0.0f64, |m, s| s.map(|s| m.max(s)))
}

fn sample_odes(sc: &Scenario, v: &GlobalVerdict, max: usize) -> Vec<WitnessOde> {
    let stride = v.points.len().div_ceil(max.max(1)).max(1);
    v.points
        .iter()
        .step_by(stride)
        .map(|p| {
            let opts = IntegrateOptions::with_tol(sc.ode.tol);
            match integrate_with(&p.indicators.ray_state(), sc.ode.t_max, &opts, 1.0) {
                Ok(tr) => WitnessOde {
                    x: p.x,
                    outcome: tr.outcome,
                    blowup_time: tr.outcome.blowup_time(),
                    c_drift: tr.c_drift,
                },
                Err(_) => WitnessOde {
                    x: p.x,
                    outcome: Outcome::Bounded { t_end: 0.0 },
                    blowup_time: None,
                    c_drift: None,
                },
            }
        })
        .collect()
}

pub struct CrossChecked {
    pub report: Report,
    pub pde_runs: Vec<(usize, SimResult)>,
}

impl CrossChecked {
    pub fn exit_code(&self) -> i32 {
        match self.report.cross_validation {
            Some(CrossValidation::Consistent) => EXIT_OK,
            Some(CrossValidation::Discrepant { .. }) => EXIT_DISCREPANT,
            _ => EXIT_INCOMPLETE,
        }
    }
}

/// Classifier, slope ODE and PDE refinement study, then the consistency
/// rule: smooth data must keep bounded gradients to `t_end`; blow-up data
/// must steepen with `t_steepen / predicted_T` inside [`STEEPEN_WINDOW`]
/// on the finest grid.
pub fn xval(sc: &Scenario, opts: &XvalOptions) -> CrossChecked {
    let mut report = Report::new("xval", sc);
    let mut pde_runs = Vec::new();
    let incomplete = |report: &mut Report, stage: &str, status, msg: String| {
        report.mark(stage, status, Some(msg));
        report.cross_validation = Some(CrossValidation::Incomplete {
            stage: stage.to_string(),
        });
    };

    let mut verdict = match verdict_for(sc) {
        Ok(v) => v,
        Err(e) => {
            incomplete(&mut report, "classify", StageStatus::Failed, e.to_string());
            return CrossChecked { report, pde_runs };
        }
    };
    report.mark("classify", StageStatus::Ok, None);
    report.points = point_rows(sc, &verdict);

    let mut details = Vec::new();
    if verdict.smooth {
        report.ode = sample_odes(sc, &verdict, opts.max_samples.unwrap_or(41));
        let escaped: Vec<f64> = report.ode.iter().filter(|o| !o.outcome.is_bounded()).map(|o| o.x).collect();
        if !escaped.is_empty() {
            details.push(Discrepancy {
                points: escaped,
                classifier: "smooth".into(),
                pde: "n/a".into(),
                reason: "slope ODE escapes from a point the classifier marks safe".into(),
            });
        }
    } else {
        report.ode = witness_odes(&verdict, &sc.ode);
        attach_predicted_time(&mut verdict, &report.ode);
    }
    if let Some(t) = opts.predicted_t_override {
        verdict.predicted_t = Some(t);
    }
    report.mark("ode", StageStatus::Ok, None);
    report.verdict = Some(summarize(&verdict));

    if let Err(e) = check_pde(sc) {
        incomplete(&mut report, "pde", StageStatus::Skipped, e.to_string());
        return CrossChecked { report, pde_runs };
    }
    let pr = match sc.profile() {
        Ok(p) => p,
        Err(e) => {
            incomplete(&mut report, "pde", StageStatus::Failed, e.to_string());
            return CrossChecked { report, pde_runs };
        }
    };
    let gp = sc.gas();
    let levels = sc.pde.levels();
    let results: Vec<Result<SimResult, EulerError>> = std::thread::scope(|s| {
        let handles: Vec<_> = levels
            .iter()
            .map(|&n| {
                let o = sim_options(sc, n, !verdict.smooth);
                let (pr, gp) = (&pr, &gp);
                s.spawn(move || simulate(pr, gp, &o))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("pde thread")).collect()
    });
    let mut summary_levels = Vec::new();
    for (&n, r) in levels.iter().zip(results) {
        match r {
            Ok(r) => {
                summary_levels.push(level(n, &r));
                pde_runs.push((n, r));
            }
            Err(e) => {
                incomplete(&mut report, "pde", StageStatus::Failed, e.to_string());
                return CrossChecked { report, pde_runs };
            }
        }
    }
    report.mark("pde", StageStatus::Ok, None);
    let finest = summary_levels.last().expect("at least one level").clone();
    let bound = if verdict.smooth {
        ode_gradient_bound(&verdict).map(|b| GRADIENT_SLACK * b)
    } else {
        None
    };
    let argmax_x = pde_runs
        .last()
        .and_then(|(_, r)| {
            r.history
                .iter()
                .max_by(|a, b| a.dvdx_max.total_cmp(&b.dvdx_max))
                .map(|s| s.x_argmax)
        })
        .unwrap_or(f64::NAN);

    if verdict.smooth {
        let completed = matches!(finest.outcome, SimOutcome::Completed);
        let within = bound.is_some_and(|b| finest.max_dvdx <= b);
        if !(completed && within) {
            details.push(Discrepancy {
                points: vec![argmax_x],
                classifier: "smooth".into(),
                pde: statement(&finest),
                reason: match bound {
                    Some(b) => format!("max |dv/dx| = {} exceeds the ODE bound {b}", finest.max_dvdx),
                    None if completed => "no ODE gradient bound available".into(),
                    None => "run did not complete".into(),
                },
            });
        }
    } else {
        let first_witness = verdict
            .predicted_t
            .and_then(|t| report.ode.iter().find(|o| o.blowup_time == Some(t)).map(|o| o.x));
        let points = first_witness
            .map(|x| vec![x])
            .unwrap_or_else(|| verdict.witnesses.iter().take(1).map(|w| w.x).collect());
        let classifier = match verdict.predicted_t {
            Some(t) => format!("blow-up, predicted_T = {t}"),
            None => "blow-up, no finite predicted_T".into(),
        };
        match (finest.t_steepen, verdict.predicted_t) {
            (Some(ts), Some(t)) if t > 0.0 => {
                let ratio = ts / t;
                if !(ratio >= STEEPEN_WINDOW.0 && ratio <= STEEPEN_WINDOW.1) {
                    details.push(Discrepancy {
                        points,
                        classifier,
                        pde: statement(&finest),
                        reason: format!(
                            "t_steepen / predicted_T = {ratio} outside [{}, {}]",
                            STEEPEN_WINDOW.0, STEEPEN_WINDOW.1
                        ),
                    });
                }
            }
            (ts, _) => details.push(Discrepancy {
                points,
                classifier,
                pde: statement(&finest),
                reason: if ts.is_none() {
                    "no steepening on the finest grid".into()
                } else {
                    "no finite predicted_T to compare with".into()
                },
            }),
        }
    }

    let mut st = statement(&finest);
    if summary_levels.len() > 1 {
        let ts: Vec<Option<f64>> = summary_levels.iter().map(|l| l.t_steepen).collect();
        let monotone = ts.windows(2).all(|w| matches!(w, [Some(a), Some(b)] if b <= a));
        if ts.iter().all(Option::is_some) {
            st.push_str(&format!(
                "; t_steepen {} under refinement",
                if monotone { "decreases" } else { "does not decrease monotonically" }
            ));
        }
    }
    report.pde = Some(PdeSummary {
        t_end: sc.pde.t_end,
        levels: summary_levels,
        gradient_bound: bound,
        statement: st,
    });
    report.cross_validation = Some(if details.is_empty() {
        CrossValidation::Consistent
    } else {
        CrossValidation::Discrepant { details }
    });
    CrossChecked { report, pde_runs }
}
