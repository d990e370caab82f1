//! Report types and output: JSON with a fixed 17-significant-digit float
//! format, CSV series, and atomic file writes.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

use crate::criterion::{ConditionSets, GridMeta, Indicators, PointVerdict, VerdictKind, WitnessOde};
use crate::euler::{GradientSample, SimOutcome, Snapshot};
use crate::riemann::{first_integral, KValue, PortraitCurve, RState, Trajectory};
use crate::scenario::Scenario;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `v` with 17 significant digits: positional notation for decimal
/// exponents in `[-5, 17)`, scientific otherwise.
pub fn fmt_f64(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    let sci = format!("{v:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        format!("{v:.*}", (16 - exp) as usize)
    } else {
        sci
    }
}

struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Pretty-enough JSON: one compact document, fixed float format, field
/// order from the type definitions. Non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser).expect("report types serialize");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// Writes via a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn csv_string(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

fn c_column(init: &RState, s: &[f64; 2]) -> String {
    first_integral(&init.with_point(s[0], s[1]))
        .value()
        .map(fmt_f64)
        .unwrap_or_default()
}

/// `t, R1, R2, C` (C empty on the degenerate branch).
pub fn trajectory_csv(tr: &Trajectory) -> String {
    csv_string(
        &["t", "R1", "R2", "C"],
        tr.times.iter().zip(&tr.states).map(|(t, s)| {
            vec![fmt_f64(tr.direction * t), fmt_f64(s[0]), fmt_f64(s[1]), c_column(&tr.initial, s)]
        }),
    )
}

/// One polyline per seed: `curve, outcome, t, R1, R2, C`.
pub fn portrait_csv(curves: &[PortraitCurve]) -> String {
    let rows = curves.iter().enumerate().flat_map(|(i, c)| {
        let tag = c.forward.outcome.label();
        let init = c.forward.initial;
        c.polyline().into_iter().map(move |(t, s)| {
            vec![
                i.to_string(),
                tag.to_string(),
                fmt_f64(t),
                fmt_f64(s[0]),
                fmt_f64(s[1]),
                c_column(&init, &s),
            ]
        })
    });
    csv_string(&["curve", "outcome", "t", "R1", "R2", "C"], rows)
}

/// `x, rho, v, p, S`.
pub fn snapshot_csv(s: &Snapshot) -> String {
    csv_string(
        &["x", "rho", "v", "p", "S"],
        (0..s.x.len()).map(|i| {
            vec![
                fmt_f64(s.x[i]),
                fmt_f64(s.rho[i]),
                fmt_f64(s.v[i]),
                fmt_f64(s.p[i]),
                fmt_f64(s.s[i]),
            ]
        }),
    )
}

/// `t, dvdx_max, dpdx_max, x_argmax`.
pub fn gradient_csv(h: &[GradientSample]) -> String {
    csv_string(
        &["t", "dvdx_max", "dpdx_max", "x_argmax"],
        h.iter().map(|s| {
            vec![fmt_f64(s.t), fmt_f64(s.dvdx_max), fmt_f64(s.dpdx_max), fmt_f64(s.x_argmax)]
        }),
    )
}

/// Per-point indicator row of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRow {
    pub x: f64,
    pub safe: bool,
    pub indicators: Indicators,
    pub sets: ConditionSets,
    /// Entropy-form reduction constant, for comparison only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_entropy_form: Option<KValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictSummary {
    pub kind: VerdictKind,
    pub smooth: bool,
    pub predicted_t: Option<f64>,
    pub witness_count: usize,
    pub witnesses: Vec<PointVerdict>,
    pub grid: GridMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeLevel {
    pub cells: usize,
    pub t_steepen: Option<f64>,
    pub outcome: SimOutcome,
    pub final_time: f64,
    pub steps: usize,
    pub initial_max_dvdx: f64,
    pub steepen_threshold: f64,
    pub max_dvdx: f64,
    pub mass_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdeSummary {
    pub t_end: f64,
    pub levels: Vec<PdeLevel>,
    /// Gradient bound from the slope ODE along the sampled rays, when the
    /// classifier certified the data smooth.
    pub gradient_bound: Option<f64>,
    pub statement: String,
}

impl PdeSummary {
    pub fn finest(&self) -> Option<&PdeLevel> {
        self.levels.last()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    /// Scenario points involved (witness coordinates or the PDE argmax).
    pub points: Vec<f64>,
    pub classifier: String,
    pub pde: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CrossValidation {
    Consistent,
    Discrepant { details: Vec<Discrepancy> },
    /// A stage failed or could not run; see `stages`.
    Incomplete { stage: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageMarker {
    pub stage: String,
    pub status: StageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    /// Seconds since the Unix epoch; absent unless requested so that
    /// reports stay byte-for-byte reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_unix: Option<u64>,
    pub command: String,
    pub scenario: Scenario,
    pub stages: Vec<StageMarker>,
    pub verdict: Option<VerdictSummary>,
    pub points: Vec<PointRow>,
    pub ode: Vec<WitnessOde>,
    pub pde: Option<PdeSummary>,
    pub cross_validation: Option<CrossValidation>,
}

impl Report {
    pub fn new(command: &str, scenario: &Scenario) -> Self {
        Self {
            tool: "gdblow",
            version: VERSION,
            generated_unix: None,
            command: command.to_string(),
            scenario: scenario.clone(),
            stages: Vec::new(),
            verdict: None,
            points: Vec::new(),
            ode: Vec::new(),
            pde: None,
            cross_validation: None,
        }
    }

    pub fn stamp(&mut self) {
        self.generated_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .ok()
            .map(|d| d.as_secs());
    }

    pub fn mark(&mut self, stage: &str, status: StageStatus, message: Option<String>) {
        self.stages.push(StageMarker {
            stage: stage.to_string(),
            status,
            message,
        });
    }
}
