//! Scenario files (TOML) and the built-in presets.
//!
//! ```toml
//! preset = "linear-compression"   # optional base, keys below override it
//! gamma = 1.4
//! mode = "general"                # general | isentropic | chaplygin
//!
//! [domain]
//! a = -4.0
//! b = 4.0
//!
//! [profile]
//! v0 = "-x/(1+x^8)^0.125"
//! rho0 = "1"
//! p0 = "0.1"
//!
//! [grid]
//! nodes = 401
//!
//! [ode]
//! t_max = 100.0
//! tol = 1e-10
//!
//! [pde]
//! cells = 1024
//! cfl = 0.4
//! t_end = 1.5
//! boundary = "outflow"            # periodic | outflow
//! refinements = [256, 512, 1024]
//!
//! [output]
//! report = "report.json"
//! dir = "out"
//! ```
//!
//! Outflow boundaries extrapolate the edge cell; profiles should be flat
//! near the window edges for the PDE run to be meaningful.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};

use crate::criterion::{GridSpec, OdeSettings};
use crate::dsl::{presets, Domain, Profile, ProfileError};
use crate::euler::{Boundary, MIN_CELLS};
use crate::gas::{GasError, GasParams};

pub const PRESETS: [&str; 6] = [
    "remark1",
    "linear-compression",
    "isentropic-bump",
    "chaplygin-demo",
    "isothermal-demo",
    "constant",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("io error: {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("config error: {0}")]
    Toml(String),
    #[error("config error: unknown preset '{0}' (known: {known})", known = PRESETS.join(", "))]
    UnknownPreset(String),
    #[error("config error: {field}: {message}")]
    Invalid { field: &'static str, message: String },
    #[error("profile error: {0}")]
    Profile(#[from] ProfileError),
    #[error("config error: {0}")]
    Gas(#[from] GasError),
}

fn invalid(field: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    General,
    /// Closed-form isentropic test on `(v0, rho0)`; `p0` only feeds the PDE run.
    Isentropic,
    /// `gamma = -1`; `p0` is ignored.
    Chaplygin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub v0: String,
    pub rho0: String,
    pub p0: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSettings {
    pub cells: usize,
    pub cfl: f64,
    pub t_end: f64,
    pub boundary: Boundary,
    /// Cell counts for the refinement study in `xval`; the last is the
    /// finest. Empty means `[cells]`.
    pub refinements: Vec<usize>,
    pub snapshot_times: Vec<f64>,
}

impl Default for PdeSettings {
    fn default() -> Self {
        Self {
            cells: 512,
            cfl: 0.4,
            t_end: 1.0,
            boundary: Boundary::Periodic,
            refinements: Vec::new(),
            snapshot_times: Vec::new(),
        }
    }
}

impl PdeSettings {
    pub fn levels(&self) -> Vec<usize> {
        if self.refinements.is_empty() {
            vec![self.cells]
        } else {
            self.refinements.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub report: Option<PathBuf>,
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub preset: Option<String>,
    pub gamma: f64,
    #[serde(default)]
    pub mode: Mode,
    pub domain: DomainSpec,
    pub profile: ProfileSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub ode: OdeSettings,
    #[serde(default)]
    pub pde: PdeSettings,
    #[serde(default)]
    pub output: OutputSpec,
}

fn table(pairs: &[(&str, Value)]) -> Value {
    Value::Table(pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}

fn s(v: &str) -> Value {
    Value::String(v.to_string())
}

fn pde(cells: i64, t_end: f64, boundary: &str, levels: &[i64]) -> Value {
    table(&[
        ("cells", Value::Integer(cells)),
        ("t_end", Value::Float(t_end)),
        ("boundary", s(boundary)),
        (
            "refinements",
            Value::Array(levels.iter().map(|&n| Value::Integer(n)).collect()),
        ),
    ])
}

/// Preset as a TOML table. Gamma-dependent expressions use `gamma`.
fn preset_table(name: &str, gamma: Option<f64>) -> Result<Table, ScenarioError> {
    let dom = |a: f64, b: f64| table(&[("a", Value::Float(a)), ("b", Value::Float(b))]);
    let prof = |v0: &str, rho0: &str, p0: &str| table(&[("v0", s(v0)), ("rho0", s(rho0)), ("p0", s(p0))]);
    let (g, mode, domain, profile, pde_v) = match name {
        "remark1" => {
            let g = gamma.unwrap_or(1.4);
            let rho0 = format!("exp({}*x)", presets::remark1_density_rate(g));
            (
                g,
                "general",
                dom(-2.0, 2.0),
                prof("-10*x*exp(-x^2)", &rho0, "exp(x)"),
                pde(1024, 3.0, "outflow", &[256, 512, 1024]),
            )
        }
        "linear-compression" => (
            gamma.unwrap_or(1.4),
            "general",
            dom(-4.0, 4.0),
            prof("-x/(1+x^8)^0.125", "1", "0.1"),
            pde(1024, 1.5, "outflow", &[256, 512, 1024]),
        ),
        "isentropic-bump" => {
            let g = gamma.unwrap_or(1.4);
            let rho0 = "1 + 0.1*exp(-x^2)";
            (
                g,
                "isentropic",
                // Wide window: the weak acoustic pulses only shock after
                // travelling about 30 length units.
                dom(-40.0, 40.0),
                prof("0", rho0, &presets::isentropic_pressure(rho0, g)),
                pde(16384, 45.0, "outflow", &[4096, 8192, 16384]),
            )
        }
        "chaplygin-demo" => (
            -1.0,
            "chaplygin",
            dom(-2.0, 2.0),
            prof("-tanh(x)", "2+tanh(x)", "1"),
            pde(512, 1.0, "outflow", &[]),
        ),
        "isothermal-demo" => (
            1.0,
            "general",
            dom(-1.0, 1.0),
            prof("-x", "exp(3*x)", "exp(x)"),
            pde(512, 1.0, "outflow", &[]),
        ),
        "constant" => (
            gamma.unwrap_or(1.4),
            "general",
            dom(0.0, 1.0),
            prof("0", "1", "1"),
            pde(128, 5.0, "periodic", &[]),
        ),
        other => return Err(ScenarioError::UnknownPreset(other.to_string())),
    };
    let Value::Table(t) = table(&[
        ("name", s(name)),
        ("preset", s(name)),
        ("gamma", Value::Float(g)),
        ("mode", s(mode)),
        ("domain", domain),
        ("profile", profile),
        ("pde", pde_v),
    ]) else {
        unreachable!()
    };
    Ok(t)
}

/// Overlays `top` onto `base`, merging nested tables key by key.
fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

impl Scenario {
    pub fn preset(name: &str) -> Result<Scenario, ScenarioError> {
        Self::from_table(preset_table(name, None)?)
    }

    pub fn from_toml_str(text: &str) -> Result<Scenario, ScenarioError> {
        let user: Table = text.parse().map_err(|e: toml::de::Error| ScenarioError::Toml(e.to_string()))?;
        let merged = match user.get("preset") {
            Some(Value::String(name)) => {
                let gamma = user.get("gamma").and_then(|g| match g {
                    Value::Float(f) => Some(*f),
                    Value::Integer(i) => Some(*i as f64),
                    _ => None,
                });
                let mut base = preset_table(name, gamma)?;
                merge(&mut base, user);
                base
            }
            Some(_) => return Err(invalid("preset", "must be a string")),
            None => user,
        };
        Self::from_table(merged)
    }

    fn from_table(t: Table) -> Result<Scenario, ScenarioError> {
        let sc: Scenario = Value::Table(t)
            .try_into()
            .map_err(|e: toml::de::Error| ScenarioError::Toml(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text).map_err(|e| match e {
            ScenarioError::Toml(m) => ScenarioError::Toml(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// `preset:<name>` or a path to a TOML file.
    pub fn resolve(spec: &str) -> Result<Scenario, ScenarioError> {
        match spec.strip_prefix("preset:") {
            Some(name) => Self::preset(name),
            None => Self::load(Path::new(spec)),
        }
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let gp = GasParams::new(self.gamma)?;
        match self.mode {
            Mode::Chaplygin if !gp.is_chaplygin() => {
                return Err(invalid("mode", "chaplygin mode needs gamma = -1"));
            }
            Mode::General | Mode::Isentropic if self.gamma < 1.0 => {
                return Err(invalid(
                    "gamma",
                    format!("{} is outside [1, inf); use mode = \"chaplygin\" with gamma = -1", self.gamma),
                ));
            }
            _ => {}
        }
        Domain::new(self.domain.a, self.domain.b)?;
        let g = &self.grid;
        if !(2..=1_000_000).contains(&g.nodes) {
            return Err(invalid("grid.nodes", format!("{} not in [2, 1000000]", g.nodes)));
        }
        if !(g.min_spacing_factor > 0.0 && g.min_spacing_factor < 1.0) {
            return Err(invalid("grid.min_spacing_factor", "must lie in (0, 1)"));
        }
        if !(g.ineq_tol >= 0.0 && g.ineq_tol < 1e-3) {
            return Err(invalid("grid.ineq_tol", "must lie in [0, 1e-3)"));
        }
        let o = &self.ode;
        if !(o.t_max > 0.0 && o.t_max.is_finite()) {
            return Err(invalid("ode.t_max", "must be positive"));
        }
        if !(o.tol > 0.0 && o.tol <= 1e-2) {
            return Err(invalid("ode.tol", "must lie in (0, 1e-2]"));
        }
        let p = &self.pde;
        for &n in p.levels().iter().chain([p.cells].iter()) {
            if !(MIN_CELLS..=1 << 20).contains(&n) {
                return Err(invalid("pde.cells", format!("{n} not in [{MIN_CELLS}, 1048576]")));
            }
        }
        if !(p.cfl > 0.0 && p.cfl <= 0.5) {
            return Err(invalid("pde.cfl", "must lie in (0, 0.5]"));
        }
        if !(p.t_end > 0.0 && p.t_end.is_finite()) {
            return Err(invalid("pde.t_end", "must be positive"));
        }
        self.profile()?;
        Ok(())
    }

    pub fn gas(&self) -> GasParams {
        GasParams::new(self.gamma).expect("validated")
    }

    pub fn domain(&self) -> Domain {
        Domain::new(self.domain.a, self.domain.b).expect("validated")
    }

    pub fn profile(&self) -> Result<Profile, ProfileError> {
        let d = Domain::new(self.domain.a, self.domain.b)?;
        Profile::parse(&self.profile.v0, &self.profile.rho0, &self.profile.p0, d)
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .or_else(|| self.preset.clone())
            .unwrap_or_else(|| "scenario".to_string())
    }

    /// The PDE stage needs the energy formulation, hence `gamma > 1`.
    pub fn pde_supported(&self) -> bool {
        self.gamma > 1.0
    }
}
