use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::ast::Expr;
use super::eval::{eval_d, EvalError};
use super::parser::{parse, ParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("profile field {field}: {source}")]
    Parse {
        field: &'static str,
        #[source]
        source: ParseError,
    },
    #[error("profile field {field}: {source}")]
    Eval {
        field: &'static str,
        #[source]
        source: EvalError,
    },
    #[error("positivity violated: {field}({x}) = {value}")]
    Positivity { field: &'static str, x: f64, value: f64 },
    #[error("invalid domain [{a}, {b}]")]
    InvalidDomain { a: f64, b: f64 },
    #[error("grid node {x} lies outside [{a}, {b}]")]
    OutsideDomain { x: f64, a: f64, b: f64 },
    #[error("grid must be strictly increasing (node {index})")]
    NotIncreasing { index: usize },
}

/// Closed analysis window `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub a: f64,
    pub b: f64,
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self, ProfileError> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(ProfileError::InvalidDomain { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    /// `n >= 2` equally spaced nodes including both endpoints.
    pub fn linspace(&self, n: usize) -> Vec<f64> {
        let n = n.max(2);
        let h = self.width() / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { self.b } else { self.a + h * i as f64 })
            .collect()
    }
}

/// Cauchy data `(v0, rho0, p0)` on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub v0: Expr,
    pub rho0: Expr,
    pub p0: Expr,
    pub domain: Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointData {
    pub x: f64,
    pub v0: f64,
    pub rho0: f64,
    pub p0: f64,
    pub dv0: f64,
    pub drho0: f64,
    pub dp0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    V0,
    Rho0,
    P0,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::V0 => "v0",
            Field::Rho0 => "rho0",
            Field::P0 => "p0",
        }
    }
}

impl Profile {
    pub fn parse(v0: &str, rho0: &str, p0: &str, domain: Domain) -> Result<Self, ProfileError> {
        let field = |field: &'static str, text: &str| {
            parse(text).map_err(|source| ProfileError::Parse { field, source })
        };
        Ok(Self {
            v0: field("v0", v0)?,
            rho0: field("rho0", rho0)?,
            p0: field("p0", p0)?,
            domain,
        })
    }

    pub fn expr(&self, field: Field) -> &Expr {
        match field {
            Field::V0 => &self.v0,
            Field::Rho0 => &self.rho0,
            Field::P0 => &self.p0,
        }
    }

    /// `(value, derivative)` of one field.
    pub fn eval_field(&self, field: Field, x: f64) -> Result<(f64, f64), ProfileError> {
        eval_d(self.expr(field), x).map_err(|source| ProfileError::Eval {
            field: field.name(),
            source,
        })
    }

    /// Evaluates all three fields at `x`, enforcing `rho0 > 0` and `p0 > 0`.
    pub fn point(&self, x: f64) -> Result<PointData, ProfileError> {
        let (v0, dv0) = self.eval_field(Field::V0, x)?;
        let (rho0, drho0) = self.eval_field(Field::Rho0, x)?;
        let (p0, dp0) = self.eval_field(Field::P0, x)?;
        if !(rho0 > 0.0) {
            return Err(ProfileError::Positivity {
                field: "rho0",
                x,
                value: rho0,
            });
        }
        if !(p0 > 0.0) {
            return Err(ProfileError::Positivity {
                field: "p0",
                x,
                value: p0,
            });
        }
        Ok(PointData {
            x,
            v0,
            rho0,
            p0,
            dv0,
            drho0,
            dp0,
        })
    }

    /// Same profile with the pressure replaced by the isentropic law
    /// `p0 = rho0^gamma / gamma`.
    pub fn with_isentropic_pressure(&self, gamma: f64) -> Profile {
        use super::ast::BinOp;
        let p0 = Expr::bin(
            BinOp::Div,
            Expr::bin(BinOp::Pow, self.rho0.clone(), Expr::num(gamma)),
            Expr::num(gamma),
        );
        Profile {
            p0,
            ..self.clone()
        }
    }
}

/// Evaluates the profile at every node. Fails on the first node that
/// violates positivity or cannot be evaluated.
pub fn sample_profile(pr: &Profile, grid: &[f64]) -> Result<Vec<PointData>, ProfileError> {
    check_grid(&pr.domain, grid)?;
    grid.iter().map(|&x| pr.point(x)).collect()
}

pub(crate) fn check_grid(domain: &Domain, grid: &[f64]) -> Result<(), ProfileError> {
    for (i, &x) in grid.iter().enumerate() {
        if !domain.contains(x) {
            return Err(ProfileError::OutsideDomain {
                x,
                a: domain.a,
                b: domain.b,
            });
        }
        if i > 0 && !(x > grid[i - 1]) {
            return Err(ProfileError::NotIncreasing { index: i });
        }
    }
    Ok(())
}
