//! Profile expression language: parsing, forward-mode evaluation and
//! profile sampling.

mod ast;
mod eval;
mod parser;
pub mod presets;
mod profile;

pub use ast::{BinOp, Expr, Func};
pub use eval::{eval, eval_d, eval_dual, Dual, EvalError};
pub use parser::{parse, ParseError, ParseErrorKind};
pub use profile::{sample_profile, Domain, Field, PointData, Profile, ProfileError};
