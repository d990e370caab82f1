//! `gdblow`: smooth-or-blow-up analysis of 1D polytropic Euler data.
//!
//! Exit codes: 0 smooth / bounded / consistent, 1 input error,
//! 2 blow-up predicted or observed, 3 cross-validation discrepant,
//! 4 cross-validation incomplete.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gdblow_core::commands::{self, OdeRequest, PdeOverrides, XvalOptions, EXIT_INPUT, EXIT_OK};
use gdblow_core::report::{self, gradient_csv, portrait_csv, snapshot_csv, to_json, trajectory_csv};
use gdblow_core::riemann::{SeedSpec, DEFAULT_TOL};
use gdblow_core::scenario::{Scenario, PRESETS};

#[derive(Parser)]
#[command(name = "gdblow", version, about = "Gradient-catastrophe analysis for 1D polytropic Euler data")]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a scenario pointwise and estimate the catastrophe time.
    Classify {
        /// Scenario TOML file, or `preset:<name>`.
        scenario: String,
        /// Report path (defaults to `output.report`, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record the generation time in the report.
        #[arg(long)]
        timestamp: bool,
    },
    /// Integrate the reduced slope system from one initial state.
    Ode {
        #[arg(long, allow_negative_numbers = true)]
        r1: f64,
        #[arg(long, allow_negative_numbers = true)]
        r2: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 1.4, allow_negative_numbers = true)]
        gamma: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Trajectory CSV (t, R1, R2, C).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Phase portrait polylines for a seed set.
    Portrait {
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, default_value_t = 1.4, allow_negative_numbers = true)]
        gamma: f64,
        /// `circle:N:R`, `grid:R1LO:R1HI:N1:R2LO:R2HI:N2` or `list:r1,r2;...`.
        #[arg(long, allow_hyphen_values = true)]
        seeds: String,
        #[arg(long, default_value_t = 20.0)]
        t_max: f64,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-volume run with snapshot and gradient-history CSVs.
    Pde {
        scenario: String,
        #[arg(long)]
        cells: Option<usize>,
        #[arg(long)]
        cfl: Option<f64>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Output directory (defaults to `output.dir`, else `pde-out`).
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Classifier, slope ODE and PDE refinement study with a consistency
    /// verdict.
    Xval {
        scenario: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replace the predicted catastrophe time (negative control).
        #[arg(long)]
        predicted_t_override: Option<f64>,
        #[arg(long)]
        timestamp: bool,
    },
    /// List the built-in presets.
    Presets,
}

fn fail(msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    EXIT_INPUT as u8
}

fn write(path: &Path, contents: &str) -> Result<(), String> {
    report::write_atomic(path, contents).map_err(|e| format!("io error: {}: {e}", path.display()))
}

/// Writes the report to `out` and returns the summary destination, or
/// prints it to stdout.
fn emit_report(json: &str, out: Option<PathBuf>) -> Result<bool, String> {
    match out {
        Some(p) => {
            write(&p, json)?;
            Ok(true)
        }
        None => {
            print!("{json}");
            Ok(false)
        }
    }
}

fn summary(to_stdout: bool, line: &str) {
    if to_stdout {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn run(cli: Cli) -> Result<u8, String> {
    match cli.command {
        Command::Classify {
            scenario,
            out,
            timestamp,
        } => {
            let sc = Scenario::resolve(&scenario).map_err(|e| e.to_string())?;
            let mut c = commands::classify(&sc).map_err(|e| e.to_string())?;
            if timestamp {
                c.report.stamp();
            }
            let to_file = emit_report(&to_json(&c.report), out.or(sc.output.report.clone()))?;
            let v = &c.verdict;
            let line = match v.predicted_t {
                Some(t) => format!(
                    "{}: smooth=false witnesses={} predicted_T={}",
                    sc.label(),
                    v.witnesses.len(),
                    report::fmt_f64(t)
                ),
                None => format!("{}: smooth={} witnesses={}", sc.label(), v.smooth, v.witnesses.len()),
            };
            summary(to_file, &line);
            Ok(c.exit_code() as u8)
        }
        Command::Ode {
            r1,
            r2,
            b,
            gamma,
            t_max,
            tol,
            out,
        } => {
            let req = OdeRequest {
                r1,
                r2,
                b,
                gamma,
                t_max,
                tol,
            };
            let (tr, s) = commands::ode(&req).map_err(|e| e.to_string())?;
            if let Some(p) = out {
                write(&p, &trajectory_csv(&tr))?;
            }
            println!("{}", s.line());
            Ok(s.exit_code() as u8)
        }
        Command::Portrait {
            b,
            gamma,
            seeds,
            t_max,
            tol,
            out,
        } => {
            let spec: SeedSpec = seeds.parse().map_err(|e| format!("argument error: {e}"))?;
            let p = commands::portrait(b, gamma, &spec, t_max, tol);
            write(&out, &portrait_csv(&p.curves))?;
            for (seed, e) in &p.failures {
                eprintln!("warning: seed ({}, {}): {e}", seed.0, seed.1);
            }
            let mut counts = std::collections::BTreeMap::new();
            for c in &p.curves {
                *counts.entry(c.forward.outcome.label()).or_insert(0usize) += 1;
            }
            let tally: Vec<String> = counts.iter().map(|(k, n)| format!("{k}={n}")).collect();
            println!("curves={} {} failed={}", p.curves.len(), tally.join(" "), p.failures.len());
            Ok(EXIT_OK as u8)
        }
        Command::Pde {
            scenario,
            cells,
            cfl,
            t_end,
            out_dir,
        } => {
            let sc = Scenario::resolve(&scenario).map_err(|e| e.to_string())?;
            let ov = PdeOverrides { cells, cfl, t_end };
            let (r, s) = commands::pde(&sc, &ov).map_err(|e| e.to_string())?;
            let dir = out_dir
                .or(sc.output.dir.clone())
                .unwrap_or_else(|| PathBuf::from("pde-out"));
            for (k, snap) in r.snapshots.iter().enumerate() {
                write(&dir.join(format!("snapshot_{k:03}.csv")), &snapshot_csv(snap))?;
            }
            write(&dir.join("gradient_history.csv"), &gradient_csv(&r.history))?;
            println!("{}", s.statement);
            Ok(s.exit_code() as u8)
        }
        Command::Xval {
            scenario,
            out,
            predicted_t_override,
            timestamp,
        } => {
            let sc = Scenario::resolve(&scenario).map_err(|e| e.to_string())?;
            let opts = XvalOptions {
                predicted_t_override,
                ..XvalOptions::default()
            };
            let mut x = commands::xval(&sc, &opts);
            if timestamp {
                x.report.stamp();
            }
            let to_file = emit_report(&to_json(&x.report), out.or(sc.output.report.clone()))?;
            let status = match &x.report.cross_validation {
                Some(report::CrossValidation::Consistent) => "consistent".to_string(),
                Some(report::CrossValidation::Discrepant { details }) => {
                    format!("discrepant ({})", details.iter().map(|d| d.reason.as_str()).collect::<Vec<_>>().join("; "))
                }
                Some(report::CrossValidation::Incomplete { stage }) => format!("incomplete (stage {stage})"),
                None => "incomplete".to_string(),
            };
            summary(to_file, &format!("{}: {status}", sc.label()));
            Ok(x.exit_code() as u8)
        }
        Command::Presets => {
            for p in PRESETS {
                println!("{p}");
            }
            Ok(EXIT_OK as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT as u8,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    ExitCode::from(run(cli).unwrap_or_else(fail))
}
