//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage and configuration errors, 2 for numeric failures.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotic::{asym_coeffs, classify_case, AsymCoeffs, CaseTag};
use crate::builtin::{lane_emden, LaneEmdenOptions};
use crate::config::{AnalysisConfig, ModelSpec, SCHEMA_VERSION};
use crate::diagnostics::assumption_diagnostics;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::oracle::{oracle_grid, to_csv};
use crate::par::Execution;
use crate::plot::{plot_svg, write_plot};
use crate::regular::{lambda_beta, regular_part};
use crate::report::{from_json, run_analyze, to_json, ToolInfo};
use crate::singular::{default_window, essential_spectrum, probe_case, singular_analysis};

#[derive(Debug, Parser)]
#[command(name = "essspec", version, about = "Essential spectrum of singular block matrix differential operators")]
pub struct Cli {
    /// Print errors as a JSON object on stdout.
    #[arg(long, global = true)]
    pub json_errors: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full analysis: JSON report, optional SVG plot and oracle table.
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        /// SVG output path.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Diagnostics lambda (repeatable).
        #[arg(long = "lambda", allow_negative_numbers = true)]
        lambdas: Vec<f64>,
    },
    /// Case tags (I, II, III) at given lambdas or at probe points of the window.
    Classify {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "lambda", allow_negative_numbers = true)]
        lambdas: Vec<f64>,
    },
    /// Regular part and the limit set of the eigenvalues of D.
    Regular {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Singular part on the lambda window.
    Singular {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Boundary structure coefficients and the resulting sign class.
    Structure {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Essential spectral radius.
    Radius {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Numeric evidence for the standing assumptions at given lambdas.
    Diagnose {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long = "lambda", allow_negative_numbers = true, required = true)]
        lambdas: Vec<f64>,
    },
    /// Solve the Lane-Emden equation up to its first zero.
    LaneEmden {
        #[arg(long, default_value_t = 3.0)]
        n_poly: f64,
        #[arg(long, default_value_t = 1.0)]
        alpha_n: f64,
        /// Include the integration nodes in the output.
        #[arg(long)]
        profile: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discriminant sign table from pointwise limits, as CSV.
    OracleGrid {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Render an existing JSON report as SVG.
    Plot {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone, Default)]
pub struct ModelArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in model name (instead of a configuration file).
    #[arg(long, conflicts_with = "config")]
    pub builtin: Option<String>,
    /// Built-in model parameter, KEY=VALUE (repeatable); VALUE is a number or an expression.
    #[arg(long = "param", requires = "builtin")]
    pub params: Vec<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_max: Option<f64>,
    /// Number of lambda grid points.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of t grid points for the regular part.
    #[arg(long)]
    pub t_grid: Option<usize>,
    /// Tolerance override, KEY=VALUE (repeatable).
    #[arg(long = "tol")]
    pub tols: Vec<String>,
    /// Run every sweep on one thread.
    #[arg(long)]
    pub sequential: bool,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn split_kv<'a>(s: &'a str, flag: &str) -> Result<(&'a str, &'a str)> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| Error::config(flag, format!("expected KEY=VALUE, got `{s}`")))
}

impl ModelArgs {
    /// Configuration from the file or built-in name, with command-line overrides applied.
    pub fn config(&self) -> Result<AnalysisConfig> {
        let mut cfg = match (&self.config, &self.builtin) {
            (Some(p), _) => AnalysisConfig::load(p)?,
            (None, Some(name)) => {
                let mut params = Map::new();
                for kv in &self.params {
                    let (k, v) = split_kv(kv, "--param")?;
                    let value = v.parse::<f64>().map(Value::from).unwrap_or_else(|_| Value::from(v));
                    params.insert(k.to_string(), value);
                }
                AnalysisConfig { model: ModelSpec::Builtin { name: name.clone(), params }, ..Default::default() }
            }
            (None, None) => return Err(Error::config("--config", "give --config PATH or --builtin NAME")),
        };
        match (self.lambda_min, self.lambda_max) {
            (None, None) => {}
            (Some(lo), Some(hi)) if lo.is_finite() && hi.is_finite() && lo < hi => cfg.window = Some(Interval::new(lo, hi)),
            (Some(_), Some(_)) => return Err(Error::config("window", "need finite lambda_min < lambda_max")),
            _ => return Err(Error::config("window", "--lambda-min and --lambda-max go together")),
        }
        if let Some(n) = self.grid {
            cfg.options.lambda_grid = n;
        }
        if let Some(n) = self.t_grid {
            cfg.options.t_grid = n;
        }
        for kv in &self.tols {
            let (k, v) = split_kv(kv, "--tol")?;
            cfg.options.set(k, v)?;
        }
        if self.sequential {
            cfg.options.execution = Execution::Sequential;
        }
        cfg.options.validate()?;
        Ok(cfg)
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Wraps a payload with the tool and schema version.
fn envelope<T: Serialize>(kind: &str, payload: &T) -> Result<String> {
    let body = serde_json::to_value(payload).map_err(|e| Error::numeric(e.to_string()))?;
    to_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "tool": ToolInfo::current(),
        "kind": kind,
        "result": body,
    }))
}

#[derive(Serialize)]
struct ClassifyRow {
    tag: CaseTag,
    coeffs: AsymCoeffs,
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Analyze { model, plot, lambdas } => {
            let mut cfg = model.config()?;
            if !lambdas.is_empty() {
                cfg.diagnostics = lambdas.clone();
            }
            let report = run_analyze(&cfg)?;
            let out = model.out.clone().or_else(|| cfg.outputs.report.clone());
            write_out(out.as_deref(), &to_json(&report)?)?;
            if let Some(p) = plot.clone().or_else(|| cfg.outputs.plot.clone()) {
                write_plot(&report, &p)?;
            }
            if let Some(p) = &cfg.outputs.oracle {
                if report.case == crate::asymptotic::Case::III {
                    let (m, _) = cfg.build_model()?;
                    let rows = oracle_grid(&m, report.window, oracle_step(report.window), &cfg.options)?;
                    write_out(Some(p), &to_csv(&rows))?;
                }
            }
            Ok(())
        }
        Command::Classify { model, lambdas } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let opts = &cfg.options;
            let rows: Vec<ClassifyRow> = if lambdas.is_empty() {
                let reg = regular_part(&m, opts).map_err(|e| e.in_module("regular-spectrum"))?;
                let lb = lambda_beta(&m, opts).map_err(|e| e.in_module("regular-spectrum"))?;
                let window = cfg.window.unwrap_or_else(|| default_window(&reg.set, &lb));
                let mut warnings = Vec::new();
                let (_, tags) = probe_case(&m, window, &reg.set, &lb, opts, &mut warnings)
                    .map_err(|e| e.in_module("asymptotic-limits"))?;
                tags.iter()
                    .map(|t| Ok(ClassifyRow { tag: *t, coeffs: asym_coeffs(&m, t.lambda, opts)? }))
                    .collect::<Result<_>>()?
            } else {
                lambdas
                    .iter()
                    .map(|&l| {
                        let coeffs = asym_coeffs(&m, l, opts).map_err(|e| e.in_module("asymptotic-limits"))?;
                        Ok(ClassifyRow { tag: classify_case(&coeffs, opts.eps_class), coeffs })
                    })
                    .collect::<Result<_>>()?
            };
            write_out(model.out.as_deref(), &envelope("classify", &rows)?)
        }
        Command::Regular { model } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let reg = regular_part(&m, &cfg.options).map_err(|e| e.in_module("regular-spectrum"))?;
            let lb = lambda_beta(&m, &cfg.options).map_err(|e| e.in_module("regular-spectrum"))?;
            write_out(model.out.as_deref(), &envelope("regular", &json!({ "regular_part": reg, "lambda_beta": lb }))?)
        }
        Command::Singular { model } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let reg = regular_part(&m, &cfg.options).map_err(|e| e.in_module("regular-spectrum"))?;
            let lb = lambda_beta(&m, &cfg.options).map_err(|e| e.in_module("regular-spectrum"))?;
            let window = cfg.window.unwrap_or_else(|| default_window(&reg.set, &lb));
            let sa = singular_analysis(&m, window, &reg.set, &lb, &cfg.options)
                .map_err(|e| e.in_module("singular-spectrum"))?;
            write_out(model.out.as_deref(), &envelope("singular", &sa.part)?)
        }
        Command::Structure { model } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let a = essential_spectrum(&m, cfg.window, &cfg.options)?;
            let body = json!({ "structure": a.structure, "structure_class": a.structure_class, "j0": a.lambda_beta.j0 });
            write_out(model.out.as_deref(), &envelope("structure", &body)?)
        }
        Command::Radius { model } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let a = essential_spectrum(&m, cfg.window, &cfg.options)?;
            let body = json!({ "essential_radius": a.radius, "essential_spectrum": a.essential_spectrum });
            write_out(model.out.as_deref(), &envelope("radius", &body)?)
        }
        Command::Diagnose { model, lambdas } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let reports = lambdas
                .iter()
                .map(|&l| assumption_diagnostics(&m, l, &cfg.options).map_err(|e| e.in_module("asymptotic-limits")))
                .collect::<Result<Vec<_>>>()?;
            write_out(model.out.as_deref(), &envelope("diagnose", &reports)?)
        }
        Command::LaneEmden { n_poly, alpha_n, profile, out } => {
            let s = lane_emden(*n_poly, *alpha_n, &LaneEmdenOptions::default()).map_err(|e| e.in_module("builtin-models"))?;
            let mut body = json!({
                "n_poly": s.n_poly,
                "alpha": s.alpha,
                "radius": s.radius,
                "max_residual": s.max_residual,
                "nodes": s.t.len(),
            });
            if *profile {
                body["t"] = json!(s.t);
                body["theta"] = json!(s.theta);
                body["theta_d1"] = json!(s.theta_d1);
            }
            write_out(out.as_deref(), &envelope("lane-emden", &body)?)
        }
        Command::OracleGrid { model, step } => {
            let cfg = model.config()?;
            let (m, _) = cfg.build_model()?;
            let window = match cfg.window {
                Some(w) => w,
                None => {
                    let reg = regular_part(&m, &cfg.options)?;
                    let lb = lambda_beta(&m, &cfg.options)?;
                    default_window(&reg.set, &lb)
                }
            };
            let rows = oracle_grid(&m, window, *step, &cfg.options).map_err(|e| e.in_module("cli-report"))?;
            write_out(model.out.as_deref(), &to_csv(&rows))
        }
        Command::Plot { report, out } => {
            let text = std::fs::read_to_string(report).map_err(|e| Error::Io(format!("{}: {e}", report.display())))?;
            let r = from_json(&text)?;
            write_out(out.as_deref(), &plot_svg(&r))
        }
    }
}

/// Step giving about 200 oracle rows on the window.
fn oracle_step(w: Interval) -> f64 {
    (w.hi - w.lo) / 200.0
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        1
    } else {
        2
    }
}

pub fn error_json(e: &Error) -> String {
    let module = match e {
        Error::Context { module, .. } => Some(*module),
        _ => None,
    };
    let kind = if exit_code(e) == 1 { "usage" } else { "numeric" };
    let v = json!({ "error": { "kind": kind, "module": module, "message": e.root().to_string() } });
    format!("{v}\n")
}

/// Parses arguments, runs, and reports errors; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            if cli.json_errors {
                print!("{}", error_json(&e));
            } else {
                eprintln!("error: {e}");
            }
            exit_code(&e)
        }
    }
}
