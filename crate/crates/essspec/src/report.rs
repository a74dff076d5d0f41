//! Spectrum report assembly and JSON serialization with 17 significant digits.

use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::asymptotic::{Case, CaseTag};
use crate::builtin::{BuiltinSide, Lambda11Rule};
use crate::config::AnalysisConfig;
use crate::diagnostics::{assumption_diagnostics, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::model::{CoefficientModel, Endpoint};
use crate::regular::{BranchLimit, BranchRange};
use crate::singular::{
    essential_spectrum, DiscriminantPath, ExceptionalPoint, PointStatus, RadiusReport, SpectrumAnalysis,
    StructureClass, StructureCoeffs,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo { name: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelInfo {
    pub name: String,
    pub dim: usize,
    pub alpha: f64,
    pub beta: Endpoint,
}

impl ModelInfo {
    pub fn of(m: &CoefficientModel) -> Self {
        ModelInfo { name: m.name.clone(), dim: m.dim(), alpha: m.alpha, beta: m.beta }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularSection {
    pub set: IntervalSet,
    pub branches: Vec<BranchRange>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LambdaBetaSection {
    pub points: Vec<ExceptionalPoint>,
    pub j0: usize,
    pub improper: usize,
    pub undecided: usize,
    /// Per-branch limits of the eigenvalues of `D`, with growth exponents for diverging ones.
    pub branches: Vec<BranchLimit>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingularSection {
    pub set: IntervalSet,
    pub path: DiscriminantPath,
    pub anchored_endpoints: Vec<f64>,
    pub meets_excluded: bool,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config: AnalysisConfig,
    pub model: ModelInfo,
    pub window: Interval,
    pub case: Case,
    pub case_tags: Vec<CaseTag>,
    pub regular_part: RegularSection,
    pub lambda_beta: LambdaBetaSection,
    pub singular_part: SingularSection,
    pub structure: Option<StructureCoeffs>,
    pub structure_class: Option<StructureClass>,
    /// Union of the regular and singular parts; exceptional points are listed under `lambda_beta`.
    pub essential_spectrum: IntervalSet,
    pub essential_radius: RadiusReport,
    pub regular_inf_check: Option<bool>,
    pub diagnostics: Vec<DiagnosticsReport>,
    /// Closed-form data of a built-in model.
    pub builtin: Option<Value>,
    pub warnings: Vec<String>,
}

/// Applies the model-specific rule for the exceptional point `λ₁,₁` of the second example.
fn apply_builtin_rules(a: &mut SpectrumAnalysis, side: &BuiltinSide, tol: f64) {
    if let BuiltinSide::ExampleB(b) = side {
        if let (Case::III, Some(rule)) = (b.case, b.lambda11_rule) {
            let status = match rule {
                Lambda11Rule::InSingularClosure => PointStatus::InSingularClosure,
                Lambda11Rule::InRegular => PointStatus::InRegular,
            };
            a.set_point_status(b.lambda11, status, tol);
        }
    }
}

/// Diagnostics lambda: the midpoint of the widest compact singular interval when admissible,
/// otherwise the case probe closest to it (or to 1).
fn default_diagnostic_lambda(a: &SpectrumAnalysis) -> Option<f64> {
    let target = a
        .singular
        .set
        .intervals()
        .iter()
        .filter(|i| i.is_compact())
        .max_by(|x, y| (x.hi - x.lo).total_cmp(&(y.hi - y.lo)))
        .map_or(1.0, |i| 0.5 * (i.lo + i.hi));
    let scale = 1.0 + a.lambda_beta.max_abs() + a.regular.set.max_finite_abs();
    let margin = 1e-2 * scale;
    if a.regular.set.distance(target) > margin && a.lambda_beta.distance(target) > margin {
        return Some(target);
    }
    a.singular
        .probes
        .iter()
        .map(|t| t.lambda)
        .min_by(|x, y| (x - target).abs().total_cmp(&(y - target).abs()))
}

/// Runs the full analysis for a configuration.
pub fn run_analyze(cfg: &AnalysisConfig) -> Result<SpectrumReport> {
    let (m, side) = cfg.build_model()?;
    analyze_model(&m, side.as_ref(), cfg)
}

pub fn analyze_model(m: &CoefficientModel, side: Option<&BuiltinSide>, cfg: &AnalysisConfig) -> Result<SpectrumReport> {
    let opts = &cfg.options;
    let mut a = essential_spectrum(m, cfg.window, opts)?;
    let tol = 1e-6 * (1.0 + a.lambda_beta.max_abs());
    if let Some(s) = side {
        apply_builtin_rules(&mut a, s, tol);
    }
    let lambdas = if cfg.diagnostics.is_empty() {
        default_diagnostic_lambda(&a).into_iter().collect()
    } else {
        cfg.diagnostics.clone()
    };
    let mut warnings = Vec::new();
    let mut diagnostics = Vec::new();
    for l in lambdas {
        match assumption_diagnostics(m, l, opts) {
            Ok(d) => diagnostics.push(d),
            Err(e) => warnings.push(format!("diagnostics at lambda = {l}: {e}")),
        }
    }
    if a.regular_inf_check == Some(false) {
        warnings.push("inf of the regular part exceeds inf of the exceptional set".into());
    }
    if let Some(c) = &a.radius.closed_form {
        if !c.agrees {
            warnings.push("closed-form endpoints disagree with the computed singular part".into());
        }
    }
    let builtin = side
        .map(|s| serde_json::to_value(s).map_err(|e| Error::numeric(format!("side channel: {e}"))))
        .transpose()?;
    Ok(SpectrumReport {
        schema_version: crate::config::SCHEMA_VERSION,
        tool: ToolInfo::current(),
        config: cfg.clone(),
        model: ModelInfo::of(m),
        window: a.window,
        case: a.case,
        case_tags: a.singular.probes.clone(),
        regular_part: RegularSection {
            set: a.regular.set.clone(),
            branches: a.regular.branches.clone(),
            warnings: a.regular.warnings.clone(),
        },
        lambda_beta: LambdaBetaSection {
            points: a.exceptional.clone(),
            j0: a.lambda_beta.j0,
            improper: a.lambda_beta.improper,
            undecided: a.lambda_beta.undecided,
            branches: a.lambda_beta.branches.clone(),
            warnings: a.lambda_beta.warnings.clone(),
        },
        singular_part: SingularSection {
            set: a.singular.set.clone(),
            path: a.singular.path,
            anchored_endpoints: a.singular.anchored_endpoints.clone(),
            meets_excluded: a.singular.meets_excluded,
            warnings: a.singular.warnings.clone(),
        },
        structure: a.structure.clone(),
        structure_class: a.structure_class,
        essential_spectrum: a.essential_spectrum.clone(),
        essential_radius: a.radius,
        regular_inf_check: a.regular_inf_check,
        diagnostics,
        builtin,
        warnings,
    })
}

/// Writes floats as `d.dddddddddddddddde±x`, 17 significant digits, which round-trips.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// Indented JSON with 17-significant-digit floats; the output ends with a newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    // go through a Value so that every float passes the formatter, then indent
    let v = serde_json::to_value(value).map_err(|e| Error::numeric(format!("serialize: {e}")))?;
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Pretty17::default());
    v.serialize(&mut ser).map_err(|e| Error::numeric(format!("serialize: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::numeric(e.to_string()))
}

/// Pretty printer with the float format of [`Digits17`].
#[derive(Default)]
struct Pretty17<'a> {
    inner: serde_json::ser::PrettyFormatter<'a>,
}

macro_rules! delegate {
    ($($name:ident ( $($arg:ident : $ty:ty),* );)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> std::io::Result<()> {
            self.inner.$name(w $(, $arg)*)
        })*
    };
}

impl serde_json::ser::Formatter for Pretty17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> std::io::Result<()> {
        Digits17.write_f64(w, value)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

pub fn from_json(text: &str) -> Result<SpectrumReport> {
    serde_json::from_str(text).map_err(|e| Error::config("report", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let s = to_json(&vec![0.1, 4.0, -1e-300]).unwrap();
        assert!(s.contains("1.0000000000000001e-1"), "{s}");
        assert!(s.contains("4.0000000000000000e0"));
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 4.0, -1e-300]);
    }
}
