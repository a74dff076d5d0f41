//! JSON analysis configuration.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "model": { "builtin": "example_a", "params": { "phi": 5 } },
//!   "window": { "lambda_min": -10, "lambda_max": 10 },
//!   "grid": { "t": 257, "lambda": 401 },
//!   "tolerances": { "root_tol": 1e-9 },
//!   "execution": "parallel",
//!   "diagnostics": { "lambdas": [2.0] },
//!   "outputs": { "report": "report.json", "plot": "spectrum.svg", "oracle": "oracle.csv" }
//! }
//! ```
//!
//! A custom model replaces `builtin` with
//! `"custom": { "alpha": 0, "beta": 1, "p": "1", "q": "5", "b": ["1/(1-t)"], "c": ["0"], "d": [["1/(1-t)^2"]] }`.
//! `beta` may be `"inf"`. Vector and matrix entries are a number, an expression string,
//! `[re, im]` or `{"re": ..., "im": ...}`; `d` is the full Hermitian matrix.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::builtin::{builtin, BuiltinSide};
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::interval::Interval;
use crate::model::{CoefficientModel, ComplexExpr, Endpoint, ExprCoefficients};
use crate::options::Options;
use crate::par::Execution;

pub const SCHEMA_VERSION: u32 = 1;

const TOP_KEYS: [&str; 8] = [
    "schema_version",
    "model",
    "window",
    "grid",
    "tolerances",
    "execution",
    "diagnostics",
    "outputs",
];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub oracle: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowSpec {
    lambda_min: f64,
    lambda_max: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    t: Option<usize>,
    lambda: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagnosticsSpec {
    #[serde(default)]
    lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Builtin { name: String, params: Map<String, Value> },
    Custom(Value),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    pub window: Option<Interval>,
    pub options: Options,
    /// Lambdas for the assumption diagnostics; empty selects one automatically.
    pub diagnostics: Vec<f64>,
    pub outputs: Outputs,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            schema_version: SCHEMA_VERSION,
            model: ModelSpec::Builtin { name: "example_a".into(), params: Map::new() },
            window: None,
            options: Options::default(),
            diagnostics: vec![],
            outputs: Outputs::default(),
        }
    }
}

fn section<T: for<'de> Deserialize<'de>>(v: &Value, key: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::config(key, e.to_string()))
}

impl AnalysisConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::config("<root>", e.to_string()))?;
        Self::from_value(&v)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_value(v: &Value) -> Result<Self> {
        let obj = v.as_object().ok_or_else(|| Error::config("<root>", "expected a JSON object"))?;
        if let Some(k) = obj.keys().find(|k| !TOP_KEYS.contains(&k.as_str())) {
            return Err(Error::config(k.as_str(), "unknown key"));
        }
        let schema_version = match obj.get("schema_version") {
            None => return Err(Error::config("schema_version", "missing")),
            Some(x) => x.as_u64().ok_or_else(|| Error::config("schema_version", "expected an integer"))? as u32,
        };
        if schema_version != SCHEMA_VERSION {
            return Err(Error::config(
                "schema_version",
                format!("unsupported version {schema_version} (expected {SCHEMA_VERSION})"),
            ));
        }
        let model = parse_model_spec(obj.get("model").ok_or_else(|| Error::config("model", "missing"))?)?;

        let window = match obj.get("window") {
            None => None,
            Some(w) => {
                let w: WindowSpec = section(w, "window")?;
                if !(w.lambda_min.is_finite() && w.lambda_max.is_finite() && w.lambda_min < w.lambda_max) {
                    return Err(Error::config("window", "need finite lambda_min < lambda_max"));
                }
                Some(Interval::new(w.lambda_min, w.lambda_max))
            }
        };
        let mut options: Options = match obj.get("tolerances") {
            None => Options::default(),
            Some(t) => section(t, "tolerances")?,
        };
        if let Some(g) = obj.get("grid") {
            let g: GridSpec = section(g, "grid")?;
            if let Some(t) = g.t {
                options.t_grid = t;
            }
            if let Some(l) = g.lambda {
                options.lambda_grid = l;
            }
        }
        if let Some(e) = obj.get("execution") {
            options.execution = section::<Execution>(e, "execution")?;
        }
        options.validate()?;
        let diagnostics = match obj.get("diagnostics") {
            None => vec![],
            Some(d) => section::<DiagnosticsSpec>(d, "diagnostics")?.lambdas,
        };
        if diagnostics.iter().any(|x| !x.is_finite()) {
            return Err(Error::config("diagnostics.lambdas", "lambdas must be finite"));
        }
        let outputs = match obj.get("outputs") {
            None => Outputs::default(),
            Some(o) => section(o, "outputs")?,
        };
        Ok(AnalysisConfig { schema_version, model, window, options, diagnostics, outputs })
    }

    /// Builds the model; built-ins also return their closed-form side channel.
    pub fn build_model(&self) -> Result<(CoefficientModel, Option<BuiltinSide>)> {
        match &self.model {
            ModelSpec::Builtin { name, params } => {
                let b = builtin(name, params)?;
                Ok((b.model, Some(b.side)))
            }
            ModelSpec::Custom(v) => Ok((custom_model(v)?, None)),
        }
    }
}

fn parse_model_spec(v: &Value) -> Result<ModelSpec> {
    let obj = v.as_object().ok_or_else(|| Error::config("model", "expected an object"))?;
    match (obj.get("builtin"), obj.get("custom")) {
        (Some(name), None) => {
            if let Some(k) = obj.keys().find(|k| *k != "builtin" && *k != "params") {
                return Err(Error::config(format!("model.{k}"), "unknown key"));
            }
            let name = name.as_str().ok_or_else(|| Error::config("model.builtin", "expected a string"))?;
            let params = match obj.get("params") {
                None => Map::new(),
                Some(Value::Object(p)) => p.clone(),
                Some(_) => return Err(Error::config("model.params", "expected an object")),
            };
            Ok(ModelSpec::Builtin { name: name.to_string(), params })
        }
        (None, Some(c)) => {
            if obj.len() != 1 {
                return Err(Error::config("model", "a custom model takes only the `custom` key"));
            }
            // validate eagerly so schema errors surface at load time
            custom_model(c)?;
            Ok(ModelSpec::Custom(c.clone()))
        }
        _ => Err(Error::config("model", "expected exactly one of `builtin` or `custom`")),
    }
}

fn expr_value(v: &Value, key: &str) -> Result<Expr> {
    match v {
        Value::Number(x) => x.as_f64().map(Expr::Const).ok_or_else(|| Error::config(key, "not a number")),
        Value::String(s) => parse_expr(s).map_err(|e| Error::config(key, e.to_string())),
        _ => Err(Error::config(key, "expected a number or an expression string")),
    }
}

fn complex_value(v: &Value, key: &str) -> Result<ComplexExpr> {
    match v {
        Value::Array(a) if a.len() == 2 => Ok(ComplexExpr {
            re: expr_value(&a[0], &format!("{key}[0]"))?,
            im: expr_value(&a[1], &format!("{key}[1]"))?,
        }),
        Value::Object(o) => {
            if let Some(k) = o.keys().find(|k| *k != "re" && *k != "im") {
                return Err(Error::config(format!("{key}.{k}"), "unknown key"));
            }
            let zero = Value::from(0.0);
            Ok(ComplexExpr {
                re: expr_value(o.get("re").unwrap_or(&zero), &format!("{key}.re"))?,
                im: expr_value(o.get("im").unwrap_or(&zero), &format!("{key}.im"))?,
            })
        }
        other => Ok(ComplexExpr::real(expr_value(other, key)?)),
    }
}

fn complex_list(v: Option<&Value>, key: &str) -> Result<Vec<ComplexExpr>> {
    let a = v
        .and_then(Value::as_array)
        .ok_or_else(|| Error::config(key, "expected an array"))?;
    a.iter()
        .enumerate()
        .map(|(i, e)| complex_value(e, &format!("{key}[{i}]")))
        .collect()
}

/// Builds a model from the `custom` object, checking that `d` is Hermitian at sample points.
pub fn custom_model(v: &Value) -> Result<CoefficientModel> {
    const KEYS: [&str; 8] = ["alpha", "beta", "p", "q", "b", "c", "d", "name"];
    let obj = v.as_object().ok_or_else(|| Error::config("model.custom", "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(Error::config(format!("model.custom.{k}"), "unknown key"));
    }
    let alpha = obj
        .get("alpha")
        .and_then(Value::as_f64)
        .ok_or_else(|| Error::config("model.custom.alpha", "expected a number"))?;
    let beta: Endpoint = section(
        obj.get("beta").ok_or_else(|| Error::config("model.custom.beta", "missing"))?,
        "model.custom.beta",
    )?;
    let req = |k: &str| obj.get(k).ok_or_else(|| Error::config(format!("model.custom.{k}"), "missing"));
    let p = expr_value(req("p")?, "model.custom.p")?;
    let q = expr_value(req("q")?, "model.custom.q")?;
    let b = complex_list(obj.get("b"), "model.custom.b")?;
    let c = complex_list(obj.get("c"), "model.custom.c")?;
    let rows = obj
        .get("d")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::config("model.custom.d", "expected an array of rows"))?;
    let n = rows.len();
    let mut d: Vec<Vec<ComplexExpr>> = Vec::with_capacity(n);
    for (i, r) in rows.iter().enumerate() {
        let key = format!("model.custom.d[{i}]");
        let r = r.as_array().ok_or_else(|| Error::config(&key, "expected a row array"))?;
        if r.len() != n {
            return Err(Error::config(&key, format!("row has {} entries, expected {n}", r.len())));
        }
        d.push(
            r.iter()
                .enumerate()
                .map(|(j, e)| complex_value(e, &format!("{key}[{j}]")))
                .collect::<Result<_>>()?,
        );
    }
    if n == 0 {
        return Err(Error::config("model.custom.d", "D must be at least 1x1"));
    }
    if b.len() != n || c.len() != n {
        return Err(Error::config("model.custom", format!("b and c need {n} entries to match d")));
    }

    let d_diag: Vec<Expr> = (0..n).map(|i| d[i][i].re.clone()).collect();
    let d_lower: Vec<ComplexExpr> = (1..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| d[i][j].clone()).collect();
    let name = obj.get("name").and_then(Value::as_str).unwrap_or("custom").to_string();
    let src = ExprCoefficients::new(p, q, b, c, d_diag, d_lower)?;
    let model = CoefficientModel::new(name, alpha, beta, Arc::new(src)).map_err(|e| match e {
        Error::Model(m) => Error::config("model.custom", m),
        other => other,
    })?;
    check_hermitian(&model, &d)?;
    Ok(model)
}

fn check_hermitian(m: &CoefficientModel, d: &[Vec<ComplexExpr>]) -> Result<()> {
    let n = d.len();
    for t in m.coarse_grid(9) {
        for i in 0..n {
            for j in 0..=i {
                let a = d[i][j].eval(t)?;
                let b = d[j][i].eval(t)?.conj();
                if (a - b).norm() > 1e-12 * (1.0 + a.norm()) {
                    let key = if i == j { format!("model.custom.d[{i}][{i}]") } else { format!("model.custom.d[{j}][{i}]") };
                    let what = if i == j { "diagonal entries must be real" } else { "d must be Hermitian" };
                    return Err(Error::config(key, format!("{what} (mismatch at t = {t})")));
                }
            }
        }
    }
    Ok(())
}
