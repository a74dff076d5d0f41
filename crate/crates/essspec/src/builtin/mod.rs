//! Built-in models with closed-form side channels used for cross-validation.
//!
//! Examples A and B are posed on `x ∈ (0, 1]` with the singular point at `x = 0`;
//! their parameter expressions are functions of `x`, written with the variable `t`
//! of the expression grammar. The models themselves live on `t ∈ [0, 1)` with
//! `x = 1 − t`.

mod example_a;
mod example_b;
pub mod lane_emden;
mod stellar;

use std::collections::BTreeSet;

use serde::Serialize;
use serde_json::{Map, Value};

pub use example_a::{example_a, ExampleAParams, ExampleASide};
pub use example_b::{example_b, ExampleBParams, ExampleBSide, Lambda11Rule};
pub use lane_emden::{lane_emden, LaneEmdenOptions, LaneEmdenSolution};
pub use stellar::{stellar_model, StellarParams, StellarSide};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, BinOp, Dual2, Expr};
use crate::model::{CoefficientModel, ComplexExpr};

/// Names accepted by [`builtin`].
pub const BUILTIN_NAMES: [&str; 3] = ["example_a", "example_b", "stellar"];

/// Relative tolerance for the exact-zero tests in the analytic case predicates.
pub const PREDICATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum BuiltinSide {
    ExampleA(ExampleASide),
    ExampleB(ExampleBSide),
    Stellar(StellarSide),
}

#[derive(Debug, Clone)]
pub struct BuiltinModel {
    pub model: CoefficientModel,
    pub side: BuiltinSide,
}

/// Builds a built-in model from a JSON parameter object; missing keys take the unit defaults.
pub fn builtin(name: &str, params: &Map<String, Value>) -> Result<BuiltinModel> {
    let mut r = ParamReader::new(params);
    let out = match name {
        "example_a" => {
            let p = ExampleAParams::read(&mut r)?;
            r.finish()?;
            let (model, side) = example_a(&p)?;
            BuiltinModel { model, side: BuiltinSide::ExampleA(side) }
        }
        "example_b" => {
            let p = ExampleBParams::read(&mut r)?;
            r.finish()?;
            let (model, side) = example_b(&p)?;
            BuiltinModel { model, side: BuiltinSide::ExampleB(side) }
        }
        "stellar" => {
            let p = StellarParams::read(&mut r)?;
            r.finish()?;
            let (model, side) = stellar_model(&p, &LaneEmdenOptions::default())?;
            BuiltinModel { model, side: BuiltinSide::Stellar(side) }
        }
        other => {
            return Err(Error::config(
                "model.builtin",
                format!("unknown built-in `{other}` (expected one of {})", BUILTIN_NAMES.join(", ")),
            ))
        }
    };
    Ok(out)
}

/// Reads typed parameters out of a JSON object and rejects unknown keys.
pub struct ParamReader<'a> {
    map: &'a Map<String, Value>,
    used: BTreeSet<String>,
}

impl<'a> ParamReader<'a> {
    pub fn new(map: &'a Map<String, Value>) -> Self {
        ParamReader { map, used: BTreeSet::new() }
    }

    fn key(k: &str) -> String {
        format!("model.params.{k}")
    }

    fn take(&mut self, k: &str) -> Option<&'a Value> {
        self.used.insert(k.to_string());
        self.map.get(k)
    }

    pub fn real_expr(&mut self, k: &str, default: f64) -> Result<Expr> {
        match self.take(k) {
            None => Ok(Expr::Const(default)),
            Some(v) => value_expr(v).map_err(|m| Error::config(Self::key(k), m)),
        }
    }

    /// Complex parameters accept a real form (number or string), `[re, im]`, or `{"re":…, "im":…}`.
    pub fn complex_expr(&mut self, k: &str, default: f64) -> Result<ComplexExpr> {
        let v = match self.take(k) {
            None => return Ok(ComplexExpr::real(Expr::Const(default))),
            Some(v) => v,
        };
        let pair = |re: &Value, im: &Value| -> std::result::Result<ComplexExpr, String> {
            Ok(ComplexExpr { re: value_expr(re)?, im: value_expr(im)? })
        };
        let out = match v {
            Value::Array(a) if a.len() == 2 => pair(&a[0], &a[1]),
            Value::Object(o) => {
                let zero = Value::from(0.0);
                if o.keys().any(|k| k != "re" && k != "im") {
                    Err("complex objects take only `re` and `im`".to_string())
                } else {
                    pair(o.get("re").unwrap_or(&zero), o.get("im").unwrap_or(&zero))
                }
            }
            other => value_expr(other).map(ComplexExpr::real),
        };
        out.map_err(|m| Error::config(Self::key(k), m))
    }

    pub fn number(&mut self, k: &str, default: f64) -> Result<f64> {
        match self.take(k) {
            None => Ok(default),
            Some(Value::Number(x)) => x
                .as_f64()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::config(Self::key(k), "expected a finite number")),
            Some(_) => Err(Error::config(Self::key(k), "expected a number")),
        }
    }

    pub fn finish(self) -> Result<()> {
        match self.map.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(Error::config(Self::key(k), "unknown parameter")),
            None => Ok(()),
        }
    }
}

fn value_expr(v: &Value) -> std::result::Result<Expr, String> {
    match v {
        Value::Number(x) => x
            .as_f64()
            .filter(|x| x.is_finite())
            .map(Expr::Const)
            .ok_or_else(|| "expected a finite number".to_string()),
        Value::String(s) => parse_expr(s).map_err(|e| e.to_string()),
        _ => Err("expected a number or an expression string".to_string()),
    }
}

// Expression builders for the coefficient transforms.

fn k(c: f64) -> Expr {
    Expr::Const(c)
}

fn add(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::Add, a, b)
}

fn sub(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::Sub, a, b)
}

fn mul(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::Mul, a, b)
}

fn div(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::Div, a, b)
}

fn neg(a: Expr) -> Expr {
    Expr::Neg(Box::new(a))
}

/// `x = 1 − t`.
fn one_minus_t() -> Expr {
    sub(k(1.0), Expr::Var)
}

/// `f(1 − t)` for an expression `f(x)`.
fn reflect(e: &Expr) -> Expr {
    e.substitute(&one_minus_t())
}

/// Value and first two `x`-derivatives at `x = 0`.
fn at_zero(e: &Expr, what: &str) -> Result<Dual2> {
    e.eval2(0.0)
        .map_err(|err| Error::Model(format!("{what} is not defined at x = 0: {err}")))
}

fn at_zero_complex(e: &ComplexExpr, what: &str) -> Result<(Dual2, Dual2)> {
    Ok((at_zero(&e.re, what)?, at_zero(&e.im, what)?))
}

/// True when `v` vanishes relative to `scale`.
fn is_zero(v: f64, scale: f64) -> bool {
    v.abs() <= PREDICATE_TOL * (1.0 + scale.abs())
}

/// Samples `x` in `[0, 1]` for invariant checks.
fn unit_samples() -> impl Iterator<Item = f64> {
    (0..=64).map(|i| i as f64 / 64.0)
}
