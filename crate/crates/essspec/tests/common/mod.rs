//! Shared helpers for the integration tests.
#![allow(dead_code)]

pub mod identity;

use essspec::config::{custom_model, AnalysisConfig};
use essspec::model::CoefficientModel;
use rand::Rng;
use serde_json::{json, Value};

/// `a + b*t` as an expression string.
fn affine<R: Rng>(rng: &mut R, a: (f64, f64), b: (f64, f64)) -> String {
    format!("({:.6}) + ({:.6})*t", rng.gen_range(a.0..a.1), rng.gen_range(b.0..b.1))
}

/// Random smooth model on `[0, 1)` with dimension `n`: polynomial coefficients, Hermitian `D`.
pub fn random_model<R: Rng>(rng: &mut R, n: usize) -> CoefficientModel {
    let p = format!("({:.6}) + ({:.6})*t^2", rng.gen_range(0.5..2.0), rng.gen_range(0.0..1.0));
    let q = affine(rng, (-2.0, 2.0), (-1.0, 1.0));
    let vec = |rng: &mut R| -> Vec<Value> {
        (0..n)
            .map(|_| json!([affine(rng, (-1.5, 1.5), (-1.0, 1.0)), affine(rng, (-1.0, 1.0), (-0.5, 0.5))]))
            .collect()
    };
    let b = vec(rng);
    let c = vec(rng);
    let mut d = vec![vec![Value::Null; n]; n];
    for i in 0..n {
        d[i][i] = json!(affine(rng, (-3.0, 3.0), (-1.0, 1.0)));
        for j in 0..i {
            let re = affine(rng, (-1.0, 1.0), (-0.5, 0.5));
            let im = affine(rng, (-1.0, 1.0), (-0.5, 0.5));
            d[i][j] = json!([re.clone(), im.clone()]);
            d[j][i] = json!([re, format!("-({im})")]);
        }
    }
    let v = json!({ "alpha": 0.0, "beta": 1.0, "p": p, "q": q, "b": b, "c": c, "d": d, "name": "random" });
    custom_model(&v).expect("random model is valid")
}

pub fn builtin_config(name: &str, params: Value) -> AnalysisConfig {
    let v = json!({ "schema_version": 1, "model": { "builtin": name, "params": params } });
    AnalysisConfig::from_value(&v).expect("valid built-in config")
}

pub fn stellar_config() -> AnalysisConfig {
    builtin_config(
        "stellar",
        json!({ "n_poly": 3, "alpha_n": 1, "gamma1": 5.0 / 3.0, "p_c": 1, "rho_c": 1, "l": 2 }),
    )
}

pub fn example_a_unit() -> AnalysisConfig {
    builtin_config("example_a", json!({ "rho": 1, "m": 1, "psi": 1, "phi": 5 }))
}

pub fn example_a_case_one() -> AnalysisConfig {
    builtin_config("example_a", json!({ "rho": 2, "m": 1, "psi": 1 }))
}

pub fn example_b_unit() -> AnalysisConfig {
    builtin_config("example_b", json!({ "phi": 0 }))
}

/// Model with `b ≡ 0` direction removed: `p = (1 − t)²`, bounded `D`, so `π = p`.
pub fn b_zero_config() -> AnalysisConfig {
    let v = json!({
        "schema_version": 1,
        "model": { "custom": {
            "alpha": 0, "beta": 1, "p": "(1-t)^2", "q": "0",
            "b": [0], "c": [0], "d": [["1"]], "name": "b_zero"
        }},
        "window": { "lambda_min": -5, "lambda_max": 5 }
    });
    AnalysisConfig::from_value(&v).expect("valid custom config")
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Oracle rows with a decided sign, farther than `root_tol` from every endpoint, whose sign
/// disagrees with membership in `set`. Returns `(disagreements, checked)`.
pub fn oracle_disagreements(
    rows: &[essspec::oracle::OracleRow],
    set: &essspec::interval::IntervalSet,
    root_tol: f64,
) -> (Vec<f64>, usize) {
    let mut bad = Vec::new();
    let mut checked = 0;
    for r in rows {
        if r.failed() || r.sign == 0 || set.distance_to_endpoint(r.lambda) < root_tol {
            continue;
        }
        checked += 1;
        if (r.sign > 0) != set.contains(r.lambda, 0.0) {
            bad.push(r.lambda);
        }
    }
    (bad, checked)
}
