//! Pointwise discriminant table from raw extrapolated limits.
//!
//! Each row is computed independently of the rational structure fit, so the table
//! cross-checks the singular part computed by [`crate::singular`].

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::asymptotic::Case;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::model::CoefficientModel;
use crate::options::Options;
use crate::par;
use crate::regular::{lambda_beta, regular_part};
use crate::singular::{discriminant_at, probe_case};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub lambda: f64,
    /// Discriminant value, NaN where the limits failed.
    #[serde(with = "crate::interval::ext_real")]
    pub discriminant: f64,
    /// `+1`, `−1`, or `0` when the value is within its error (or failed).
    pub sign: i8,
    #[serde(with = "crate::interval::ext_real")]
    pub err: f64,
}

impl OracleRow {
    pub fn failed(&self) -> bool {
        !self.discriminant.is_finite()
    }
}

/// Points `lo, lo + step, …` up to `hi` (inclusive within rounding).
pub fn grid_points(window: Interval, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::config("step", format!("must be positive and finite, got {step}")));
    }
    if !(window.is_compact() && window.lo <= window.hi) {
        return Err(Error::config("window", "lambda window must be finite and nonempty"));
    }
    let n = ((window.hi - window.lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| window.lo + k as f64 * step).collect())
}

/// Sign table of the discriminant on a uniform grid; the model must be in Case III.
pub fn oracle_grid(m: &CoefficientModel, window: Interval, step: f64, opts: &Options) -> Result<Vec<OracleRow>> {
    opts.validate()?;
    let xs = grid_points(window, step)?;
    let reg = regular_part(m, opts)?;
    let lb = lambda_beta(m, opts)?;
    let mut warnings = Vec::new();
    let (case, _) = probe_case(m, window, &reg.set, &lb, opts, &mut warnings)?;
    if case != Case::III {
        return Err(Error::NotCaseIII(format!("model is in Case {case:?}")));
    }
    Ok(par::map(opts.execution, &xs, |&lambda| match discriminant_at(m, lambda, opts) {
        Ok(d) => {
            let decisive = d.decisive();
            // report the unscaled value with the error carried over to its scale
            let (value, err) = match d.scaled {
                Some(s) if d.value.is_finite() && s != 0.0 => (d.value, d.err * (d.value / s).abs()),
                _ => (decisive, d.err),
            };
            let sign = if decisive > d.err {
                1
            } else if decisive < -d.err {
                -1
            } else {
                0
            };
            OracleRow { lambda, discriminant: value, sign, err }
        }
        Err(_) => OracleRow { lambda, discriminant: f64::NAN, sign: 0, err: f64::NAN },
    }))
}

/// CSV with header `lambda,discriminant,sign,err`; floats use 17 significant digits.
pub fn to_csv(rows: &[OracleRow]) -> String {
    let mut s = String::from("lambda,discriminant,sign,err\n");
    let num = |x: f64| if x.is_finite() { format!("{x:.16e}") } else { "nan".to_string() };
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", num(r.lambda), num(r.discriminant), r.sign, num(r.err));
    }
    s
}
