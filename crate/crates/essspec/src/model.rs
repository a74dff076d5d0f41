//! Coefficient models: `p, q` real, `b, c` complex vectors, `D` Hermitian, on `[alpha, beta)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, Dual2, Expr};
use crate::linalg::{hermitize_from_lower, CMat, CVec, MatJet, VecJet, C64};

/// Right endpoint of the interval; `Infinite` is written `"inf"` in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Finite(f64),
    Infinite,
}

impl Endpoint {
    pub fn is_finite(self) -> bool {
        matches!(self, Endpoint::Finite(_))
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Endpoint::Finite(b) => b,
            Endpoint::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Endpoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Endpoint::Finite(b) => s.serialize_f64(*b),
            Endpoint::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Endpoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(b) => Ok(Endpoint::Finite(b)),
            Raw::Str(s) if s == "inf" || s == "+inf" => Ok(Endpoint::Infinite),
            Raw::Str(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got \"{s}\""
            ))),
        }
    }
}

/// All coefficients at one `t`.
///
/// `c` carries value and first derivative only; its `d2` is not consumed anywhere.
#[derive(Debug, Clone)]
pub struct CoeffPoint {
    pub p: Dual2,
    pub q: f64,
    pub b: VecJet,
    pub c: VecJet,
    pub d: MatJet,
}

/// A source of coefficient values. Implementations must return an exactly Hermitian `D`.
pub trait CoefficientSource: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64) -> Result<CoeffPoint>;
}

#[derive(Debug, Clone)]
pub struct CoefficientModel {
    pub name: String,
    pub alpha: f64,
    pub beta: Endpoint,
    source: Arc<dyn CoefficientSource>,
}

impl CoefficientModel {
    pub fn new(
        name: impl Into<String>,
        alpha: f64,
        beta: Endpoint,
        source: Arc<dyn CoefficientSource>,
    ) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Model("alpha must be finite".into()));
        }
        if let Endpoint::Finite(b) = beta {
            if !(b > alpha) {
                return Err(Error::Model(format!("need alpha < beta, got [{alpha}, {b})")));
            }
        }
        if source.dim() == 0 {
            return Err(Error::Model("dimension n must be positive".into()));
        }
        Ok(CoefficientModel {
            name: name.into(),
            alpha,
            beta,
            source,
        })
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn eval(&self, t: f64) -> Result<CoeffPoint> {
        self.source.eval(t)
    }

    /// Length used to scale tails: `beta - alpha`, or 1 when `beta` is infinite.
    pub fn span(&self) -> f64 {
        match self.beta {
            Endpoint::Finite(b) => b - self.alpha,
            Endpoint::Infinite => 1.0,
        }
    }

    /// Maps `u` in `[0, 1)` onto `[alpha, beta)`.
    pub fn from_unit(&self, u: f64) -> f64 {
        match self.beta {
            Endpoint::Finite(b) => self.alpha + u * (b - self.alpha),
            Endpoint::Infinite => self.alpha + u / (1.0 - u),
        }
    }

    /// Coarse sample points used for validity checks.
    pub fn coarse_grid(&self, n: usize) -> Vec<f64> {
        (0..n).map(|k| self.from_unit(k as f64 / n as f64)).collect()
    }

    /// Checks `p > 0` and `D = D*` on a coarse grid.
    pub fn validate(&self) -> Result<()> {
        for t in self.coarse_grid(32) {
            let pt = self.eval(t).map_err(|e| match e {
                Error::Domain(m) => Error::Model(format!("coefficient not defined on [alpha, beta): {m}")),
                e => e,
            })?;
            if !(pt.p.value > 0.0) {
                return Err(Error::Model(format!("p(t) = {} is not positive at t = {t}", pt.p.value)));
            }
            let d = &pt.d.v;
            if (d - d.adjoint()).iter().any(|z| z.norm() != 0.0) {
                return Err(Error::Model(format!("D(t) is not Hermitian at t = {t}")));
            }
        }
        Ok(())
    }
}

/// A complex entry given as real and imaginary expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexExpr {
    pub re: Expr,
    pub im: Expr,
}

impl ComplexExpr {
    pub fn real(re: Expr) -> Self {
        ComplexExpr { re, im: Expr::Const(0.0) }
    }

    pub fn parse(re: &str, im: &str) -> Result<Self> {
        Ok(ComplexExpr {
            re: parse_expr(re)?,
            im: parse_expr(im)?,
        })
    }

    pub fn eval2(&self, t: f64) -> Result<(Dual2, Dual2)> {
        Ok((self.re.eval2(t)?, self.im.eval2(t)?))
    }

    pub fn eval(&self, t: f64) -> Result<C64> {
        Ok(C64::new(self.re.eval(t)?, self.im.eval(t)?))
    }
}

/// Coefficients given by expressions. `D` is stored as a real diagonal plus the strictly
/// lower triangle in row order `(1,0), (2,0), (2,1), ...`, so it is Hermitian by construction.
#[derive(Debug, Clone)]
pub struct ExprCoefficients {
    pub p: Expr,
    pub q: Expr,
    pub b: Vec<ComplexExpr>,
    pub c: Vec<ComplexExpr>,
    pub d_diag: Vec<Expr>,
    pub d_lower: Vec<ComplexExpr>,
}

impl ExprCoefficients {
    pub fn new(
        p: Expr,
        q: Expr,
        b: Vec<ComplexExpr>,
        c: Vec<ComplexExpr>,
        d_diag: Vec<Expr>,
        d_lower: Vec<ComplexExpr>,
    ) -> Result<Self> {
        let n = d_diag.len();
        if b.len() != n || c.len() != n || d_lower.len() != n * n.saturating_sub(1) / 2 {
            return Err(Error::Model(format!(
                "dimension mismatch: diag(D) has {n} entries, b {}, c {}, lower(D) {} (expected {})",
                b.len(),
                c.len(),
                d_lower.len(),
                n * n.saturating_sub(1) / 2
            )));
        }
        Ok(ExprCoefficients { p, q, b, c, d_diag, d_lower })
    }
}

fn jet_entry(z: (Dual2, Dual2)) -> [C64; 3] {
    let (re, im) = z;
    [
        C64::new(re.value, im.value),
        C64::new(re.d1, im.d1),
        C64::new(re.d2, im.d2),
    ]
}

fn vec_jet(entries: &[ComplexExpr], t: f64) -> Result<VecJet> {
    let mut out = VecJet::zeros(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let [v, d1, d2] = jet_entry(e.eval2(t)?);
        out.v[i] = v;
        out.d1[i] = d1;
        out.d2[i] = d2;
    }
    Ok(out)
}

impl CoefficientSource for ExprCoefficients {
    fn dim(&self) -> usize {
        self.d_diag.len()
    }

    fn eval(&self, t: f64) -> Result<CoeffPoint> {
        let n = self.dim();
        let mut d = MatJet::zeros(n);
        for (i, e) in self.d_diag.iter().enumerate() {
            let v = e.eval2(t)?;
            d.v[(i, i)] = C64::new(v.value, 0.0);
            d.d1[(i, i)] = C64::new(v.d1, 0.0);
            d.d2[(i, i)] = C64::new(v.d2, 0.0);
        }
        let mut k = 0;
        for i in 1..n {
            for j in 0..i {
                let [v, d1, d2] = jet_entry(self.d_lower[k].eval2(t)?);
                d.v[(i, j)] = v;
                d.d1[(i, j)] = d1;
                d.d2[(i, j)] = d2;
                k += 1;
            }
        }
        hermitize_from_lower(&mut d.v);
        hermitize_from_lower(&mut d.d1);
        hermitize_from_lower(&mut d.d2);
        Ok(CoeffPoint {
            p: self.p.eval2(t)?,
            q: self.q.eval(t)?,
            b: vec_jet(&self.b, t)?,
            c: vec_jet(&self.c, t)?,
            d,
        })
    }
}

/// `D - b b*/p` at one point, Hermitian by construction.
pub fn delta_from_point(pt: &CoeffPoint) -> CMat {
    let n = pt.b.v.len();
    let b = &pt.b.v;
    let mut m = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            m[(i, j)] = pt.d.v[(i, j)] - b[i] * b[j].conj() / pt.p.value;
        }
    }
    hermitize_from_lower(&mut m);
    m
}

/// Complex vector helper used by built-in models.
pub fn cvec(v: &[C64]) -> CVec {
    CVec::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(p: &str, q: &str, b: (&str, &str), c: (&str, &str), d: &str) -> ExprCoefficients {
        ExprCoefficients::new(
            parse_expr(p).unwrap(),
            parse_expr(q).unwrap(),
            vec![ComplexExpr::parse(b.0, b.1).unwrap()],
            vec![ComplexExpr::parse(c.0, c.1).unwrap()],
            vec![parse_expr(d).unwrap()],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn custom_scalar_model_is_valid() {
        let src = scalar("5", "0", ("1", "0"), ("0", "0"), "1");
        let m = CoefficientModel::new("custom", 0.0, Endpoint::Finite(1.0), Arc::new(src)).unwrap();
        m.validate().unwrap();
        assert_eq!(m.dim(), 1);
    }

    #[test]
    fn nonpositive_p_is_rejected() {
        let src = scalar("t - 0.5", "0", ("1", "0"), ("0", "0"), "1");
        let m = CoefficientModel::new("bad", 0.0, Endpoint::Finite(1.0), Arc::new(src)).unwrap();
        assert!(matches!(m.validate(), Err(Error::Model(_))));
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let r = ExprCoefficients::new(
            Expr::Const(1.0),
            Expr::Const(0.0),
            vec![ComplexExpr::real(Expr::Const(1.0))],
            vec![],
            vec![Expr::Const(1.0)],
            vec![],
        );
        assert!(matches!(r, Err(Error::Model(_))));
    }

    #[test]
    fn delta_matrix_example() {
        // D = diag(1,3), b = (1,2), p = 5 -> [[0.8, -0.4], [-0.4, 2.2]]
        let src = ExprCoefficients::new(
            Expr::Const(5.0),
            Expr::Const(0.0),
            vec![ComplexExpr::real(Expr::Const(1.0)), ComplexExpr::real(Expr::Const(2.0))],
            vec![ComplexExpr::real(Expr::Const(0.0)); 2],
            vec![Expr::Const(1.0), Expr::Const(3.0)],
            vec![ComplexExpr::real(Expr::Const(0.0))],
        )
        .unwrap();
        let delta = delta_from_point(&src.eval(0.2).unwrap());
        let want = [[0.8, -0.4], [-0.4, 2.2]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((delta[(i, j)] - C64::new(want[i][j], 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn endpoint_serde() {
        let e: Endpoint = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(e, Endpoint::Infinite);
        let e: Endpoint = serde_json::from_str("2.5").unwrap();
        assert_eq!(e, Endpoint::Finite(2.5));
        assert!(serde_json::from_str::<Endpoint>("\"nope\"").is_err());
    }
}
