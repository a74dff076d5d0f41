//! Scalar model `p = ρ, q = φ, b = ψ̄/(1−t), c = 0, D = m/(1−t)²` with
//! `ρ = ρ̃(1−t)` and so on.
//!
//! With `G = ρ̃m̃ − |ψ̃|²` the Schur coefficient is `π = (G(x) − λρ̃x²)/(m̃(x) − λx²)`,
//! `x = 1 − t`, which gives every boundary quantity in closed form.

use std::sync::Arc;

use serde::Serialize;

use super::{at_zero, at_zero_complex, div, is_zero, k, neg, reflect, unit_samples, ParamReader};
use crate::asymptotic::Case;
use crate::error::{Error, Result};
use crate::expr::{Dual2, Expr};
use crate::interval::{Interval, IntervalSet};
use crate::model::{CoefficientModel, ComplexExpr, Endpoint, ExprCoefficients};

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleAParams {
    pub rho: Expr,
    pub m: Expr,
    pub psi: ComplexExpr,
    pub phi: Expr,
}

impl ExampleAParams {
    /// `ρ̃ = m̃ = ψ̃ = 1, φ̃ = 5`.
    pub fn unit() -> Self {
        ExampleAParams {
            rho: k(1.0),
            m: k(1.0),
            psi: ComplexExpr::real(k(1.0)),
            phi: k(5.0),
        }
    }

    pub(super) fn read(r: &mut ParamReader<'_>) -> Result<Self> {
        Ok(ExampleAParams {
            rho: r.real_expr("rho", 1.0)?,
            m: r.real_expr("m", 1.0)?,
            psi: r.complex_expr("psi", 1.0)?,
            phi: r.real_expr("phi", 5.0)?,
        })
    }
}

/// Closed-form boundary data.
#[derive(Debug, Clone, Serialize)]
pub struct ExampleASide {
    pub case: Case,
    /// `G` and its first two `x`-derivatives at `x = 0`.
    pub g: Dual2,
    pub rho0: f64,
    pub m0: f64,
    pub phi0: f64,
    pub pi0: f64,
    /// Coefficient of `(t − 1)`.
    pub pi1: f64,
    /// `lim Δ̃(x)` as `x → 0`, finite only in Case III.
    pub delta0: Option<f64>,
    /// Endpoints of the singular part in Case III.
    pub singular: Option<(f64, f64)>,
}

impl ExampleASide {
    /// `π₂(λ) = (G″(0)/2 − λρ̃(0))/m̃(0)` in Case III.
    pub fn pi2(&self, lambda: f64) -> Option<f64> {
        (self.case == Case::III).then(|| (0.5 * self.g.d2 - lambda * self.rho0) / self.m0)
    }

    pub fn r1(&self) -> f64 {
        0.0
    }

    pub fn varkappa0(&self, lambda: f64) -> f64 {
        self.phi0 - lambda
    }

    /// `−π₂ = f + gλ`, `−ϰ₀ = φ + ψλ`, `h = 0`, returned as `(f, g, φ, ψ, h)`.
    pub fn structure(&self) -> Option<(f64, f64, f64, f64, f64)> {
        (self.case == Case::III).then(|| {
            let c = self.rho0 / self.m0;
            (-0.5 * self.g.d2 / self.m0, c, -self.phi0, 1.0, 0.0)
        })
    }

    pub fn singular_set(&self) -> IntervalSet {
        match self.singular {
            Some((lo, hi)) => IntervalSet::from_intervals(vec![Interval::new(lo, hi)], 0.0),
            None => IntervalSet::empty(),
        }
    }
}

pub fn example_a(p: &ExampleAParams) -> Result<(CoefficientModel, ExampleASide)> {
    for x in unit_samples() {
        let rho = p
            .rho
            .eval(x)
            .map_err(|e| Error::Model(format!("rho is not defined at x = {x}: {e}")))?;
        if !(rho > 0.0) {
            return Err(Error::Model(format!("rho must be positive on [0, 1]; rho({x}) = {rho}")));
        }
    }
    let rho = at_zero(&p.rho, "rho")?;
    let m = at_zero(&p.m, "m")?;
    let (pr, pi) = at_zero_complex(&p.psi, "psi")?;
    let phi0 = p
        .phi
        .eval(0.0)
        .map_err(|e| Error::Model(format!("phi is not defined at x = 0: {e}")))?;
    if is_zero(m.value, 0.0) {
        return Err(Error::Model("m(0) must be nonzero".into()));
    }

    let g = rho * m - (pr * pr + pi * pi);
    let scale = (rho.value * m.value).abs() + pr.value * pr.value + pi.value * pi.value;
    let case = if !is_zero(g.value, scale) {
        Case::I
    } else if !is_zero(g.d1, scale) {
        Case::II
    } else {
        Case::III
    };
    let pi0 = g.value / m.value;
    let pi1 = (m.d1 * g.value / m.value - g.d1) / m.value;
    let (delta0, singular) = if case == Case::III {
        let d0 = 0.5 * g.d2 / rho.value;
        let other = (4.0 * m.value * phi0 + rho.value * d0) / (4.0 * m.value + rho.value);
        (Some(d0), Some((d0.min(other), d0.max(other))))
    } else {
        (None, None)
    };

    let x = super::one_minus_t();
    let src = ExprCoefficients::new(
        reflect(&p.rho),
        reflect(&p.phi),
        vec![ComplexExpr {
            re: div(reflect(&p.psi.re), x.clone()),
            im: div(neg(reflect(&p.psi.im)), x.clone()),
        }],
        vec![ComplexExpr::real(k(0.0))],
        vec![div(reflect(&p.m), Expr::pow(x, 2.0))],
        vec![],
    )?;
    let model = CoefficientModel::new("example_a", 0.0, Endpoint::Finite(1.0), Arc::new(src))?;
    let side = ExampleASide {
        case,
        g,
        rho0: rho.value,
        m0: m.value,
        phi0,
        pi0,
        pi1,
        delta0,
        singular,
    };
    Ok((model, side))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_expr;

    fn params(rho: &str, m: &str, psi: &str, phi: &str) -> ExampleAParams {
        ExampleAParams {
            rho: parse_expr(rho).unwrap(),
            m: parse_expr(m).unwrap(),
            psi: ComplexExpr::parse(psi, "0").unwrap(),
            phi: parse_expr(phi).unwrap(),
        }
    }

    #[test]
    fn unit_case_three_closed_form() {
        let (m, side) = example_a(&ExampleAParams::unit()).unwrap();
        assert_eq!(m.dim(), 1);
        assert_eq!(side.case, Case::III);
        assert_eq!(side.singular, Some((0.0, 4.0)));
        assert_eq!(side.pi2(2.0), Some(-2.0));
        assert_eq!(side.structure(), Some((0.0, 1.0, -5.0, 1.0, 0.0)));
    }

    #[test]
    fn case_predicates() {
        let (_, s) = example_a(&params("2", "1", "1", "5")).unwrap();
        assert_eq!(s.case, Case::I);
        assert_eq!(s.pi0, 1.0);
        let (_, s) = example_a(&params("1", "1+t", "1", "5")).unwrap();
        assert_eq!(s.case, Case::II);
        assert_eq!(s.pi1, -1.0);
    }

    #[test]
    fn model_coefficients() {
        let (m, _) = example_a(&params("2", "1+t", "1+t", "5")).unwrap();
        let pt = m.eval(0.5).unwrap();
        assert_eq!(pt.p.value, 2.0);
        assert!((pt.b.v[0].re - 3.0).abs() < 1e-15);
        assert!((pt.d.v[(0, 0)].re - 6.0).abs() < 1e-15);
    }

    #[test]
    fn invariants_rejected() {
        assert!(matches!(example_a(&params("t-0.5", "1", "1", "5")), Err(Error::Model(_))));
        assert!(matches!(example_a(&params("1", "t", "1", "5")), Err(Error::Model(_))));
    }
}
