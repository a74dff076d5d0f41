//! Two-component model on `[0, 1)` with `x = 1 − t`:
//!
//! ```text
//! p = ϑ,  q = φ + ½ (ϑ/x)′ + ¼ ϑ/x²,
//! b = −i (β₁/x, β₂),  c = −b/(2x) + (γ̄, 0),
//! D = [[δ₁₁/x², δ₁₂/x], [δ̄₁₂/x, δ₂₂]].
//! ```
//!
//! The side channel uses `G₁₁ = ϑδ₁₁ − β₁²`, `G₂₂ = ϑδ₂₂ − β₂²`, `G₁₂ = ϑδ₁₂ − β₁β₂`
//! at `x = 0`, together with `Ψ = G₁₁ + x²G₂₂` and `ϑΦ = G₁₁G₂₂ − |G₁₂|²`.

use std::sync::Arc;

use nalgebra::Matrix3;
use serde::Serialize;

use super::{
    add, at_zero, at_zero_complex, div, is_zero, k, mul, neg, reflect, sub, unit_samples, ParamReader,
};
use crate::asymptotic::Case;
use crate::error::{Error, Result};
use crate::expr::{Dual2, Expr};
use crate::interval::{Interval, IntervalSet};
use crate::model::{CoefficientModel, ComplexExpr, Endpoint, ExprCoefficients};

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleBParams {
    pub vartheta: Expr,
    pub delta11: Expr,
    pub delta22: Expr,
    pub beta1: Expr,
    pub beta2: Expr,
    pub gamma: ComplexExpr,
    pub delta12: ComplexExpr,
    pub phi: Expr,
}

impl ExampleBParams {
    /// Every coefficient `≡ 1` except `φ̃ ≡ 0`.
    pub fn unit() -> Self {
        ExampleBParams {
            vartheta: k(1.0),
            delta11: k(1.0),
            delta22: k(1.0),
            beta1: k(1.0),
            beta2: k(1.0),
            gamma: ComplexExpr::real(k(1.0)),
            delta12: ComplexExpr::real(k(1.0)),
            phi: k(0.0),
        }
    }

    pub(super) fn read(r: &mut ParamReader<'_>) -> Result<Self> {
        Ok(ExampleBParams {
            vartheta: r.real_expr("vartheta", 1.0)?,
            delta11: r.real_expr("delta11", 1.0)?,
            delta22: r.real_expr("delta22", 1.0)?,
            beta1: r.real_expr("beta1", 1.0)?,
            beta2: r.real_expr("beta2", 1.0)?,
            gamma: r.complex_expr("gamma", 1.0)?,
            delta12: r.complex_expr("delta12", 1.0)?,
            phi: r.real_expr("phi", 0.0)?,
        })
    }
}

/// How the exceptional point `λ₁,₁` belongs to the essential spectrum in Case III.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Lambda11Rule {
    /// Limit point of the singular set.
    InSingularClosure,
    /// `Δ̃` has a finite limit with eigenvalue `λ₁,₁`.
    InRegular,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleBSide {
    pub case: Case,
    pub vartheta0: f64,
    pub beta1_0: f64,
    pub delta11_0: f64,
    pub phi0: f64,
    pub re_gamma0: f64,
    /// `G₁₁`, `G₂₂`, `Re G₁₂`, `Im G₁₂` with their `x`-derivatives at 0.
    pub g11: Dual2,
    pub g22: Dual2,
    pub g12_re: Dual2,
    pub g12_im: Dual2,
    /// `Ψ` and `Φ` with their `x`-derivatives at 0.
    pub psi_fn: Dual2,
    pub phi_fn: Dual2,
    /// `δ₁₁δ₂₂ − |δ₁₂|²` and `δ₁₁` at 0, for `Ξ(λ) = det − λδ₁₁`.
    pub xi_det: Dual2,
    pub xi_d11: Dual2,
    pub lambda11: f64,
    pub k1: f64,
    pub k2: f64,
    /// Set only in Case III.
    pub lambda11_rule: Option<Lambda11Rule>,
}

impl ExampleBSide {
    fn xi(&self, lambda: f64) -> Dual2 {
        self.xi_det - self.xi_d11 * lambda
    }

    pub fn pi0(&self, lambda: f64) -> f64 {
        (self.phi_fn.value - self.psi_fn.value * lambda) / self.xi(lambda).value
    }

    /// Coefficient of `(t − 1)`; `t`-derivatives are minus `x`-derivatives.
    pub fn pi1(&self, lambda: f64) -> f64 {
        let xi = self.xi(lambda);
        let num = -self.phi_fn.d1 + self.psi_fn.d1 * lambda;
        (num + self.pi0(lambda) * xi.d1) / xi.value
    }

    /// `ϑ²(λ² − K₁λ + K₂) / (β₁²(λ₁,₁ − λ))`, valid in Case III.
    pub fn pi2(&self, lambda: f64) -> f64 {
        let th2 = self.vartheta0 * self.vartheta0;
        th2 * (lambda * lambda - self.k1 * lambda + self.k2)
            / (self.beta1_0 * self.beta1_0 * (self.lambda11 - lambda))
    }

    pub fn r1(&self) -> f64 {
        -self.beta1_0 * self.re_gamma0 / self.delta11_0
    }

    pub fn varkappa0(&self, lambda: f64) -> f64 {
        self.phi0 - lambda - 0.25 * self.pi2(lambda)
    }

    pub fn g_beta(&self) -> f64 {
        (self.vartheta0 / self.beta1_0).powi(2)
    }

    pub fn psi_beta(&self) -> f64 {
        1.0 - 0.25 * self.g_beta()
    }

    /// `−π₂ = f + gλ + σ/(λ₁,₁ − λ)`, returned as `(f, g, σ)`.
    pub fn pi2_fractions(&self) -> (f64, f64, f64) {
        let g = self.g_beta();
        let c0 = self.lambda11 * self.lambda11 - self.k1 * self.lambda11 + self.k2;
        (g * (self.lambda11 - self.k1), g, -g * c0)
    }

    /// `P(λ) = (λ − φ̃(0))(λ² − K₁λ + K₂) − (Re γ̃(0))²(λ − λ₁,₁)`.
    pub fn cubic(&self, lambda: f64) -> f64 {
        let [a, b, c, d] = self.cubic_coeffs();
        ((a * lambda + b) * lambda + c) * lambda + d
    }

    fn cubic_coeffs(&self) -> [f64; 4] {
        let (f0, k1, k2, g2) = (self.phi0, self.k1, self.k2, self.re_gamma0 * self.re_gamma0);
        [1.0, -(k1 + f0), k2 + k1 * f0 - g2, -f0 * k2 + g2 * self.lambda11]
    }

    /// `{λ : (λ₁,₁ − λ) P(λ) ≥ 0}` in Case III, empty otherwise.
    pub fn singular_set(&self) -> IntervalSet {
        if self.case != Case::III {
            return IntervalSet::empty();
        }
        let q = |x: f64| (self.lambda11 - x) * self.cubic(x);
        let mut roots = real_cubic_roots(self.cubic_coeffs());
        roots.push(self.lambda11);
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * (1.0 + b.abs()));
        let mut items: Vec<Interval> = roots.iter().map(|&r| Interval::point(r)).collect();
        let mut edges = vec![f64::NEG_INFINITY];
        edges.extend(&roots);
        edges.push(f64::INFINITY);
        for w in edges.windows(2) {
            let probe = match (w[0].is_finite(), w[1].is_finite()) {
                (true, true) => 0.5 * (w[0] + w[1]),
                (false, true) => w[1] - 1.0 - w[1].abs(),
                (true, false) => w[0] + 1.0 + w[0].abs(),
                (false, false) => 0.0,
            };
            if q(probe) > 0.0 {
                items.push(Interval::new(w[0], w[1]));
            }
        }
        IntervalSet::from_intervals(items, 0.0)
    }
}

/// Real roots of `a x³ + b x² + c x + d` (with `a ≠ 0`), Newton-polished.
fn real_cubic_roots([a, b, c, d]: [f64; 4]) -> Vec<f64> {
    let companion = Matrix3::new(-b / a, -c / a, -d / a, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
    let p = |x: f64| ((a * x + b) * x + c) * x + d;
    let dp = |x: f64| (3.0 * a * x + 2.0 * b) * x + c;
    companion
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-6 * (1.0 + z.re.abs()))
        .map(|z| {
            let mut x = z.re;
            for _ in 0..8 {
                let s = dp(x);
                if s == 0.0 {
                    break;
                }
                let step = p(x) / s;
                x -= step;
                if step.abs() <= 1e-16 * (1.0 + x.abs()) {
                    break;
                }
            }
            x
        })
        .collect()
}

pub fn example_b(p: &ExampleBParams) -> Result<(CoefficientModel, ExampleBSide)> {
    for x in unit_samples() {
        let th = p
            .vartheta
            .eval(x)
            .map_err(|e| Error::Model(format!("vartheta is not defined at x = {x}: {e}")))?;
        if th == 0.0 {
            return Err(Error::Model(format!("vartheta must not vanish on [0, 1]; vartheta({x}) = 0")));
        }
    }
    let th = at_zero(&p.vartheta, "vartheta")?;
    let d11 = at_zero(&p.delta11, "delta11")?;
    let d22 = at_zero(&p.delta22, "delta22")?;
    let b1 = at_zero(&p.beta1, "beta1")?;
    let b2 = at_zero(&p.beta2, "beta2")?;
    let (d12r, d12i) = at_zero_complex(&p.delta12, "delta12")?;
    let (gr, _) = at_zero_complex(&p.gamma, "gamma")?;
    let phi0 = p
        .phi
        .eval(0.0)
        .map_err(|e| Error::Model(format!("phi is not defined at x = 0: {e}")))?;
    if is_zero(d11.value, 0.0) {
        return Err(Error::Model("delta11(0) must be nonzero".into()));
    }

    let g11 = th * d11 - b1 * b1;
    let g22 = th * d22 - b2 * b2;
    let g12_re = th * d12r - b1 * b2;
    let g12_im = th * d12i;
    let scale = (th.value * d11.value).abs() + b1.value * b1.value + (th.value * d12r.value).abs();
    let g12_abs = g12_re.value.hypot(g12_im.value);
    let case = if !is_zero(g11.value, scale) || !is_zero(g12_abs, scale) {
        Case::I
    } else if !is_zero(g11.d1, scale) {
        Case::II
    } else {
        Case::III
    };

    let x2 = Dual2::new(0.0, 0.0, 2.0);
    let psi_fn = g11 + x2 * g22;
    let phi_fn = (g11 * g22 - (g12_re * g12_re + g12_im * g12_im)) / th;
    let xi_det = d11 * d22 - (d12r * d12r + d12i * d12i);
    let lambda11 = d22.value - (d12r.value.powi(2) + d12i.value.powi(2)) / d11.value;
    let t0 = th.value;
    let k1 = g11.d2 / (2.0 * t0) + g22.value / t0;
    let k2 = g11.d2 * g22.value / (2.0 * t0 * t0) - (g12_re.d1.powi(2) + g12_im.d1.powi(2)) / (t0 * t0);
    let lambda11_rule = (case == Case::III).then(|| {
        let c0 = lambda11 * lambda11 - k1 * lambda11 + k2;
        let s = 1.0 + lambda11.abs() + phi0.abs();
        if is_zero(lambda11 - phi0, s) || !is_zero(c0, s * s + k1.abs() * s + k2.abs()) {
            Lambda11Rule::InSingularClosure
        } else {
            Lambda11Rule::InRegular
        }
    });

    let x = super::one_minus_t();
    let xx = Expr::pow(x.clone(), 2.0);
    let th_t = reflect(&p.vartheta);
    let q = add(
        reflect(&p.phi),
        add(
            mul(k(0.5), div(th_t.clone(), x.clone()).diff()),
            mul(k(0.25), div(th_t.clone(), xx.clone())),
        ),
    );
    let b1_t = reflect(&p.beta1);
    let b2_t = reflect(&p.beta2);
    let b = vec![
        ComplexExpr { re: k(0.0), im: neg(div(b1_t.clone(), x.clone())) },
        ComplexExpr { re: k(0.0), im: neg(b2_t.clone()) },
    ];
    let c = vec![
        ComplexExpr {
            re: reflect(&p.gamma.re),
            im: sub(div(b1_t, mul(k(2.0), xx.clone())), reflect(&p.gamma.im)),
        },
        ComplexExpr { re: k(0.0), im: div(b2_t, mul(k(2.0), x.clone())) },
    ];
    let d_diag = vec![div(reflect(&p.delta11), xx), reflect(&p.delta22)];
    let d_lower = vec![ComplexExpr {
        re: div(reflect(&p.delta12.re), x.clone()),
        im: neg(div(reflect(&p.delta12.im), x)),
    }];
    let src = ExprCoefficients::new(th_t, q, b, c, d_diag, d_lower)?;
    let model = CoefficientModel::new("example_b", 0.0, Endpoint::Finite(1.0), Arc::new(src))?;
    let side = ExampleBSide {
        case,
        vartheta0: t0,
        beta1_0: b1.value,
        delta11_0: d11.value,
        phi0,
        re_gamma0: gr.value,
        g11,
        g22,
        g12_re,
        g12_im,
        psi_fn,
        phi_fn,
        xi_det,
        xi_d11: d11,
        lambda11,
        k1,
        k2,
        lambda11_rule,
    };
    Ok((model, side))
}
