//! Polytropic stellar model on `[1, R)`: `p = p₁`, `q = q₁`, `b = −p₂`, `c = q₂`, `D = p₃`,
//! with pressure `p_c θⁿ⁺¹`, density `ϱ_c θⁿ` and constant `Γ₁`.
//!
//! Writing `K = Γ₁p_c/ϱ_c`:
//!
//! ```text
//! p₁ = Kθ,  p₂ = c_l Kθ/t,  p₃ = c_l² Kθ/t²,
//! q₂ = c_l K ((n/2 − (n+1)/Γ₁) θ′ − θ/t) / t,
//! q₁ = (4 − 3Γ₁)(p_c/ϱ_c)(n+1) θ′/t + K (2θ/t² + (2n+2) θ′/t + (n²/4) θ′²/θ + (n/2) θ″).
//! ```

use std::sync::Arc;

use serde::Serialize;

use super::lane_emden::{lane_emden, LaneEmdenOptions, LaneEmdenSolution};
use super::ParamReader;
use crate::asymptotic::Case;
use crate::error::{Error, Result};
use crate::expr::Dual2;
use crate::linalg::{MatJet, VecJet, C64};
use crate::model::{CoeffPoint, CoefficientModel, CoefficientSource, Endpoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StellarParams {
    pub n_poly: f64,
    pub alpha_n: f64,
    pub gamma1: f64,
    pub p_c: f64,
    pub rho_c: f64,
    pub l: u32,
}

impl Default for StellarParams {
    fn default() -> Self {
        StellarParams { n_poly: 3.0, alpha_n: 1.0, gamma1: 5.0 / 3.0, p_c: 1.0, rho_c: 1.0, l: 2 }
    }
}

impl StellarParams {
    pub(super) fn read(r: &mut ParamReader<'_>) -> Result<Self> {
        let d = StellarParams::default();
        let l = r.number("l", d.l as f64)?;
        if !(l >= 1.0 && l.fract() == 0.0 && l <= u32::MAX as f64) {
            return Err(Error::config("model.params.l", "expected a positive integer"));
        }
        Ok(StellarParams {
            n_poly: r.number("n_poly", d.n_poly)?,
            alpha_n: r.number("alpha_n", d.alpha_n)?,
            gamma1: r.number("gamma1", d.gamma1)?,
            p_c: r.number("p_c", d.p_c)?,
            rho_c: r.number("rho_c", d.rho_c)?,
            l: l as u32,
        })
    }

    pub fn c_l(&self) -> f64 {
        let l = self.l as f64;
        (l * (l + 1.0)).sqrt()
    }

    fn check(&self) -> Result<()> {
        // n = 0 is admitted for solver testing only
        if !(self.n_poly > 0.0 && self.n_poly < 5.0) {
            return Err(Error::Model(format!("n_poly must lie in (0, 5), got {}", self.n_poly)));
        }
        for (name, v) in [
            ("alpha_n", self.alpha_n),
            ("gamma1", self.gamma1),
            ("p_c", self.p_c),
            ("rho_c", self.rho_c),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Model(format!("{name} must be positive, got {v}")));
            }
        }
        if self.l == 0 {
            return Err(Error::Model("l must be a positive integer".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StellarSide {
    pub radius: f64,
    pub theta_d1_at_radius: f64,
    /// `Γ₁p_c/ϱ_c`.
    pub k: f64,
    pub case: Case,
    /// `π̃₁ = K θ′(R)`, independent of `λ ≠ 0`.
    pub pi1: f64,
    pub lane_emden_residual: f64,
}

#[derive(Debug)]
struct StellarSource {
    le: LaneEmdenSolution,
    p: StellarParams,
}

impl StellarSource {
    fn theta_jets(&self, t: f64) -> Result<(Dual2, Dual2)> {
        if t >= self.le.radius {
            return Err(Error::Domain(format!("t = {t} is not below the stellar radius {}", self.le.radius)));
        }
        let (th, d1, d2) = self.le.eval(t)?;
        let d3 = self.le.third(t, th, d1, d2);
        Ok((Dual2::new(th, d1, d2), Dual2::new(d1, d2, d3)))
    }
}

impl CoefficientSource for StellarSource {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64) -> Result<CoeffPoint> {
        let (th, thd) = self.theta_jets(t)?;
        let p = &self.p;
        let n = p.n_poly;
        let kk = p.gamma1 * p.p_c / p.rho_c;
        let cl = p.c_l();
        let tt = Dual2::var(t);
        let p1 = th * kk;
        let p2 = th * (cl * kk) / tt;
        let p3 = th * (cl * cl * kk) / (tt * tt);
        let a = 0.5 * n - (n + 1.0) / p.gamma1;
        let q2 = (thd * a - th / tt) * (cl * kk) / tt;
        let (v, d1, d2) = (th.value, th.d1, th.d2);
        let q1 = (4.0 - 3.0 * p.gamma1) * (p.p_c / p.rho_c) * (n + 1.0) * d1 / t
            + kk * (2.0 * v / (t * t) + (2.0 * n + 2.0) * d1 / t + 0.25 * n * n * d1 * d1 / v + 0.5 * n * d2);

        let mut b = VecJet::zeros(1);
        b.v[0] = C64::new(-p2.value, 0.0);
        b.d1[0] = C64::new(-p2.d1, 0.0);
        b.d2[0] = C64::new(-p2.d2, 0.0);
        let mut c = VecJet::zeros(1);
        c.v[0] = C64::new(q2.value, 0.0);
        c.d1[0] = C64::new(q2.d1, 0.0);
        c.d2[0] = C64::new(q2.d2, 0.0);
        let mut d = MatJet::zeros(1);
        d.v[(0, 0)] = C64::new(p3.value, 0.0);
        d.d1[(0, 0)] = C64::new(p3.d1, 0.0);
        d.d2[(0, 0)] = C64::new(p3.d2, 0.0);
        Ok(CoeffPoint { p: p1, q: q1, b, c, d })
    }
}

/// Builds the model on `[1, R)`; fails with `NoZero` if the Lane–Emden function has no zero.
pub fn stellar_model(p: &StellarParams, opts: &LaneEmdenOptions) -> Result<(CoefficientModel, StellarSide)> {
    p.check()?;
    let le = lane_emden(p.n_poly, p.alpha_n, opts)?;
    if le.radius <= 1.0 {
        return Err(Error::Model(format!(
            "stellar radius {} must exceed 1; increase alpha_n",
            le.radius
        )));
    }
    let radius = le.radius;
    let (_, theta_d1_at_radius, _) = le.eval(radius)?;
    let k = p.gamma1 * p.p_c / p.rho_c;
    let side = StellarSide {
        radius,
        theta_d1_at_radius,
        k,
        case: Case::II,
        pi1: k * theta_d1_at_radius,
        lane_emden_residual: le.max_residual,
    };
    let src = StellarSource { le, p: *p };
    let model = CoefficientModel::new("stellar", 1.0, Endpoint::Finite(radius), Arc::new(src))?;
    Ok((model, side))
}
