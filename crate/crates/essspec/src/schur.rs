//! Pointwise Schur-complement coefficients `π, r, ϰ` and the partial-fraction form of `−π`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dotc, hermitian_eigen, hermitian_eigenvalues, CMat, CVec, JetSolver, C64};
use crate::model::{delta_from_point, CoeffPoint, CoefficientModel};

/// Pole tolerance: `λ` is at a pole of `(D − λ)⁻¹` when closer than this to `σ(D(t))`.
pub fn pole_tolerance(lambda: f64) -> f64 {
    1e-8 * (1.0 + lambda.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchurPoint {
    pub pi: f64,
    pub r: f64,
    pub varkappa: f64,
    /// Imaginary part of `ρ = 2r + i ∂π/∂t`.
    pub rho_im: f64,
    pub pi_d1: f64,
    pub pi_d2: f64,
    pub r_d1: f64,
    /// First-order rounding-noise estimates of the fields above.
    pub noise: SchurNoise,
}

/// Absolute rounding-noise estimates from backward-error bounds on the resolvent solves.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SchurNoise {
    pub pi: f64,
    pub pi_d1: f64,
    pub pi_d2: f64,
    pub r: f64,
    pub r_d1: f64,
    pub varkappa: f64,
}

impl SchurPoint {
    /// The complex `ϰ + i ∂r/∂t`.
    pub fn kappa_complex(&self) -> C64 {
        C64::new(self.varkappa, self.r_d1)
    }
}

/// Resolvent vectors `(D − λ)⁻¹ b` and `(D − λ)⁻¹ c` at the same point.
#[derive(Debug, Clone)]
pub struct Resolvents {
    pub xb: CVec,
    pub xc: CVec,
}

pub fn schur_point(m: &CoefficientModel, t: f64, lambda: f64) -> Result<SchurPoint> {
    Ok(schur_at(&m.eval(t)?, lambda)?.0)
}

pub fn schur_point_detail(m: &CoefficientModel, t: f64, lambda: f64) -> Result<(SchurPoint, Resolvents)> {
    schur_at(&m.eval(t)?, lambda)
}

/// Schur coefficients from already evaluated coefficients.
pub fn schur_at(pt: &CoeffPoint, lambda: f64) -> Result<(SchurPoint, Resolvents)> {
    let n = pt.b.v.len();
    let eig = hermitian_eigenvalues(&pt.d.v)?;
    let dists: Vec<f64> = eig.iter().map(|e| (e - lambda).abs()).collect();
    let dmin = dists.iter().copied().fold(f64::INFINITY, f64::min);
    if dmin < pole_tolerance(lambda) {
        return Err(Error::Pole { distance: dmin });
    }
    let dmax = dists.iter().copied().fold(0.0, f64::max);
    let cond = if n == 0 { 1.0 } else { dmax / dmin };

    let mut mj = pt.d.clone();
    for i in 0..n {
        mj.v[(i, i)] -= C64::new(lambda, 0.0);
    }
    let solver = JetSolver::new(&mj.v)?;
    let xb = solver.solve_jet(&mj, &pt.b, true)?;
    let xc = solver.solve_jet(&mj, &pt.c, false)?;
    let (b, c) = (&pt.b, &pt.c);

    // u = b*(D−λ)⁻¹b and its derivatives
    let u0 = dotc(&b.v, &xb.v);
    let u1 = dotc(&b.d1, &xb.v) + dotc(&b.v, &xb.d1);
    let u2 = dotc(&b.d2, &xb.v) + dotc(&b.d1, &xb.d1) * 2.0 + dotc(&b.v, &xb.d2);
    // w = b*(D−λ)⁻¹c and its first derivative
    let w0 = dotc(&b.v, &xc.v);
    let w1 = dotc(&b.d1, &xc.v) + dotc(&b.v, &xc.d1);
    let cc = dotc(&c.v, &xc.v);

    let scale_b = 1.0 + pt.p.value.abs() + b.v.norm() * xb.v.norm();
    let scale_c = 1.0 + c.v.norm() * xc.v.norm();
    let tol = 1e-12 * cond.max(1.0);
    if u0.im.abs() > tol * scale_b || cc.im.abs() > tol * scale_c {
        return Err(Error::numeric(format!(
            "imaginary residue {:e} in a Hermitian form exceeds tolerance",
            u0.im.abs().max(cc.im.abs())
        )));
    }

    let eps = 8.0 * f64::EPSILON * (n.max(1) as f64);
    let nm = |m: &CMat| m.norm();
    let (m0, m1, m2) = (dmax.max(nm(&mj.v)), nm(&mj.d1), nm(&mj.d2));
    let (b0, b1, b2) = (b.v.norm(), b.d1.norm(), b.d2.norm());
    let (c0, c1) = (c.v.norm(), c.d1.norm());
    let (x0, x1, x2) = (xb.v.norm(), xb.d1.norm(), xb.d2.norm());
    let (y0, y1) = (xc.v.norm(), xc.d1.norm());
    let w1_noise = eps * (b1 * y0 + b0 * y1 + m0 * (x0 * y1 + x1 * y0) + m1 * x0 * y0 + c1 * x0 + c0 * x1);
    let noise = SchurNoise {
        pi: eps * (pt.p.value.abs() + b0 * x0 + m0 * x0 * x0),
        pi_d1: eps * (pt.p.d1.abs() + b1 * x0 + b0 * x1 + m0 * x0 * x1 + m1 * x0 * x0),
        pi_d2: eps
            * (pt.p.d2.abs() + b2 * x0 + 2.0 * b1 * x1 + b0 * x2 + m0 * (x0 * x2 + x1 * x1) + m1 * x0 * x1 + m2 * x0 * x0),
        r: eps * (b0 * y0 + m0 * x0 * y0 + c0 * x0),
        r_d1: w1_noise,
        varkappa: eps * (pt.q.abs() + lambda.abs() + c0 * y0 + m0 * y0 * y0) + w1_noise,
    };

    let pi = pt.p.value - u0.re;
    let pi_d1 = pt.p.d1 - u1.re;
    let pi_d2 = pt.p.d2 - u2.re;
    let sp = SchurPoint {
        pi,
        r: w0.im,
        varkappa: pt.q - lambda - cc.re + w1.re,
        rho_im: pi_d1,
        pi_d1,
        pi_d2,
        r_d1: w1.im,
        noise,
    };
    Ok((sp, Resolvents { xb: xb.v, xc: xc.v }))
}

/// `π(t, ζ)` for complex `ζ` together with `‖(D − ζ)⁻¹ b‖²`.
pub fn pi_complex(m: &CoefficientModel, t: f64, zeta: C64) -> Result<(C64, f64)> {
    let pt = m.eval(t)?;
    let n = pt.b.v.len();
    let mut a = pt.d.v.clone();
    for i in 0..n {
        a[(i, i)] -= zeta;
    }
    let x = JetSolver::new(&a)?.solve(&pt.b.v)?;
    Ok((C64::new(pt.p.value, 0.0) - dotc(&pt.b.v, &x), x.norm_squared()))
}

/// `Δ(t) = D(t) − b(t)b(t)*/p(t)`.
pub fn delta_matrix(m: &CoefficientModel, t: f64) -> Result<CMat> {
    Ok(delta_from_point(&m.eval(t)?))
}

/// `−π(t, λ) = offset + Σ σ_j / (λ_j − λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFractions {
    pub poles: Vec<f64>,
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl PartialFractions {
    /// Evaluates `−π` at a (complex) point.
    pub fn neg_pi(&self, z: C64) -> C64 {
        self.poles
            .iter()
            .zip(&self.weights)
            .fold(C64::new(self.offset, 0.0), |acc, (&l, &s)| acc + s / (C64::new(l, 0.0) - z))
    }
}

/// Whether two poles are merged into one.
pub fn same_pole(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-10 * (1.0 + a.abs())
}

pub fn partial_fractions(m: &CoefficientModel, t: f64) -> Result<PartialFractions> {
    partial_fractions_at(&m.eval(t)?)
}

pub fn partial_fractions_at(pt: &CoeffPoint) -> Result<PartialFractions> {
    let (vals, vecs) = hermitian_eigen(&pt.d.v)?;
    let b = &pt.b.v;
    let mut poles: Vec<f64> = Vec::with_capacity(vals.len());
    let mut weights: Vec<f64> = Vec::with_capacity(vals.len());
    for (k, &l) in vals.iter().enumerate() {
        let s = dotc(&vecs.column(k).into_owned(), b).norm_sqr();
        match poles.last() {
            Some(&last) if same_pole(last, l) => *weights.last_mut().expect("nonempty") += s,
            _ => {
                poles.push(l);
                weights.push(s);
            }
        }
    }
    for w in &mut weights {
        if *w < 0.0 && *w >= -1e-12 {
            *w = 0.0;
        }
    }
    Ok(PartialFractions {
        poles,
        weights,
        offset: -pt.p.value,
    })
}
