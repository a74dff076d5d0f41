//! Boundary limits of the Schur coefficients and the Case (I)/(II)/(III) classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits::{extrapolate_with_noise, Ladder, Limit};
use crate::linalg::hermitian_eigenvalues;
use crate::model::CoefficientModel;
use crate::options::Options;
use crate::schur::{schur_at, Resolvents, SchurPoint};

/// How far the ladder may be pushed toward beta to get past poles of `(D − λ)⁻¹`.
const MAX_SHIFT: usize = 24;

/// Schur coefficients on a tail ladder along which `D(t) − λ` keeps its inertia and `π` its sign.
#[derive(Debug, Clone)]
pub struct TailSamples {
    pub ladder: Ladder,
    pub points: Vec<SchurPoint>,
    pub resolvents: Vec<Resolvents>,
    /// `p` at the node closest to beta.
    pub p_near_beta: f64,
    /// Ladder level of the first node.
    pub start: usize,
}

pub fn tail_samples(m: &CoefficientModel, lambda: f64, opts: &Options, levels: usize) -> Result<TailSamples> {
    let mut start = 0;
    while start <= MAX_SHIFT {
        let ladder = Ladder::new(m.alpha, m.beta, opts.h0_fraction, opts.ratio, start, levels);
        let mut below = Vec::with_capacity(levels);
        let mut pts = Vec::with_capacity(levels);
        let mut res = Vec::with_capacity(levels);
        let mut p_last = 0.0;
        let mut bad: Option<usize> = None;
        for (i, &t) in ladder.t.iter().enumerate() {
            let cp = m.eval(t)?;
            p_last = cp.p.value;
            below.push(hermitian_eigenvalues(&cp.d.v)?.iter().filter(|&&e| e < lambda).count());
            match schur_at(&cp, lambda) {
                Ok((sp, r)) => {
                    pts.push(sp);
                    res.push(r);
                }
                Err(Error::Pole { .. }) => {
                    bad = Some(i);
                    pts.push(SchurPoint { pi: f64::NAN, r: 0.0, varkappa: 0.0, rho_im: 0.0, pi_d1: 0.0, pi_d2: 0.0, r_d1: 0.0, noise: Default::default() });
                    res.push(Resolvents { xb: Default::default(), xc: Default::default() });
                }
                Err(e) => return Err(e),
            }
        }
        let last = levels - 1;
        if bad.is_none() {
            let sgn = pts[last].pi.signum();
            bad = (0..last)
                .rev()
                .find(|&i| below[i] != below[last] || (pts[last].pi != 0.0 && pts[i].pi.signum() != sgn));
        }
        match bad {
            None => {
                return Ok(TailSamples { ladder, points: pts, resolvents: res, p_near_beta: p_last, start });
            }
            Some(i) if i == last => start += levels,
            Some(i) => start += i + 1,
        }
    }
    Err(Error::numeric(format!("no pole-free tail found for lambda = {lambda}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymCoeffs {
    pub lambda: f64,
    pub beta_finite: bool,
    /// `lim π`.
    pub pi0: Limit,
    /// `lim ∂π/∂t`.
    pub pi1: Limit,
    /// `lim π/(β − t)²` (finite beta only).
    pub pi2: Option<Limit>,
    /// `½ lim ∂²π/∂t²`, the L'Hôpital cross-check of `pi2`.
    pub pi2_check: Option<Limit>,
    /// `lim ∂r/∂t`.
    pub r1: Limit,
    /// `lim ϰ`.
    pub varkappa0: Limit,
    /// `lim (β − t) r/π`, unweighted for infinite beta.
    pub rtilde_beta: Limit,
    /// `lim (β − t)² ϰ/π`, unweighted for infinite beta.
    pub ktilde_beta: Limit,
    #[serde(with = "crate::interval::ext_real")]
    pub p_near_beta: f64,
}

impl AsymCoeffs {
    /// `|pi2 − pi2_check|` against their combined error estimate, when both are finite.
    pub fn pi2_consistent(&self) -> Option<bool> {
        match (self.pi2?, self.pi2_check?) {
            (Limit::Finite { value: a, err: ea }, Limit::Finite { value: b, err: eb }) => {
                Some((a - b).abs() <= 10.0 * (ea + eb) + 1e-9 * (1.0 + a.abs()))
            }
            _ => Some(false),
        }
    }
}

/// Extrapolates `f(point, h)` along the tail; `f` returns a value and its noise estimate.
pub(crate) fn lim(s: &TailSamples, opts: &Options, f: impl Fn(&SchurPoint, f64) -> (f64, f64)) -> Limit {
    let (v, nz): (Vec<f64>, Vec<f64>) = s.points.iter().zip(&s.ladder.h).map(|(p, &h)| f(p, h)).unzip();
    extrapolate_with_noise(&v, Some(&nz), opts.ratio, opts.diverge_threshold)
}

/// `a / π` with its propagated noise.
pub(crate) fn over_pi(a: f64, a_noise: f64, p: &SchurPoint) -> (f64, f64) {
    let v = a / p.pi;
    (v, (a_noise + v.abs() * p.noise.pi) / p.pi.abs())
}

/// Extrapolates every boundary coefficient at one `λ`.
pub fn asym_coeffs(m: &CoefficientModel, lambda: f64, opts: &Options) -> Result<AsymCoeffs> {
    let s = tail_samples(m, lambda, opts, opts.levels)?;
    Ok(coeffs_from_tail(&s, lambda, m.beta.is_finite(), opts))
}

pub fn coeffs_from_tail(s: &TailSamples, lambda: f64, fin: bool, opts: &Options) -> AsymCoeffs {
    let w = |h: f64, k: i32| if fin { h.powi(k) } else { 1.0 };
    AsymCoeffs {
        lambda,
        beta_finite: fin,
        pi0: lim(s, opts, |p, _| (p.pi, p.noise.pi)),
        pi1: lim(s, opts, |p, _| (p.pi_d1, p.noise.pi_d1)),
        pi2: fin.then(|| lim(s, opts, |p, h| (p.pi / (h * h), p.noise.pi / (h * h)))),
        pi2_check: fin.then(|| lim(s, opts, |p, _| (0.5 * p.pi_d2, 0.5 * p.noise.pi_d2))),
        r1: lim(s, opts, |p, _| (p.r_d1, p.noise.r_d1)),
        varkappa0: lim(s, opts, |p, _| (p.varkappa, p.noise.varkappa)),
        rtilde_beta: lim(s, opts, |p, h| over_pi(w(h, 1) * p.r, w(h, 1) * p.noise.r, p)),
        ktilde_beta: lim(s, opts, |p, h| over_pi(w(h, 2) * p.varkappa, w(h, 2) * p.noise.varkappa, p)),
        p_near_beta: s.p_near_beta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Case {
    I,
    II,
    III,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseTag {
    pub case: Case,
    pub lambda: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub pi0_abs: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub pi1_abs: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub threshold: f64,
}

/// Tags `λ` by which of `π̃₀`, `π̃₁` vanish, with threshold `eps_class · (1 + |p near beta|)`.
pub fn classify_case(a: &AsymCoeffs, eps_class: f64) -> CaseTag {
    let threshold = eps_class * (1.0 + a.p_near_beta.abs());
    let tag = |case, p0: f64, p1: f64| CaseTag { case, lambda: a.lambda, pi0_abs: p0, pi1_abs: p1, threshold };
    let (p0, e0) = match a.pi0 {
        Limit::Finite { value, err } => (value.abs(), err),
        _ => return tag(Case::Unresolved, f64::INFINITY, f64::NAN),
    };
    let p1_raw = a.pi1.value().map_or(f64::INFINITY, f64::abs);
    if p0 - e0 > threshold {
        return tag(Case::I, p0, p1_raw);
    }
    if p0 + e0 > threshold {
        return tag(Case::Unresolved, p0, p1_raw);
    }
    let (p1, e1) = match a.pi1 {
        Limit::Finite { value, err } => (value.abs(), err),
        _ => return tag(Case::Unresolved, p0, f64::INFINITY),
    };
    if p1 - e1 > threshold {
        tag(Case::II, p0, p1)
    } else if p1 + e1 <= threshold {
        tag(Case::III, p0, p1)
    } else {
        tag(Case::Unresolved, p0, p1)
    }
}
