//! Numeric probes of the standing assumptions at one `λ`.
//!
//! Every probe is heuristic evidence from finitely many samples, never a proof.

use serde::{Deserialize, Serialize};

use crate::asymptotic::{classify_case, coeffs_from_tail, lim, over_pi, tail_samples, Case};
use crate::error::{Error, Result};
use crate::limits::Limit;
use crate::model::{CoefficientModel, Endpoint};
use crate::options::Options;
use crate::schur::schur_point_detail;

/// Number of tail points and decades covered by the probes.
const TAIL_POINTS: usize = 64;
const TAIL_DECADES: f64 = 6.0;

/// Tolerance of the `Φ₁`, `Φ₂` target comparison.
const PHI_TOL: f64 = 1e-4;

pub const DISCLAIMER: &str =
    "numeric evidence from finitely many tail samples; not a verification of the assumptions";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub name: String,
    pub outcome: Outcome,
    #[serde(with = "crate::interval::ext_real")]
    pub value: f64,
    #[serde(with = "crate::interval::ext_real_opt")]
    pub target: Option<f64>,
    pub note: String,
}

impl Probe {
    fn new(name: &str, outcome: Outcome, value: f64, target: Option<f64>, note: impl Into<String>) -> Self {
        Probe { name: name.into(), outcome, value, target, note: note.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub lambda: f64,
    pub case: Case,
    /// Weight used in the `V_η` and `∫ηh²` probes.
    pub eta: String,
    pub s_pi: i8,
    pub probes: Vec<Probe>,
    pub disclaimer: String,
}

impl DiagnosticsReport {
    pub fn probe(&self, name: &str) -> Option<&Probe> {
        self.probes.iter().find(|p| p.name == name)
    }
}

/// `η, η′, η″` at distance `h` from beta.
#[derive(Debug, Clone, Copy)]
enum Eta {
    Distance,
    Log { c: f64 },
    One,
}

impl Eta {
    fn choose(case: Case, m: &CoefficientModel) -> Eta {
        match (case, m.beta) {
            (Case::I, Endpoint::Finite(_)) => Eta::Distance,
            (Case::II, Endpoint::Finite(b)) => Eta::Log { c: 1.0 / (2.0 * (b - m.alpha)) },
            _ => Eta::One,
        }
    }

    fn label(self) -> String {
        match self {
            Eta::Distance => "beta - t".into(),
            Eta::Log { c } => format!("-log({c} (beta - t))"),
            Eta::One => "1".into(),
        }
    }

    fn jet(self, h: f64) -> (f64, f64, f64) {
        match self {
            Eta::Distance => (h, -1.0, 0.0),
            Eta::Log { c } => (-(c * h).ln(), 1.0 / h, 1.0 / (h * h)),
            Eta::One => (1.0, 0.0, 0.0),
        }
    }
}

/// `(t, h)` on 64 geometric points from `h0 = span/8` down to `h0·1e-6`.
fn tail_grid(m: &CoefficientModel) -> Vec<(f64, f64)> {
    (0..TAIL_POINTS)
        .map(|k| {
            let f = 10f64.powf(-TAIL_DECADES * k as f64 / (TAIL_POINTS - 1) as f64);
            match m.beta {
                Endpoint::Finite(b) => {
                    let h = (b - m.alpha) * f / 8.0;
                    (b - h, h)
                }
                Endpoint::Infinite => {
                    let s = f / (8.0 * (m.alpha.abs() + 1.0));
                    (1.0 / s, s)
                }
            }
        })
        .collect()
}

struct TailPoint {
    t: f64,
    h: f64,
    pi: f64,
    v_eta: f64,
    v_eta_k2: f64,
}

fn sample_tail(m: &CoefficientModel, lambda: f64, eta: Eta) -> (Vec<TailPoint>, usize) {
    let mut out = Vec::with_capacity(TAIL_POINTS);
    let mut skipped = 0;
    for (t, h) in tail_grid(m) {
        let Ok((sp, res)) = schur_point_detail(m, t, lambda) else {
            skipped += 1;
            continue;
        };
        let (e, e1, e2) = eta.jet(h);
        let s = sp.pi.signum();
        let corr = sp.pi_d1 * e1 / (2.0 * e) + sp.pi * (e2 / (2.0 * e) - e1 * e1 / (4.0 * e * e));
        let v = s * (sp.varkappa - sp.r * sp.r / sp.pi - corr);
        let coef = crate::linalg::C64::new(e1 / (2.0 * e), sp.r / sp.pi);
        let w = res.xb.map(|z| z * coef) + &res.xc;
        out.push(TailPoint { t, h, pi: sp.pi, v_eta: v, v_eta_k2: v - w.norm_squared() });
    }
    (out, skipped)
}

fn sign_probe(pts: &[TailPoint]) -> (i8, Probe) {
    let pos = pts.iter().filter(|p| p.pi > 0.0).count();
    let neg = pts.iter().filter(|p| p.pi < 0.0).count();
    let (s, outcome) = match (pos, neg) {
        (0, 0) => (0, Outcome::Inconclusive),
        (_, 0) => (1, Outcome::Pass),
        (0, _) => (-1, Outcome::Pass),
        _ => (0, Outcome::Fail),
    };
    let note = format!("{pos} positive, {neg} negative samples of pi");
    (s, Probe::new("s_pi", outcome, s as f64, None, note))
}

/// Slope of `log|v|` against `log(1/h)` by least squares.
fn growth_slope(xs: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .filter(|(h, v)| *v != 0.0 && *h > 0.0)
        .map(|(h, v)| (-h.ln(), v.abs().ln()))
        .collect();
    if pts.len() < 3 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Lower-boundedness heuristic: the deeper half of the tail must not keep descending.
fn bounded_below_probe(name: &str, pts: &[TailPoint], val: impl Fn(&TailPoint) -> f64) -> Probe {
    if pts.len() < 16 {
        return Probe::new(name, Outcome::Inconclusive, f64::NAN, None, "too few tail samples");
    }
    let half = pts.len() / 2;
    let min = |s: &[TailPoint]| s.iter().map(&val).fold(f64::INFINITY, f64::min);
    let (m_first, m_last) = (min(&pts[..half]), min(&pts[half..]));
    if !m_last.is_finite() {
        return Probe::new(name, Outcome::Inconclusive, m_last, None, "non-finite samples");
    }
    if m_last >= m_first - 1e-6 * (1.0 + m_first.abs()) {
        return Probe::new(name, Outcome::Pass, m_last, None, "minimum attained away from beta");
    }
    let negs: Vec<(f64, f64)> = pts[half..].iter().map(|p| (p.h, val(p))).filter(|(_, v)| *v < 0.0).collect();
    let slope = growth_slope(&negs);
    let note = format!("negative part grows like (beta - t)^-{slope:.3}");
    if slope > 0.1 {
        Probe::new(name, Outcome::Fail, m_last, None, note)
    } else if slope < 0.02 {
        Probe::new(name, Outcome::Pass, m_last, None, note)
    } else {
        Probe::new(name, Outcome::Inconclusive, m_last, None, note)
    }
}

/// Sums consecutive segment integrals into decades of `h`.
fn decades(segments: &[f64]) -> Vec<f64> {
    let n = segments.len();
    let per = n as f64 / TAIL_DECADES;
    let mut out = vec![0.0; TAIL_DECADES as usize];
    for (j, s) in segments.iter().enumerate() {
        let d = ((j as f64 / per) as usize).min(out.len() - 1);
        out[d] += s;
    }
    out
}

/// Convergence of a positive tail integral from its last two decades, with a geometric remainder.
fn tail_converges(dec: &[f64]) -> Option<(bool, f64)> {
    let (a, b) = (dec[dec.len() - 2], dec[dec.len() - 1]);
    if !(a.is_finite() && b.is_finite()) {
        return None;
    }
    let total: f64 = dec.iter().sum();
    if b <= 0.5 * a || b <= 1e-14 * total {
        let r = if a > 0.0 { b / a } else { 0.0 };
        Some((true, total + b * r / (1.0 - r)))
    } else if b >= 0.9 * a {
        Some((false, total))
    } else {
        None
    }
}

fn trapezoid(pts: &[TailPoint], f: impl Fn(&TailPoint, usize) -> f64) -> Vec<f64> {
    (0..pts.len() - 1)
        .map(|i| 0.5 * (f(&pts[i], i) + f(&pts[i + 1], i + 1)) * (pts[i + 1].t - pts[i].t))
        .collect()
}

fn integral_probe(pts: &[TailPoint], eta: Eta) -> Probe {
    const NAME: &str = "eta_h2_integral";
    if pts.len() < 16 {
        return Probe::new(NAME, Outcome::Inconclusive, f64::NAN, None, "too few tail samples");
    }
    let g = |p: &TailPoint, _| 1.0 / (eta.jet(p.h).0 * p.pi.abs());
    let seg = trapezoid(pts, g);
    let inner = tail_converges(&decades(&seg));
    let n = pts.len();
    let mut h2 = vec![0.0; n];
    let integrable = match inner {
        Some((true, total)) => {
            // h² = ∫_t^beta, using the extrapolated total
            let mut acc = 0.0;
            for i in 0..n {
                h2[i] = (total - acc).max(0.0);
                if i + 1 < n {
                    acc += seg[i];
                }
            }
            true
        }
        _ => {
            for i in 1..n {
                h2[i] = h2[i - 1] + seg[i - 1];
            }
            false
        }
    };
    let outer = trapezoid(pts, |p, i| eta.jet(p.h).0 * h2[i]);
    let kind = if integrable { "1/(eta |pi|) integrable at beta" } else { "1/(eta |pi|) not integrable at beta" };
    match tail_converges(&decades(&outer)) {
        Some((true, v)) => Probe::new(NAME, Outcome::Pass, v, None, kind),
        Some((false, v)) => Probe::new(NAME, Outcome::Fail, v, None, format!("{kind}; eta h^2 integral keeps growing")),
        None => Probe::new(NAME, Outcome::Inconclusive, outer.iter().sum(), None, kind),
    }
}

fn limit_probe(name: &str, l: Limit, target: f64, applicable: bool) -> Probe {
    let value = l.value().unwrap_or(f64::NAN);
    if !applicable {
        return Probe::new(name, Outcome::Inconclusive, value, Some(target), "presence conditions apply only in Case III");
    }
    match l {
        Limit::Finite { value, err } if err <= PHI_TOL => {
            let ok = (value - target).abs() <= PHI_TOL * (1.0 + target.abs());
            let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
            Probe::new(name, outcome, value, Some(target), format!("extrapolation error {err:.1e}"))
        }
        Limit::Finite { err, .. } => {
            Probe::new(name, Outcome::Inconclusive, value, Some(target), format!("extrapolation error {err:.1e}"))
        }
        Limit::Diverged { .. } => Probe::new(name, Outcome::Fail, value, Some(target), "limit diverges"),
        Limit::Oscillatory => Probe::new(name, Outcome::Fail, value, Some(target), "no limit"),
    }
}

/// Runs the sign, `V_η`, `∫ηh²` and `Φ₁`/`Φ₂` probes at `λ`.
pub fn assumption_diagnostics(m: &CoefficientModel, lambda: f64, opts: &Options) -> Result<DiagnosticsReport> {
    let fin = m.beta.is_finite();
    let tail = tail_samples(m, lambda, opts, opts.levels)?;
    let coeffs = coeffs_from_tail(&tail, lambda, fin, opts);
    let case = classify_case(&coeffs, opts.eps_class).case;
    let eta = Eta::choose(case, m);
    let (pts, skipped) = sample_tail(m, lambda, eta);
    if pts.is_empty() {
        return Err(Error::numeric(format!("every diagnostic tail point is at a pole for lambda = {lambda}")));
    }

    let mut probes = Vec::new();
    let (s_pi, mut sp) = sign_probe(&pts);
    if skipped > 0 {
        sp.note.push_str(&format!("; {skipped} points skipped at poles"));
    }
    probes.push(sp);
    probes.push(bounded_below_probe("v_eta_lower_bound", &pts, |p| p.v_eta));
    probes.push(bounded_below_probe("v_eta_k2_lower_bound", &pts, |p| p.v_eta_k2));
    probes.push(integral_probe(&pts, eta));

    let w = |h: f64, k: i32| if fin { h.powi(k) } else { 1.0 };
    let phi1 = lim(&tail, opts, |p, h| over_pi(w(h, 1) * p.pi_d1, w(h, 1) * p.noise.pi_d1, p));
    let phi2 = lim(&tail, opts, |p, h| over_pi(w(h, 2) * p.r_d1, w(h, 2) * p.noise.r_d1, p));
    let (t1, t2) = if fin {
        (-2.0, -coeffs.rtilde_beta.value().unwrap_or(f64::NAN))
    } else {
        (0.0, 0.0)
    };
    let applicable = case == Case::III;
    probes.push(limit_probe("phi1_limit", phi1, t1, applicable));
    probes.push(limit_probe("phi2_limit", phi2, t2, applicable && t2.is_finite()));

    Ok(DiagnosticsReport {
        lambda,
        case,
        eta: eta.label(),
        s_pi,
        probes,
        disclaimer: DISCLAIMER.into(),
    })
}
