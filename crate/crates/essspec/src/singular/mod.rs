//! Singular part of the essential spectrum and the full spectrum assembly.
//!
//! In Case III with a finite endpoint the discriminant is evaluated through the
//! fitted rational functions of [`structure`]; otherwise (or if the fit is
//! unreliable) it is evaluated from raw extrapolated limits at every λ.

pub mod structure;

use serde::{Deserialize, Serialize};

pub use structure::{
    classify_structure, closed_form_radius, essential_radius, structure_coeffs, ClosedFormRadius, DirectLimits,
    RadiusReport, StructureBranch, StructureClass, StructureCoeffs,
};

use crate::asymptotic::{asym_coeffs, classify_case, AsymCoeffs, Case, CaseTag};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::model::CoefficientModel;
use crate::options::Options;
use crate::par;
use crate::regular::{lambda_beta, regular_part, LambdaBetaD, RegularPart};

/// Number of case probes spread over the window.
const CASE_PROBES: usize = 17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discriminant {
    pub lambda: f64,
    /// `r̃² − ϰ̃ − ¼` (without `¼` for an infinite endpoint).
    #[serde(with = "crate::interval::ext_real")]
    pub value: f64,
    /// `r₁² − ϰ₀π₂ − ¼π₂²`, available in Case III with a finite endpoint.
    pub scaled: Option<f64>,
    /// Error estimate of the quantity whose sign is used.
    pub err: f64,
}

impl Discriminant {
    /// The value that decides membership.
    pub fn decisive(&self) -> f64 {
        self.scaled.unwrap_or(self.value)
    }
}

/// Discriminant from extrapolated limits; the scaled form is used when `π₂` is available.
pub fn discriminant(a: &AsymCoeffs, opts: &Options) -> Result<Discriminant> {
    let tol = opts.limit_tol * 100.0;
    let check = |l: &crate::limits::Limit, field: &str| -> Result<f64> {
        let v = l.require(field)?;
        if l.reliable(tol) {
            Ok(v)
        } else {
            Err(Error::numeric(format!("{field}: limit {v} has error {:.3e}", l.err())))
        }
    };
    if let Some(pi2l) = a.pi2.as_ref().filter(|_| a.beta_finite) {
        if let (Ok(pi2), Ok(k0), Ok(r1)) = (check(pi2l, "pi2"), check(&a.varkappa0, "varkappa0"), check(&a.r1, "r1")) {
            let scaled = r1 * r1 - k0 * pi2 - 0.25 * pi2 * pi2;
            let err = 2.0 * r1.abs() * a.r1.err() + pi2.abs() * a.varkappa0.err() + (k0 + 0.5 * pi2).abs() * pi2l.err();
            let value = if pi2 != 0.0 { scaled / (pi2 * pi2) } else { f64::NAN };
            return Ok(Discriminant { lambda: a.lambda, value, scaled: Some(scaled), err });
        }
    }
    let rt = check(&a.rtilde_beta, "rtilde")?;
    let kt = check(&a.ktilde_beta, "ktilde")?;
    let quarter = if a.beta_finite { 0.25 } else { 0.0 };
    let err = 2.0 * rt.abs() * a.rtilde_beta.err() + a.ktilde_beta.err();
    Ok(Discriminant { lambda: a.lambda, value: rt * rt - kt - quarter, scaled: None, err })
}

pub fn discriminant_at(m: &CoefficientModel, lambda: f64, opts: &Options) -> Result<Discriminant> {
    discriminant(&asym_coeffs(m, lambda, opts)?, opts)
}

/// How the discriminant was evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminantPath {
    /// Not evaluated: Case I or II.
    None,
    Fitted,
    Raw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularPart {
    pub set: IntervalSet,
    pub case: Case,
    pub path: DiscriminantPath,
    pub window: Interval,
    pub probes: Vec<CaseTag>,
    /// Endpoints placed on an excluded set (regular part or `Λβ(D)`) by interpolation across it.
    pub anchored_endpoints: Vec<f64>,
    /// Whether the set meets the regular part or `Λβ(D)`; the result holds modulo those sets.
    pub meets_excluded: bool,
    pub warnings: Vec<String>,
}

/// A closed zone skipped by the scan, with the core set it surrounds.
#[derive(Debug, Clone, Copy)]
struct Zone {
    outer: Interval,
    core: Interval,
}

fn zones(cores: &[Interval], margin: f64) -> Vec<Zone> {
    let mut z: Vec<Zone> = cores
        .iter()
        .map(|c| Zone { outer: Interval::new(c.lo - margin, c.hi + margin), core: *c })
        .collect();
    z.sort_by(|a, b| a.outer.lo.total_cmp(&b.outer.lo));
    let mut out: Vec<Zone> = Vec::new();
    for zz in z {
        match out.last_mut() {
            Some(last) if zz.outer.lo <= last.outer.hi => {
                last.outer.hi = last.outer.hi.max(zz.outer.hi);
                last.core.lo = last.core.lo.min(zz.core.lo);
                last.core.hi = last.core.hi.max(zz.core.hi);
            }
            _ => out.push(zz),
        }
    }
    out
}

fn in_zone(zs: &[Zone], x: f64) -> bool {
    zs.iter().any(|z| x > z.outer.lo && x < z.outer.hi)
}

/// Evenly spaced window points outside every zone.
fn admissible(window: Interval, count: usize, zs: &[Zone]) -> Vec<f64> {
    (0..count)
        .map(|i| window.lo + (window.hi - window.lo) * i as f64 / (count - 1) as f64)
        .filter(|&x| !in_zone(zs, x))
        .collect()
}

struct ScanResult {
    set: IntervalSet,
    left_open: bool,
    right_open: bool,
    anchored: Vec<f64>,
}

/// Sign scan of `eval` over the window with bisection of every sign change.
///
/// `eval` returns `None` where the discriminant is unavailable; such points act as gaps.
fn scan<F>(eval: &F, window: Interval, grid: usize, zs: &[Zone], opts: &Options) -> ScanResult
where
    F: Fn(f64) -> Option<f64> + Sync,
{
    let mut xs: Vec<f64> = (0..grid)
        .map(|i| window.lo + (window.hi - window.lo) * i as f64 / (grid - 1) as f64)
        .collect();
    for z in zs {
        for e in [z.outer.lo, z.outer.hi] {
            if e > window.lo && e < window.hi {
                xs.push(e);
            }
        }
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs.retain(|&x| !in_zone(zs, x));
    let vals: Vec<Option<f64>> = par::map(opts.execution, &xs, |&x| eval(x));
    let nodes: Vec<(f64, bool)> = xs
        .iter()
        .zip(&vals)
        .filter_map(|(&x, v)| v.map(|v| (x, v >= 0.0)))
        .collect();

    let mut out = Vec::new();
    let mut anchored = Vec::new();
    if nodes.is_empty() {
        return ScanResult { set: IntervalSet::empty(), left_open: false, right_open: false, anchored };
    }
    let left_open = nodes[0].1 && nodes[0].0 <= window.lo;
    let mut start: Option<f64> = nodes[0].1.then_some(nodes[0].0);
    for w in nodes.windows(2) {
        let ((a, pa), (b, pb)) = (w[0], w[1]);
        if pa == pb {
            continue;
        }
        let gap = zs.iter().find(|z| z.outer.lo >= a && z.outer.hi <= b);
        let edge = match gap {
            Some(z) => {
                let x = if pa { z.core.lo } else { z.core.hi };
                anchored.push(x);
                x
            }
            None => bisect(eval, a, b, pa, opts.root_tol),
        };
        if pa {
            out.push(Interval::new(start.take().unwrap_or(a), edge));
        } else {
            start = Some(edge);
        }
    }
    let last = nodes[nodes.len() - 1];
    let right_open = last.1 && last.0 >= window.hi;
    if let Some(s) = start {
        out.push(Interval::new(s, last.0));
    }
    ScanResult { set: IntervalSet::from_intervals(out, opts.merge_tol), left_open, right_open, anchored }
}

/// Shrinks `[a, b]` around the sign change; returns the end on the non-negative side.
fn bisect<F: Fn(f64) -> Option<f64>>(eval: &F, mut a: f64, mut b: f64, a_nonneg: bool, root_tol: f64) -> f64 {
    while b - a > root_tol * (1.0 + a.abs().min(b.abs())) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        match eval(mid) {
            Some(v) if (v >= 0.0) == a_nonneg => a = mid,
            Some(_) => b = mid,
            None => break,
        }
    }
    if a_nonneg {
        a
    } else {
        b
    }
}

/// Default window `[−10·scale, 10·scale]` with `scale = 1 + max|Λβ| + max|regular endpoints|`.
pub fn default_window(reg: &IntervalSet, lb: &LambdaBetaD) -> Interval {
    let s = lambda_scale(reg, lb);
    Interval::new(-10.0 * s, 10.0 * s)
}

fn lambda_scale(reg: &IntervalSet, lb: &LambdaBetaD) -> f64 {
    1.0 + lb.max_abs() + reg.max_finite_abs()
}

fn excluded_cores(reg: &IntervalSet, lb: &LambdaBetaD, with_regular: bool) -> Vec<Interval> {
    let mut cores: Vec<Interval> = lb.finite_limits.iter().map(|&x| Interval::point(x)).collect();
    if with_regular {
        cores.extend(reg.intervals().iter().copied());
    }
    cores
}

/// Uniform case over the probes, or an error if Case III mixes with I/II.
fn uniform_case(tags: &[CaseTag], warnings: &mut Vec<String>) -> Result<Case> {
    let count = |c: Case| tags.iter().filter(|t| t.case == c).count();
    let (n1, n2, n3, nu) = (count(Case::I), count(Case::II), count(Case::III), count(Case::Unresolved));
    if nu > 0 {
        warnings.push(format!("{nu} of {} case probes unresolved", tags.len()));
    }
    match (n1 + n2, n3) {
        (0, 0) => Err(Error::numeric("no case probe resolved")),
        (_, 0) => Ok(if n1 >= n2 { Case::I } else { Case::II }),
        (0, _) => Ok(Case::III),
        _ => Err(Error::CaseNotUniform(format!("{n1} probes in Case I, {n2} in Case II, {n3} in Case III"))),
    }
}

/// Case tags at admissible probe points of the window and the uniform case they imply.
pub fn probe_case(
    m: &CoefficientModel,
    window: Interval,
    reg: &IntervalSet,
    lb: &LambdaBetaD,
    opts: &Options,
    warnings: &mut Vec<String>,
) -> Result<(Case, Vec<CaseTag>)> {
    let margin = opts.exclusion_margin * lambda_scale(reg, lb);
    let raw_zones = zones(&excluded_cores(reg, lb, true), margin);
    let probe_lambdas = admissible(window, CASE_PROBES.max(3), &raw_zones);
    let tags: Vec<CaseTag> = par::map(opts.execution, &probe_lambdas, |&l| {
        asym_coeffs(m, l, opts).ok().map(|a| classify_case(&a, opts.eps_class))
    })
    .into_iter()
    .flatten()
    .collect();
    let case = uniform_case(&tags, warnings)?;
    Ok((case, tags))
}

/// Singular part with the structure fit it was computed from (Case III, finite beta).
pub struct SingularAnalysis {
    pub part: SingularPart,
    pub structure: Option<StructureCoeffs>,
    pub class: Option<StructureClass>,
}

/// Singular part on `window` given the regular part and `Λβ(D)`.
pub fn singular_analysis(
    m: &CoefficientModel,
    window: Interval,
    reg: &IntervalSet,
    lb: &LambdaBetaD,
    opts: &Options,
) -> Result<SingularAnalysis> {
    if !(window.is_compact() && window.lo < window.hi) {
        return Err(Error::config("window", "lambda window must be finite and nonempty"));
    }
    let scale = lambda_scale(reg, lb);
    let margin = opts.exclusion_margin * scale;
    let raw_zones = zones(&excluded_cores(reg, lb, true), margin);
    let mut warnings = Vec::new();
    let (case, tags) = probe_case(m, window, reg, lb, opts, &mut warnings)?;

    let empty = |case, path, warnings| SingularPart {
        set: IntervalSet::empty(),
        case,
        path,
        window,
        probes: tags.clone(),
        anchored_endpoints: vec![],
        meets_excluded: false,
        warnings,
    };
    if case != Case::III {
        return Ok(SingularAnalysis { part: empty(case, DiscriminantPath::None, warnings), structure: None, class: None });
    }

    let (structure, class) = if m.beta.is_finite() {
        let cands = admissible(window, opts.lambda_grid, &raw_zones);
        match structure_coeffs(m, lb, &cands, opts) {
            Ok(s) => {
                let c = classify_structure(&s, lb.j0, opts);
                (Some(s), Some(c))
            }
            Err(e) => {
                warnings.push(format!("structure fit failed ({e}); using raw limits"));
                (None, None)
            }
        }
    } else {
        (None, Some(StructureClass::unclassified()))
    };

    let fitted = structure.as_ref().filter(|s| s.reliable);
    let (res, path) = match fitted {
        Some(s) => {
            let pole_zones = zones(&excluded_cores(reg, lb, false), margin);
            let eval = |l: f64| Some(s.scaled_discriminant(l)).filter(|v| v.is_finite());
            (scan(&eval, window, opts.lambda_grid, &pole_zones, opts), DiscriminantPath::Fitted)
        }
        None => {
            if structure.is_some() {
                warnings.push("structure fit unreliable; using raw limits".into());
            }
            let eval = |l: f64| discriminant_at(m, l, opts).ok().map(|d| d.decisive());
            (scan(&eval, window, opts.lambda_grid, &raw_zones, opts), DiscriminantPath::Raw)
        }
    };

    let mut items: Vec<Interval> = res.set.intervals().to_vec();
    if let (Some(first), true) = (items.first_mut(), res.left_open) {
        match class {
            Some(c) if c.left_ray => first.lo = f64::NEG_INFINITY,
            _ => warnings.push("singular part reaches the left window edge".into()),
        }
    }
    if let (Some(last), true) = (items.last_mut(), res.right_open) {
        match class {
            Some(c) if c.right_ray => last.hi = f64::INFINITY,
            _ => warnings.push("singular part reaches the right window edge".into()),
        }
    }
    if let Some(c) = class {
        if (c.left_ray && !res.left_open) || (c.right_ray && !res.right_open) {
            warnings.push("structure class predicts a ray not seen at the window edge".into());
        }
    }
    let set = IntervalSet::from_intervals(items, opts.merge_tol);
    let tol = margin;
    let meets_excluded = set.intervals().iter().any(|i| {
        lb.finite_limits.iter().any(|&x| i.contains(x, tol)) || reg.intervals().iter().any(|r| r.lo <= i.hi + tol && i.lo <= r.hi + tol)
    });
    Ok(SingularAnalysis {
        part: SingularPart {
            set,
            case,
            path,
            window,
            probes: tags,
            anchored_endpoints: res.anchored,
            meets_excluded,
            warnings,
        },
        structure,
        class,
    })
}

/// Singular part of the essential spectrum on a finite lambda window.
pub fn singular_part(m: &CoefficientModel, window: Interval, opts: &Options) -> Result<SingularPart> {
    let reg = regular_part(m, opts).map_err(|e| e.in_module("regular-spectrum"))?;
    let lb = lambda_beta(m, opts).map_err(|e| e.in_module("regular-spectrum"))?;
    Ok(singular_analysis(m, window, &reg.set, &lb, opts)?.part)
}

/// Membership of a point of `Λβ(D)` in the essential spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PointStatus {
    InRegular,
    InSingularClosure,
    Undetermined,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPoint {
    pub lambda: f64,
    pub status: PointStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAnalysis {
    pub window: Interval,
    pub regular: RegularPart,
    pub lambda_beta: LambdaBetaD,
    pub exceptional: Vec<ExceptionalPoint>,
    pub case: Case,
    pub singular: SingularPart,
    pub structure: Option<StructureCoeffs>,
    pub structure_class: Option<StructureClass>,
    pub radius: RadiusReport,
    /// Union of the regular and singular parts.
    pub essential_spectrum: IntervalSet,
    /// `inf σ_ess,reg ≤ inf Λβ(D)` when both are nonempty.
    pub regular_inf_check: Option<bool>,
}

/// Regular part, `Λβ(D)`, case, singular part, structure and radius.
pub fn essential_spectrum(m: &CoefficientModel, window: Option<Interval>, opts: &Options) -> Result<SpectrumAnalysis> {
    opts.validate()?;
    let reg = regular_part(m, opts).map_err(|e| e.in_module("regular-spectrum"))?;
    let lb = lambda_beta(m, opts).map_err(|e| e.in_module("regular-spectrum"))?;
    let window = window.unwrap_or_else(|| default_window(&reg.set, &lb));
    let sa = singular_analysis(m, window, &reg.set, &lb, opts).map_err(|e| e.in_module("singular-spectrum"))?;
    let part = sa.part;

    let tol = opts.tail_tol * lambda_scale(&reg.set, &lb);
    let exceptional = lb
        .finite_limits
        .iter()
        .map(|&x| {
            let status = if reg.set.contains(x, tol) {
                PointStatus::InRegular
            } else if part.set.contains(x, tol) {
                PointStatus::InSingularClosure
            } else {
                PointStatus::Undetermined
            };
            ExceptionalPoint { lambda: x, status }
        })
        .collect();
    let radius = essential_radius(
        &reg.set,
        &part.set,
        sa.structure.as_ref().zip(sa.class.as_ref()),
        m.dim(),
        lb.j0,
        opts.root_tol,
    );
    let regular_inf_check = match (reg.set.inf(), lb.finite_limits.first()) {
        (Some(r), Some(&l)) => Some(r <= l + opts.tail_tol * (1.0 + l.abs())),
        _ => None,
    };
    Ok(SpectrumAnalysis {
        window,
        essential_spectrum: reg.set.union(&part.set, opts.merge_tol),
        regular: reg,
        lambda_beta: lb,
        exceptional,
        case: part.case,
        singular: part,
        structure: sa.structure,
        structure_class: sa.class,
        radius,
        regular_inf_check,
    })
}

impl SpectrumAnalysis {
    /// Sets the status of the exceptional point nearest `lambda`, unless it is already in the regular part.
    pub fn set_point_status(&mut self, lambda: f64, status: PointStatus, tol: f64) {
        if let Some(p) = self
            .exceptional
            .iter_mut()
            .filter(|p| (p.lambda - lambda).abs() <= tol)
            .min_by(|a, b| (a.lambda - lambda).abs().total_cmp(&(b.lambda - lambda).abs()))
        {
            if p.status != PointStatus::InRegular {
                p.status = status;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scan_finds_quadratic_roots() {
        let eval = |l: f64| Some(5.0 * l - 1.25 * l * l);
        let o = Options::default();
        let r = scan(&eval, Interval::new(-10.0, 10.0), 101, &[], &o);
        let iv = r.set.intervals();
        assert_eq!(iv.len(), 1);
        assert!(iv[0].lo.abs() < 1e-8 && (iv[0].hi - 4.0).abs() < 1e-8, "{iv:?}");
        assert!(!r.left_open && !r.right_open);
    }

    #[test]
    fn gaps_bridge_or_anchor() {
        let o = Options::default();
        let z = zones(&[Interval::point(0.0)], 0.05);
        // non-negative on both sides of the pole: bridged
        let eval = |l: f64| Some(1.0 - l * l);
        let r = scan(&eval, Interval::new(-2.0, 2.0), 41, &z, &o);
        assert_eq!(r.set.len(), 1);
        // non-negative only to the right: anchored at the pole
        let eval = |l: f64| Some(if l > 0.0 { 1.0 } else { -1.0 });
        let r = scan(&eval, Interval::new(-2.0, 2.0), 41, &z, &o);
        assert_eq!(r.set.intervals()[0].lo, 0.0);
        assert!(r.right_open);
        assert_eq!(r.anchored, vec![0.0]);
    }

    #[test]
    fn mixed_cases_rejected() {
        let tag = |case| CaseTag { case, lambda: 0.0, pi0_abs: 0.0, pi1_abs: 0.0, threshold: 0.0 };
        let mut w = vec![];
        assert!(matches!(uniform_case(&[tag(Case::I), tag(Case::III)], &mut w), Err(Error::CaseNotUniform(_))));
        assert_eq!(uniform_case(&[tag(Case::II), tag(Case::Unresolved)], &mut w).unwrap(), Case::II);
        assert_eq!(w.len(), 1);
    }
}
