//! Rational structure of `−π₂`, `−ϰ₀` and `r₁` at beta, its sign-table class, and the
//! essential spectral radius.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::asymptotic::{asym_coeffs, classify_case, AsymCoeffs, Case};
use crate::error::{Error, Result};
use crate::interval::IntervalSet;
use crate::limits::{extrapolate_values, Ladder, Limit};
use crate::linalg::{dotc, hermitian_eigen};
use crate::model::CoefficientModel;
use crate::options::Options;
use crate::par;
use crate::regular::LambdaBetaD;

/// Nevanlinna coefficients below this are rounding noise and clamp to zero.
const NEVANLINNA_SLACK: f64 = 1e-10;

/// Relative agreement required between the fitted and the directly extrapolated coefficients.
const CROSS_CHECK_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectLimits {
    pub f_beta: Limit,
    pub g_beta: Limit,
    /// `(pole, lim σ_j/(beta − t)²)`, summed over branches sharing a pole.
    pub sigma_beta: Vec<(f64, Limit)>,
    /// Largest relative deviation from the fitted values.
    #[serde(with = "crate::interval::ext_real")]
    pub max_deviation: f64,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCoeffs {
    pub f_beta: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub g_beta: f64,
    pub sigma_beta: Vec<(f64, f64)>,
    pub phi_beta: f64,
    pub psi_beta: f64,
    pub mu_beta: Vec<(f64, f64)>,
    pub h_beta: f64,
    pub fit_residual: f64,
    pub reliable: bool,
    /// Lambdas at which the limits were sampled for the fit.
    pub sample_lambdas: Vec<f64>,
    pub direct: Option<DirectLimits>,
    pub warnings: Vec<String>,
}

fn rational(f: f64, g: f64, terms: &[(f64, f64)], lambda: f64) -> f64 {
    terms.iter().fold(f + g * lambda, |acc, &(pole, w)| acc + w / (pole - lambda))
}

impl StructureCoeffs {
    pub fn neg_pi2(&self, lambda: f64) -> f64 {
        rational(self.f_beta, self.g_beta, &self.sigma_beta, lambda)
    }

    pub fn neg_varkappa0(&self, lambda: f64) -> f64 {
        rational(self.phi_beta, self.psi_beta, &self.mu_beta, lambda)
    }

    /// `r₁² − ϰ₀π₂ − ¼π₂²` from the fitted functions.
    pub fn scaled_discriminant(&self, lambda: f64) -> f64 {
        let a = self.neg_pi2(lambda);
        let b = self.neg_varkappa0(lambda);
        self.h_beta * self.h_beta - a * b - 0.25 * a * a
    }

    pub fn sigma_sum(&self) -> f64 {
        self.sigma_beta.iter().map(|s| s.1).sum()
    }

    fn scale(&self) -> f64 {
        1.0 + self.f_beta.abs() + self.g_beta.abs() + self.phi_beta.abs() + self.psi_beta.abs() + self.h_beta.abs()
    }
}

/// Least squares `y ≈ f + gλ + Σ w_j/(p_j − λ)`; returns `(f, g, w, max residual)`.
fn fit_rational(lambdas: &[f64], ys: &[f64], poles: &[f64]) -> Result<(f64, f64, Vec<f64>, f64)> {
    let (rows, cols) = (lambdas.len(), 2 + poles.len());
    let a = DMatrix::from_fn(rows, cols, |i, j| match j {
        0 => 1.0,
        1 => lambdas[i],
        _ => 1.0 / (poles[j - 2] - lambdas[i]),
    });
    let y = DVector::from_column_slice(ys);
    let x = a
        .clone()
        .svd(true, true)
        .solve(&y, 1e-14)
        .map_err(|e| Error::numeric(format!("structure fit: {e}")))?;
    let res = (&a * &x - &y).amax();
    Ok((x[0], x[1], x.iter().skip(2).copied().collect(), res))
}

fn clamp_nevanlinna(v: &mut f64, name: &str, warnings: &mut Vec<String>) -> bool {
    if *v < -NEVANLINNA_SLACK * 1e4 {
        warnings.push(format!("{name} = {v:e} is negative; -pi2 is not a Nevanlinna function here"));
        return false;
    }
    if *v < NEVANLINNA_SLACK {
        *v = v.max(0.0);
    }
    true
}

/// Fits the structure coefficients from limits sampled at admissible lambdas in Case III.
///
/// `candidates` are lambdas away from the regular part and `Λβ(D)`; the fit uses
/// `4 + 2·j0` of them spread evenly, and `r₁` is compared at three.
pub fn structure_coeffs(
    m: &CoefficientModel,
    lb: &LambdaBetaD,
    candidates: &[f64],
    opts: &Options,
) -> Result<StructureCoeffs> {
    if !m.beta.is_finite() {
        return Err(Error::numeric("structure coefficients need a finite endpoint beta"));
    }
    let needed = 4 + 2 * lb.j0;
    if candidates.len() < needed {
        return Err(Error::numeric(format!(
            "only {} admissible lambdas for a fit needing {needed}",
            candidates.len()
        )));
    }
    // oversample so that a few unreliable limits can be dropped
    let pool = spread(candidates, (3 * needed).min(candidates.len()));
    let coeffs: Vec<Result<AsymCoeffs>> = par::map(opts.execution, &pool, |&l| asym_coeffs(m, l, opts));
    let loose = opts.limit_tol * 100.0;
    let mut good: Vec<(f64, f64, f64, f64, f64)> = Vec::new();
    for c in coeffs.into_iter().flatten() {
        let case = classify_case(&c, opts.eps_class).case;
        if matches!(case, Case::I | Case::II) {
            return Err(Error::NotCaseIII(format!("lambda = {} is in Case {case:?}", c.lambda)));
        }
        let Some(pi2) = c.pi2 else { continue };
        if pi2.reliable(loose) && c.varkappa0.reliable(loose) && c.r1.reliable(loose) {
            let v = |l: &Limit| l.value().unwrap_or(f64::NAN);
            good.push((c.lambda, v(&pi2), v(&c.varkappa0), v(&c.r1), c.r1.err()));
        }
    }
    if good.len() < needed {
        return Err(Error::numeric(format!(
            "only {} of {} sampled lambdas gave reliable Case III limits",
            good.len(),
            pool.len()
        )));
    }
    let picked: Vec<(f64, f64, f64, f64, f64)> = spread(&good, needed);
    let lambdas: Vec<f64> = picked.iter().map(|p| p.0).collect();
    let poles = &lb.finite_limits;

    let neg_pi2: Vec<f64> = picked.iter().map(|p| -p.1).collect();
    let neg_k0: Vec<f64> = picked.iter().map(|p| -p.2).collect();
    let (f, mut g, w_sigma, res_pi) = fit_rational(&lambdas, &neg_pi2, poles)?;
    let (phi, psi, w_mu, res_k) = fit_rational(&lambdas, &neg_k0, poles)?;
    let ymax = neg_pi2.iter().chain(&neg_k0).fold(0.0f64, |m, y| m.max(y.abs()));
    let fit_residual = res_pi.max(res_k) / (1.0 + ymax);

    let mut warnings = Vec::new();
    let mut reliable = fit_residual <= opts.fit_tol;
    if !reliable {
        warnings.push(format!("fit residual {fit_residual:.3e} exceeds fit_tol"));
    }
    reliable &= clamp_nevanlinna(&mut g, "g_beta", &mut warnings);
    let mut sigma_beta = Vec::with_capacity(poles.len());
    for (k, (&p, &w)) in poles.iter().zip(&w_sigma).enumerate() {
        let mut w = w;
        reliable &= clamp_nevanlinna(&mut w, &format!("sigma_{}", k + 1), &mut warnings);
        sigma_beta.push((p, w));
    }
    let mu_beta: Vec<(f64, f64)> = poles.iter().copied().zip(w_mu).collect();

    // r₁ must not depend on λ
    let trio = spread(&picked, 3);
    let hs: Vec<f64> = trio.iter().map(|p| p.3).collect();
    let herr = trio.iter().fold(0.0f64, |m, p| m.max(p.4));
    let h = hs.iter().sum::<f64>() / hs.len() as f64;
    let spread_h = hs.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - hs.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if spread_h > (opts.fit_tol * (1.0 + h.abs())).max(10.0 * herr) {
        return Err(Error::numeric(format!(
            "r1 depends on lambda (values {hs:?}); the structure description does not apply"
        )));
    }

    let mut s = StructureCoeffs {
        f_beta: f,
        g_beta: g,
        sigma_beta,
        phi_beta: phi,
        psi_beta: psi,
        mu_beta,
        h_beta: h,
        fit_residual,
        reliable,
        sample_lambdas: lambdas,
        direct: None,
        warnings,
    };
    match direct_limits(m, lb, &s, opts) {
        Ok(d) => {
            if !d.agrees {
                s.warnings.push(format!(
                    "fitted and directly extrapolated coefficients differ by {:.3e}",
                    d.max_deviation
                ));
            }
            s.direct = Some(d);
        }
        Err(e) => s.warnings.push(format!("direct limits unavailable: {e}")),
    }
    Ok(s)
}

/// `k` items spread evenly over `xs`, including both ends.
fn spread<T: Clone>(xs: &[T], k: usize) -> Vec<T> {
    let n = xs.len();
    if k >= n {
        return xs.to_vec();
    }
    if k == 1 {
        return vec![xs[n / 2].clone()];
    }
    (0..k).map(|i| xs[(i * (n - 1) + (k - 1) / 2) / (k - 1)].clone()).collect()
}

/// `f_β`, `g_β`, `σ_j,β` from the eigen-decomposition of `D(t)` on the tail ladder.
fn direct_limits(m: &CoefficientModel, lb: &LambdaBetaD, fit: &StructureCoeffs, opts: &Options) -> Result<DirectLimits> {
    let ladder = Ladder::new(m.alpha, m.beta, opts.h0_fraction, opts.ratio, 0, opts.levels);
    let proper: Vec<bool> = lb.branches.iter().map(|b| !b.improper && matches!(b.limit, Limit::Finite { .. })).collect();
    let poles = &lb.finite_limits;
    let rows: Vec<Result<(f64, f64, Vec<f64>)>> = par::map(opts.execution, &(0..ladder.len()).collect::<Vec<_>>(), |&i| {
        let (t, h) = (ladder.t[i], ladder.h[i]);
        let pt = m.eval(t)?;
        let (vals, vecs) = hermitian_eigen(&pt.d.v)?;
        let (mut f, mut g) = (-pt.p.value, 0.0);
        let mut sig = vec![0.0; poles.len()];
        for (k, &l) in vals.iter().enumerate() {
            let s = dotc(&vecs.column(k).into_owned(), &pt.b.v).norm_sqr();
            if proper.get(k).copied().unwrap_or(false) {
                let j = nearest(poles, lb.branches[k].limit.value().unwrap_or(l));
                sig[j] += s;
            } else {
                f += s / l;
                g += s / (l * l);
            }
        }
        let h2 = h * h;
        Ok((f / h2, g / h2, sig.into_iter().map(|s| s / h2).collect()))
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let ex = |v: Vec<f64>| extrapolate_values(&v, opts.ratio, opts.diverge_threshold);
    let f_beta = ex(rows.iter().map(|r| r.0).collect());
    let g_beta = ex(rows.iter().map(|r| r.1).collect());
    let sigma_beta: Vec<(f64, Limit)> = (0..poles.len())
        .map(|j| (poles[j], ex(rows.iter().map(|r| r.2[j]).collect())))
        .collect();

    let dev = |l: &Limit, fitted: f64| match l.value() {
        Some(v) => (v - fitted).abs() / (1.0 + fitted.abs()),
        None => f64::INFINITY,
    };
    let mut max_deviation = dev(&f_beta, fit.f_beta).max(dev(&g_beta, fit.g_beta));
    for ((_, l), (_, w)) in sigma_beta.iter().zip(&fit.sigma_beta) {
        max_deviation = max_deviation.max(dev(l, *w));
    }
    Ok(DirectLimits {
        f_beta,
        g_beta,
        sigma_beta,
        max_deviation,
        agrees: max_deviation <= CROSS_CHECK_TOL,
    })
}

fn nearest(xs: &[f64], x: f64) -> usize {
    (0..xs.len())
        .min_by(|&a, &b| (xs[a] - x).abs().total_cmp(&(xs[b] - x).abs()))
        .unwrap_or(0)
}

/// Sign-table branches for the closure of the discriminant set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureBranch {
    /// At most `j0 + 1` compact intervals.
    A1,
    /// Two rays and at most `j0` compact intervals.
    A2,
    /// A left ray and at most `j0` compact intervals.
    B1,
    /// A right ray and at most `j0` compact intervals.
    B2,
    /// At most `j0` compact intervals.
    C1,
    /// Two rays and at most `j0 − 1` compact intervals.
    C2,
    /// A guard quantity vanishes within tolerance.
    Degenerate,
    /// The endpoint beta is infinite.
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureClass {
    pub branch: StructureBranch,
    /// Bound on the number of compact intervals.
    pub interval_count_bound: Option<usize>,
    /// Whether the set contains a ray to `−∞` and to `+∞`.
    pub left_ray: bool,
    pub right_ray: bool,
    #[serde(with = "crate::interval::ext_real")]
    pub g_beta: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub g4psi: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub f_psi: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub hsum: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub zero_tol: f64,
}

impl StructureClass {
    pub fn unclassified() -> Self {
        StructureClass {
            branch: StructureBranch::Unclassified,
            interval_count_bound: None,
            left_ray: false,
            right_ray: false,
            g_beta: f64::NAN,
            g4psi: f64::NAN,
            f_psi: f64::NAN,
            hsum: f64::NAN,
            zero_tol: f64::NAN,
        }
    }
}

pub fn classify_structure(s: &StructureCoeffs, j0: usize, opts: &Options) -> StructureClass {
    use StructureBranch::*;
    let tol = 10.0 * opts.fit_tol * s.scale();
    let g = s.g_beta;
    let g4psi = g + 4.0 * s.psi_beta;
    let f_psi = s.f_beta * s.psi_beta;
    let hsum = s.h_beta * s.h_beta + s.psi_beta * s.sigma_sum();
    let (branch, bound, left, right) = if g > tol {
        if g4psi > tol {
            (A1, Some(j0 + 1), false, false)
        } else if g4psi < -tol {
            (A2, Some(j0), true, true)
        } else {
            (Degenerate, None, false, false)
        }
    } else if s.f_beta.abs() > tol {
        if f_psi > tol * tol {
            (B1, Some(j0), true, false)
        } else if f_psi < -tol * tol {
            (B2, Some(j0), false, true)
        } else {
            (Degenerate, None, false, false)
        }
    } else if hsum < -tol {
        (C1, Some(j0), false, false)
    } else if hsum > tol {
        (C2, Some(j0.saturating_sub(1)), true, true)
    } else {
        (Degenerate, None, false, false)
    };
    StructureClass {
        branch,
        interval_count_bound: bound,
        left_ray: left,
        right_ray: right,
        g_beta: g,
        g4psi,
        f_psi,
        hsum,
        zero_tol: tol,
    }
}

/// Endpoints `λ±` of the discriminant set for scalar `D` without proper limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormRadius {
    pub m: f64,
    pub n: f64,
    pub k: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub lambda_minus: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub lambda_plus: f64,
    /// Whether the computed singular part is `[λ−, λ+]` within tolerance.
    pub agrees: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    #[serde(with = "crate::interval::ext_real")]
    pub radius: f64,
    pub closed_form: Option<ClosedFormRadius>,
}

pub fn closed_form_radius(s: &StructureCoeffs) -> (f64, f64, f64, f64, f64) {
    let (f, g, phi, psi, h) = (s.f_beta, s.g_beta, s.phi_beta, s.psi_beta, s.h_beta);
    let m = g * (g + 4.0 * psi);
    let n = f * (g + 2.0 * psi) + 2.0 * g * phi;
    let k = f * (f + 4.0 * phi) - 4.0 * h * h;
    let root = (n * n - m * k).sqrt();
    (m, n, k, (-n - root) / m, (-n + root) / m)
}

/// `sup |λ|` over the regular and singular parts, with the scalar closed-form cross-check.
pub fn essential_radius(
    reg: &IntervalSet,
    sing: &IntervalSet,
    structure: Option<(&StructureCoeffs, &StructureClass)>,
    n: usize,
    j0: usize,
    root_tol: f64,
) -> RadiusReport {
    let radius = reg.sup_abs().max(sing.sup_abs());
    let closed_form = match structure {
        Some((s, c)) if n == 1 && j0 == 0 && c.branch == StructureBranch::A1 => {
            let (m, nn, k, lm, lp) = closed_form_radius(s);
            let agrees = match sing.intervals() {
                [] => !(lm <= lp),
                [i] => {
                    let tol = |x: f64| 10.0 * root_tol * (1.0 + x.abs());
                    (i.lo - lm).abs() <= tol(lm) && (i.hi - lp).abs() <= tol(lp)
                }
                _ => false,
            };
            Some(ClosedFormRadius { m, n: nn, k, lambda_minus: lm, lambda_plus: lp, agrees })
        }
        _ => None,
    };
    RadiusReport { radius, closed_form }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::Interval;

    fn coeffs(f: f64, g: f64, phi: f64, psi: f64, h: f64) -> StructureCoeffs {
        StructureCoeffs {
            f_beta: f,
            g_beta: g,
            sigma_beta: vec![],
            phi_beta: phi,
            psi_beta: psi,
            mu_beta: vec![],
            h_beta: h,
            fit_residual: 0.0,
            reliable: true,
            sample_lambdas: vec![],
            direct: None,
            warnings: vec![],
        }
    }

    #[test]
    fn sign_table_rows() {
        let o = Options::default();
        let c = classify_structure(&coeffs(0.0, 1.0, -5.0, 1.0, 0.0), 0, &o);
        assert_eq!((c.branch, c.interval_count_bound), (StructureBranch::A1, Some(1)));
        let c = classify_structure(&coeffs(0.0, 1.0, 0.0, -1.0, 0.0), 0, &o);
        assert_eq!(c.branch, StructureBranch::A2);
        assert!(c.left_ray && c.right_ray);
        let c = classify_structure(&coeffs(1.0, 0.0, 0.0, 1.0, 0.0), 2, &o);
        assert_eq!((c.branch, c.left_ray, c.right_ray), (StructureBranch::B1, true, false));
        let c = classify_structure(&coeffs(1.0, 0.0, 0.0, -1.0, 0.0), 2, &o);
        assert_eq!(c.branch, StructureBranch::B2);
        let c = classify_structure(&coeffs(0.0, 1.0, 0.0, -0.25, 0.0), 0, &o);
        assert_eq!(c.branch, StructureBranch::Degenerate);
        let c = classify_structure(&coeffs(0.0, 0.0, 0.0, 1.0, 1.0), 1, &o);
        assert_eq!((c.branch, c.interval_count_bound), (StructureBranch::C2, Some(0)));
    }

    #[test]
    fn closed_form_unit_example() {
        let s = coeffs(0.0, 1.0, -5.0, 1.0, 0.0);
        let (m, n, k, lm, lp) = closed_form_radius(&s);
        assert_eq!((m, n, k, lm, lp), (5.0, -10.0, 0.0, 0.0, 4.0));
        let c = classify_structure(&s, 0, &Options::default());
        let sing = IntervalSet::from_intervals(vec![Interval::new(0.0, 4.0)], 0.0);
        let reg = IntervalSet::from_intervals(vec![Interval::point(0.0)], 0.0);
        let r = essential_radius(&reg, &sing, Some((&s, &c)), 1, 0, 1e-9);
        assert_eq!(r.radius, 4.0);
        assert!(r.closed_form.unwrap().agrees);
    }

    #[test]
    fn fit_recovers_rational() {
        let poles = [2.0];
        let ls = [-3.0, -1.0, 0.5, 1.0, 3.0, 4.0];
        let ys: Vec<f64> = ls.iter().map(|&l| 1.5 + 0.5 * l + 0.75 / (2.0 - l)).collect();
        let (f, g, w, res) = fit_rational(&ls, &ys, &poles).unwrap();
        assert!((f - 1.5).abs() < 1e-12 && (g - 0.5).abs() < 1e-12 && (w[0] - 0.75).abs() < 1e-12);
        assert!(res < 1e-12);
    }

    #[test]
    fn spread_keeps_ends() {
        let xs: Vec<usize> = (0..10).collect();
        assert_eq!(spread(&xs, 3), vec![0, 5, 9]);
        assert_eq!(spread(&xs, 2), vec![0, 9]);
    }
}
