//! Regular part of the essential spectrum and the exceptional set `Λβ(D)`.
//!
//! The regular part is the closure of the eigenvalue ranges of
//! `Δ(t) = D(t) − b(t)b(t)*/p(t)` over `[alpha, beta)`. `Λβ(D)` collects the
//! finite limits of the eigenvalue branches of `D(t)` as `t → beta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::limits::{extrapolate_values, Ladder, Limit};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::model::{delta_from_point, CoefficientModel, Endpoint};
use crate::options::Options;
use crate::par;

/// Ascending eigenvalues of a matrix family sampled on a parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EigBranches {
    pub grid: Vec<f64>,
    /// `branches[k][i]` is the k-th smallest eigenvalue at `grid[i]`.
    pub branches: Vec<Vec<f64>>,
    /// `continuous[i]` is false when the step `grid[i] → grid[i+1]` still jumps at `min_step`.
    pub continuous: Vec<bool>,
}

impl EigBranches {
    pub fn range(&self, k: usize) -> (f64, f64) {
        self.branches[k]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

const MAX_SAMPLES: usize = 200_000;

fn jumps(a: &[f64], b: &[f64], jump_tol: f64) -> bool {
    a.iter()
        .zip(b)
        .any(|(x, y)| (x - y).abs() > jump_tol * (1.0 + x.abs().max(y.abs())))
}

/// Samples ascending eigenvalues of `f(s)` on `[s0, s1]`, inserting midpoints where
/// neighbouring samples jump by more than `opts.jump_tol` (relative), down to `opts.min_step`.
pub fn eigenvalue_branches<F>(f: F, s0: f64, s1: f64, opts: &Options) -> Result<EigBranches>
where
    F: Fn(f64) -> Result<CMat> + Sync + Send,
{
    let n_grid = opts.t_grid.max(2);
    let eval = |s: &f64| -> Result<Vec<f64>> { hermitian_eigenvalues(&f(*s)?) };
    let mut grid: Vec<f64> = (0..n_grid)
        .map(|i| s0 + (s1 - s0) * i as f64 / (n_grid - 1) as f64)
        .collect();
    let mut vals: Vec<Vec<f64>> = par::map(opts.execution, &grid, eval).into_iter().collect::<Result<_>>()?;
    let min_step = opts.min_step * (s1 - s0).abs().max(f64::MIN_POSITIVE);
    loop {
        let mids: Vec<f64> = (0..grid.len() - 1)
            .filter(|&i| grid[i + 1] - grid[i] > 2.0 * min_step && jumps(&vals[i], &vals[i + 1], opts.jump_tol))
            .map(|i| 0.5 * (grid[i] + grid[i + 1]))
            .collect();
        if mids.is_empty() || grid.len() + mids.len() > MAX_SAMPLES {
            break;
        }
        let new_vals: Vec<Vec<f64>> = par::map(opts.execution, &mids, eval).into_iter().collect::<Result<_>>()?;
        let mut merged: Vec<(f64, Vec<f64>)> = grid.into_iter().zip(vals).chain(mids.into_iter().zip(new_vals)).collect();
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        (grid, vals) = merged.into_iter().unzip();
    }
    let continuous = (0..grid.len() - 1)
        .map(|i| !jumps(&vals[i], &vals[i + 1], opts.jump_tol))
        .collect();
    let n = vals.first().map_or(0, Vec::len);
    let branches = (0..n).map(|k| vals.iter().map(|v| v[k]).collect()).collect();
    Ok(EigBranches { grid, branches, continuous })
}

/// Golden-section search for an extremum of `g` on `[a, b]`; returns the extreme value found.
fn golden_extremum<G: Fn(f64) -> Result<f64>>(g: G, mut a: f64, mut b: f64, maximize: bool, tol: f64) -> Result<f64> {
    let sgn = if maximize { -1.0 } else { 1.0 };
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (sgn * g(c)?, sgn * g(d)?);
    let mut best = fc.min(fd);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = sgn * g(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = sgn * g(d)?;
        }
        best = best.min(fc).min(fd);
    }
    Ok(sgn * best)
}

/// Range of one eigenvalue branch of `Δ` over `[alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchRange {
    #[serde(with = "crate::interval::ext_real")]
    pub min: f64,
    #[serde(with = "crate::interval::ext_real")]
    pub max: f64,
    pub limit: Limit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularPart {
    pub set: IntervalSet,
    pub branches: Vec<BranchRange>,
    pub samples: usize,
    pub warnings: Vec<String>,
}

/// Unit-coordinate end of the sampled window; the geometric tail ladder starts there.
fn window_end(m: &CoefficientModel, opts: &Options) -> f64 {
    let ladder = Ladder::new(m.alpha, m.beta, opts.h0_fraction, opts.ratio, 0, 1);
    let t0 = ladder.t[0];
    match m.beta {
        Endpoint::Finite(b) => (t0 - m.alpha) / (b - m.alpha),
        Endpoint::Infinite => (t0 - m.alpha) / (1.0 + t0 - m.alpha),
    }
}

fn delta_eigs(m: &CoefficientModel, t: f64) -> Result<Vec<f64>> {
    hermitian_eigenvalues(&delta_from_point(&m.eval(t)?))
}

pub fn regular_part(m: &CoefficientModel, opts: &Options) -> Result<RegularPart> {
    let n = m.dim();
    let u_end = window_end(m, opts);
    let eb = eigenvalue_branches(|u| Ok(delta_from_point(&m.eval(m.from_unit(u))?)), 0.0, u_end, opts)?;
    let mut warnings = Vec::new();
    if eb.continuous.iter().any(|c| !c) {
        warnings.push("eigenvalue branch of Δ jumps at the finest sampling step".to_string());
    }

    let ladder = Ladder::new(m.alpha, m.beta, opts.h0_fraction, opts.ratio, 0, opts.levels);
    let tail: Vec<Vec<f64>> = par::map(opts.execution, &ladder.t, |&t| delta_eigs(m, t))
        .into_iter()
        .collect::<Result<_>>()?;

    let tol_u = opts.refine_tol * 1e-3;
    let mut ranges = Vec::with_capacity(n);
    for k in 0..n {
        let branch = &eb.branches[k];
        let at = |u: f64| -> Result<f64> { Ok(delta_eigs(m, m.from_unit(u))?[k]) };
        let at_t = |t: f64| -> Result<f64> { Ok(delta_eigs(m, t)?[k]) };
        let (mut lo, mut hi) = eb.range(k);
        let last = branch.len() - 1;
        let imin = (0..=last).min_by(|&a, &b| branch[a].total_cmp(&branch[b])).unwrap_or(0);
        let imax = (0..=last).max_by(|&a, &b| branch[a].total_cmp(&branch[b])).unwrap_or(0);
        if imin > 0 && imin < last {
            lo = lo.min(golden_extremum(&at, eb.grid[imin - 1], eb.grid[imin + 1], false, tol_u)?);
        }
        if imax > 0 && imax < last {
            hi = hi.max(golden_extremum(&at, eb.grid[imax - 1], eb.grid[imax + 1], true, tol_u)?);
        }

        let tv: Vec<f64> = tail.iter().map(|v| v[k]).collect();
        for &v in &tv {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        // extrema strictly inside the ladder
        let jmin = (0..tv.len()).min_by(|&a, &b| tv[a].total_cmp(&tv[b])).unwrap_or(0);
        let jmax = (0..tv.len()).max_by(|&a, &b| tv[a].total_cmp(&tv[b])).unwrap_or(0);
        let tol_t = tol_u * m.span();
        if jmin > 0 && jmin + 1 < tv.len() {
            lo = lo.min(golden_extremum(&at_t, ladder.t[jmin - 1], ladder.t[jmin + 1], false, tol_t)?);
        }
        if jmax > 0 && jmax + 1 < tv.len() {
            hi = hi.max(golden_extremum(&at_t, ladder.t[jmax - 1], ladder.t[jmax + 1], true, tol_t)?);
        }

        let limit = extrapolate_values(&tv, opts.ratio, opts.diverge_threshold);
        match limit {
            Limit::Finite { value, err } => {
                if err > opts.tail_tol * (1.0 + value.abs()) {
                    warnings.push(format!("branch {k} of Δ: limit at beta uncertain (err {err:.3e})"));
                }
                lo = lo.min(value);
                hi = hi.max(value);
            }
            Limit::Diverged { sign } if sign > 0 => hi = f64::INFINITY,
            Limit::Diverged { .. } => lo = f64::NEG_INFINITY,
            Limit::Oscillatory => {
                warnings.push(format!("branch {k} of Δ has no detectable limit at beta; sampled range used"));
            }
        }
        ranges.push(BranchRange { min: lo, max: hi, limit });
    }
    let set = IntervalSet::from_intervals(
        ranges.iter().map(|r| Interval::new(r.min, r.max)).collect(),
        opts.merge_tol,
    );
    Ok(RegularPart {
        set,
        branches: ranges,
        samples: eb.grid.len() + ladder.len(),
        warnings,
    })
}

/// Limit behaviour of one eigenvalue branch of `D` at beta.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchLimit {
    pub limit: Limit,
    pub improper: bool,
    /// Fitted `a` in `|λ_k(t)| ~ (beta − t)^(−a)` for diverging branches (reported, not judged).
    pub growth_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaBetaD {
    /// Deduplicated finite limits, ascending.
    pub finite_limits: Vec<f64>,
    pub limit_errors: Vec<f64>,
    /// Number of branches with a proper (finite) limit.
    pub j0: usize,
    pub improper: usize,
    /// Branches where neither a limit nor divergence was detected.
    pub undecided: usize,
    pub branches: Vec<BranchLimit>,
    pub warnings: Vec<String>,
}

impl LambdaBetaD {
    pub fn max_abs(&self) -> f64 {
        self.finite_limits.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn distance(&self, x: f64) -> f64 {
        self.finite_limits.iter().fold(f64::INFINITY, |m, l| m.min((x - l).abs()))
    }
}

const DEEP_LEVELS: usize = 40;

pub fn lambda_beta(m: &CoefficientModel, opts: &Options) -> Result<LambdaBetaD> {
    let n = m.dim();
    let deep = Ladder::new(m.alpha, m.beta, opts.h0_fraction, opts.ratio, 0, DEEP_LEVELS);
    // nodes that round onto beta are dropped
    let usable: Vec<usize> = (0..deep.len())
        .filter(|&i| match m.beta {
            Endpoint::Finite(b) => deep.t[i] < b,
            Endpoint::Infinite => deep.t[i].is_finite(),
        })
        .collect();
    let ts: Vec<f64> = usable.iter().map(|&i| deep.t[i]).collect();
    let hs: Vec<f64> = usable.iter().map(|&i| deep.h[i]).collect();
    let eigs: Vec<Result<Vec<f64>>> =
        par::map(opts.execution, &ts, |&t| m.eval(t).and_then(|pt| hermitian_eigenvalues(&pt.d.v)));
    // keep the prefix that evaluates cleanly
    let mut vals = Vec::new();
    for e in eigs {
        match e {
            Ok(v) if v.iter().all(|x| x.is_finite()) => vals.push(v),
            _ => break,
        }
    }
    if vals.len() < opts.levels {
        return Err(Error::numeric("cannot evaluate D(t) on the tail ladder"));
    }

    let mut branches = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    let mut finite: Vec<(f64, f64)> = Vec::new();
    let (mut improper, mut undecided) = (0, 0);
    for k in 0..n {
        let seq: Vec<f64> = vals.iter().map(|v| v[k]).collect();
        let std = extrapolate_values(&seq[..opts.levels], opts.ratio, opts.diverge_threshold);
        let l = seq.len();
        let last3 = &seq[l - 3..];
        let beyond = last3.iter().all(|x| x.abs() > opts.diverge_threshold)
            && last3.windows(2).all(|w| w[1].abs() > w[0].abs());
        let monotone_growth = seq[opts.levels - 1..].windows(2).all(|w| w[1].abs() > w[0].abs());
        let is_improper = match std {
            Limit::Finite { .. } => beyond,
            Limit::Diverged { .. } => {
                if !beyond && monotone_growth {
                    warnings.push(format!(
                        "branch {k} of D grows without reaching the divergence threshold; treated as improper"
                    ));
                }
                beyond || monotone_growth
            }
            Limit::Oscillatory => beyond,
        };
        let exponent = if is_improper {
            let pts: Vec<(f64, f64)> = (l.saturating_sub(10)..l)
                .filter(|&i| seq[i] != 0.0)
                .map(|i| (hs[i].ln(), seq[i].abs().ln()))
                .collect();
            slope(&pts).map(|s| -s)
        } else {
            None
        };
        if is_improper {
            improper += 1;
            let sign = if seq[l - 1] > 0.0 { 1 } else { -1 };
            branches.push(BranchLimit {
                limit: Limit::Diverged { sign },
                improper: true,
                growth_exponent: exponent,
            });
            continue;
        }
        match std {
            Limit::Finite { value, err } => {
                if err > opts.tail_tol * (1.0 + value.abs()) {
                    warnings.push(format!("branch {k} of D: limit {value} has error {err:.3e}"));
                }
                finite.push((value, err));
            }
            _ => {
                undecided += 1;
                warnings.push(format!("branch {k} of D: no limit detected at beta"));
            }
        }
        branches.push(BranchLimit {
            limit: std,
            improper: false,
            growth_exponent: None,
        });
    }
    let j0 = finite.len();
    finite.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut finite_limits: Vec<f64> = Vec::new();
    let mut limit_errors: Vec<f64> = Vec::new();
    for (v, e) in finite {
        match (finite_limits.last(), limit_errors.last_mut()) {
            (Some(&last), Some(le)) if (v - last).abs() <= (opts.merge_tol * (1.0 + v.abs())).max(10.0 * (e + *le)) => {
                *le = le.max(e);
            }
            _ => {
                finite_limits.push(v);
                limit_errors.push(e);
            }
        }
    }
    Ok(LambdaBetaD {
        finite_limits,
        limit_errors,
        j0,
        improper,
        undecided,
        branches,
        warnings,
    })
}

/// Least-squares slope of `y` against `x`.
fn slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), p| (a + (p.0 - mx) * (p.1 - my), b + (p.0 - mx).powi(2)));
    (den > 0.0).then(|| num / den)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::expr::{parse_expr, Expr};
    use crate::linalg::C64;
    use crate::model::{ComplexExpr, ExprCoefficients};

    fn diag_model(p: &str, b: [&str; 2], d: [&str; 2]) -> CoefficientModel {
        let src = ExprCoefficients::new(
            parse_expr(p).unwrap(),
            Expr::Const(0.0),
            b.iter().map(|s| ComplexExpr::real(parse_expr(s).unwrap())).collect(),
            vec![ComplexExpr::real(Expr::Const(0.0)); 2],
            d.iter().map(|s| parse_expr(s).unwrap()).collect(),
            vec![ComplexExpr::real(Expr::Const(0.0))],
        )
        .unwrap();
        CoefficientModel::new("m", 0.0, Endpoint::Finite(1.0), Arc::new(src)).unwrap()
    }

    #[test]
    fn diagonal_branches() {
        let f = |t: f64| {
            Ok(CMat::from_row_slice(2, 2, &[C64::new(t, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(2.0 - t, 0.0)]))
        };
        let eb = eigenvalue_branches(f, 0.0, 0.999, &Options::default()).unwrap();
        let (lo0, hi0) = eb.range(0);
        let (lo1, hi1) = eb.range(1);
        assert!(lo0.abs() < 1e-15 && (hi0 - 1.0).abs() < 2e-3);
        assert!((lo1 - 1.0).abs() < 2e-3 && (hi1 - 2.0).abs() < 1e-15);
        let c = eigenvalue_branches(|_| Ok(CMat::identity(2, 2)), 0.0, 1.0, &Options::default()).unwrap();
        assert_eq!(c.range(0), (1.0, 1.0));
    }

    #[test]
    fn regular_part_of_diagonal_model() {
        // b = 0, D = diag(t, 2 − t): ranges [0, 1] and [1, 2] merge into [0, 2]
        let m = diag_model("1", ["0", "0"], ["t", "2-t"]);
        let reg = regular_part(&m, &Options::default()).unwrap();
        assert_eq!(reg.set.len(), 1);
        let iv = reg.set.intervals()[0];
        assert!(iv.lo.abs() < 1e-12 && (iv.hi - 2.0).abs() < 1e-9, "{iv:?}");
    }

    #[test]
    fn interior_extremum_is_polished() {
        // b = 0, first branch (t − 1/3)² + 1/2 has its minimum strictly inside a grid cell
        let m = diag_model("1", ["0", "0"], ["(t-1/3)^2 + 0.5", "7"]);
        let reg = regular_part(&m, &Options::default()).unwrap();
        assert!((reg.branches[0].min - 0.5).abs() < 1e-12);
        assert!((reg.branches[0].max - (4.0 / 9.0 + 0.5)).abs() < 1e-12);
    }

    #[test]
    fn unbounded_branch_becomes_ray() {
        let m = diag_model("1", ["0", "0"], ["1/(1-t)", "-1/(1-t)^2"]);
        let reg = regular_part(&m, &Options::default()).unwrap();
        assert_eq!(reg.set.intervals().len(), 2);
        assert_eq!(reg.set.intervals()[0].lo, f64::NEG_INFINITY);
        assert!((reg.set.intervals()[0].hi + 1.0).abs() < 1e-12);
        assert!((reg.set.intervals()[1].lo - 1.0).abs() < 1e-12);
        assert_eq!(reg.set.intervals()[1].hi, f64::INFINITY);
    }

    #[test]
    fn lambda_beta_mixed_branches() {
        let m = diag_model("1", ["0", "0"], ["3 + (1-t)", "1/(1-t)^2"]);
        let lb = lambda_beta(&m, &Options::default()).unwrap();
        assert_eq!((lb.j0, lb.improper), (1, 1));
        assert!((lb.finite_limits[0] - 3.0).abs() < 1e-10);
        let a = lb.branches[1].growth_exponent.unwrap();
        assert!((a - 2.0).abs() < 1e-3, "{a}");
    }
}
