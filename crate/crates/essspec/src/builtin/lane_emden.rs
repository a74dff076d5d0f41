//! Lane–Emden function `θ″ + 2θ′/t = −θⁿ/α²`, `θ(0) = 1`, `θ′(0) = 0`, up to its first zero.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaneEmdenOptions {
    /// Give up if no zero is found before this `t` (in units of `α`).
    pub t_max: f64,
    /// Largest step, in units of `α`.
    pub max_step: f64,
    /// Local error tolerance per step.
    pub tol: f64,
    /// Series launch point `ξ₀ = t₀/α`.
    pub xi0: f64,
}

impl Default for LaneEmdenOptions {
    fn default() -> Self {
        LaneEmdenOptions { t_max: 1e4, max_step: 1e-3, tol: 1e-13, xi0: 1e-3 }
    }
}

/// Accepted integration nodes up to and including the step that crosses the zero.
#[derive(Debug, Clone, Serialize)]
pub struct LaneEmdenSolution {
    pub n_poly: f64,
    pub alpha: f64,
    /// First zero `R`.
    pub radius: f64,
    pub t: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_d1: Vec<f64>,
    /// Largest ODE residual of the dense output at step midpoints on `[t₀, R]`.
    pub max_residual: f64,
}

fn source(theta: f64, n: f64) -> f64 {
    if n == 0.0 {
        1.0
    } else {
        theta.max(0.0).powf(n)
    }
}

impl LaneEmdenSolution {
    /// `θ″` from the equation itself.
    pub fn second(&self, t: f64, theta: f64, theta_d1: f64) -> f64 {
        -source(theta, self.n_poly) / (self.alpha * self.alpha) - 2.0 * theta_d1 / t
    }

    /// `θ‴` by differentiating the equation; requires `θ > 0` when `0 < n < 1`.
    pub fn third(&self, t: f64, theta: f64, theta_d1: f64, theta_d2: f64) -> f64 {
        let n = self.n_poly;
        let src_d = if n == 0.0 { 0.0 } else { n * theta.max(0.0).powf(n - 1.0) * theta_d1 };
        -src_d / (self.alpha * self.alpha) - 2.0 * theta_d2 / t + 2.0 * theta_d1 / (t * t)
    }

    fn cell(&self, t: f64) -> Result<usize> {
        let (t0, t1) = (self.t[0], *self.t.last().unwrap_or(&self.t[0]));
        if !(t >= t0 && t <= t1) {
            return Err(Error::Domain(format!("t = {t} outside the Lane-Emden solution range [{t0}, {t1}]")));
        }
        let i = self.t.partition_point(|&s| s <= t);
        Ok(i.clamp(1, self.t.len() - 1) - 1)
    }

    /// `(θ, θ′, θ″)` by cubic Hermite interpolation of `θ` (with `θ′`) and of `θ′` (with `θ″`).
    pub fn eval(&self, t: f64) -> Result<(f64, f64, f64)> {
        let i = self.cell(t)?;
        let (ta, tb) = (self.t[i], self.t[i + 1]);
        let (ya, yb) = (self.theta[i], self.theta[i + 1]);
        let (va, vb) = (self.theta_d1[i], self.theta_d1[i + 1]);
        let (aa, ab) = (self.second(ta, ya, va), self.second(tb, yb, vb));
        let h = tb - ta;
        let s = (t - ta) / h;
        let (y, _) = hermite(s, h, ya, yb, va, vb);
        let (v, dv) = hermite(s, h, va, vb, aa, ab);
        Ok((y, v, dv))
    }

    /// `θ″ + 2θ′/t + θⁿ/α²` of the dense output.
    pub fn residual(&self, t: f64) -> Result<f64> {
        let (y, v, a) = self.eval(t)?;
        Ok(a + 2.0 * v / t + source(y, self.n_poly) / (self.alpha * self.alpha))
    }
}

/// Cubic Hermite value and derivative at `s ∈ [0, 1]` on a cell of width `h`.
fn hermite(s: f64, h: f64, ya: f64, yb: f64, da: f64, db: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let y = h00 * ya + h10 * h * da + h01 * yb + h11 * h * db;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -d00;
    let d11 = 3.0 * s2 - 2.0 * s;
    let dy = (d00 * ya + d01 * yb) / h + d10 * da + d11 * db;
    (y, dy)
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type State = [f64; 2];

/// One Dormand–Prince step: returns the 5th-order solution and the error estimate.
fn dp_step<F: Fn(f64, State) -> State>(f: &F, t: f64, y: State, h: f64) -> (State, f64) {
    let mut k = [[0.0; 2]; 7];
    k[0] = f(t, y);
    for s in 1..7 {
        let mut ys = y;
        for (j, kj) in k.iter().enumerate().take(s) {
            for c in 0..2 {
                ys[c] += h * A[s][j] * kj[c];
            }
        }
        k[s] = f(t + C[s] * h, ys);
    }
    let mut y1 = y;
    for c in 0..2 {
        for j in 0..6 {
            y1[c] += h * A[6][j] * k[j][c];
        }
    }
    let mut err: f64 = 0.0;
    for c in 0..2 {
        let e: f64 = (0..7).map(|j| h * E[j] * k[j][c]).sum();
        err = err.max(e.abs() / (1.0 + y1[c].abs().max(y[c].abs())));
    }
    (y1, err)
}

/// Integrates outward from the series start until `θ` changes sign, then bisects the dense output.
pub fn lane_emden(n_poly: f64, alpha: f64, opts: &LaneEmdenOptions) -> Result<LaneEmdenSolution> {
    if !(0.0..5.0).contains(&n_poly) && n_poly != 5.0 {
        return Err(Error::Model(format!("polytropic index must lie in [0, 5], got {n_poly}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Model(format!("alpha_n must be positive, got {alpha}")));
    }
    let n = n_poly;
    let a2 = alpha * alpha;
    let f = move |t: f64, y: State| -> State { [y[1], -source(y[0], n) / a2 - 2.0 * y[1] / t] };

    let xi = opts.xi0;
    let t0 = alpha * xi;
    let y0 = [
        1.0 - xi * xi / 6.0 + n * xi.powi(4) / 120.0,
        (-xi / 3.0 + n * xi.powi(3) / 30.0) / alpha,
    ];
    let t_max = opts.t_max * alpha;
    let (mut ts, mut ys, mut vs) = (vec![t0], vec![y0[0]], vec![y0[1]]);
    let (mut t, mut y) = (t0, y0);
    let mut h = opts.max_step * alpha * 0.1;
    loop {
        if t >= t_max {
            return Err(Error::NoZero { t_max });
        }
        // steps grow with t once θ varies slowly
        let h_cap = opts.max_step * alpha * (t / (10.0 * alpha)).max(1.0);
        h = h.min(h_cap).min(t_max - t).max(1e-14 * t);
        let (y1, err) = dp_step(&f, t, y, h);
        let ratio = err / opts.tol;
        if ratio > 1.0 {
            h *= (0.9 * ratio.powf(-0.2)).max(0.2);
            continue;
        }
        t += h;
        y = y1;
        ts.push(t);
        ys.push(y[0]);
        vs.push(y[1]);
        if y[0] <= 0.0 {
            break;
        }
        h *= (0.9 * ratio.max(1e-10).powf(-0.2)).min(5.0);
    }

    let mut sol = LaneEmdenSolution {
        n_poly,
        alpha,
        radius: t,
        t: ts,
        theta: ys,
        theta_d1: vs,
        max_residual: 0.0,
    };
    let last = sol.t.len() - 1;
    let (mut lo, mut hi) = (sol.t[last - 1], sol.t[last]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sol.eval(mid)?.0 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let radius = if sol.eval(hi)?.0.abs() < sol.eval(lo)?.0.abs() { hi } else { lo };
    sol.radius = radius;
    let mut worst: f64 = 0.0;
    for w in sol.t.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        if mid < radius {
            worst = worst.max(sol.residual(mid)?.abs());
        }
    }
    sol.max_residual = worst;
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_one_zero_is_pi() {
        let s = lane_emden(1.0, 1.0, &LaneEmdenOptions::default()).unwrap();
        assert!((s.radius - std::f64::consts::PI).abs() < 1e-8, "{}", s.radius);
        let (th, d1, _) = s.eval(1.0).unwrap();
        assert!((th - 1f64.sin()).abs() < 1e-11);
        assert!((d1 - (1f64.cos() - 1f64.sin())).abs() < 1e-10);
        assert!(s.max_residual <= 1e-8, "{}", s.max_residual);
    }

    #[test]
    fn index_zero_zero_is_sqrt6() {
        let s = lane_emden(0.0, 1.0, &LaneEmdenOptions::default()).unwrap();
        assert!((s.radius - 6f64.sqrt()).abs() < 1e-8);
        assert!(s.eval(s.radius).unwrap().0.abs() < 1e-10);
    }

    #[test]
    fn unit_length_scales_radius() {
        let s = lane_emden(1.0, 2.0, &LaneEmdenOptions::default()).unwrap();
        assert!((s.radius - 2.0 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn index_five_has_no_zero() {
        let opts = LaneEmdenOptions { t_max: 200.0, ..Default::default() };
        assert!(matches!(lane_emden(5.0, 1.0, &opts), Err(Error::NoZero { .. })));
    }
}
