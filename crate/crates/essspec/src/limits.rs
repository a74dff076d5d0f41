//! Limits at the right endpoint by Richardson extrapolation on a geometric ladder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Endpoint;

/// Geometric ladder approaching `beta`.
///
/// For finite `beta` the nodes are `t_k = beta − h_k` with `h_k = h0·q^k`. For infinite `beta`
/// they are `t_k = 1/s_k` with `s_k = s0·q^k`. In both cases `h` is the expansion variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub ratio: f64,
}

impl Ladder {
    pub fn new(alpha: f64, beta: Endpoint, h0_fraction: f64, ratio: f64, start: usize, levels: usize) -> Self {
        let (mut t, mut h) = (Vec::with_capacity(levels), Vec::with_capacity(levels));
        for k in start..start + levels {
            let q = ratio.powi(k as i32);
            match beta {
                Endpoint::Finite(b) => {
                    let hk = (b - alpha) * h0_fraction * q;
                    t.push(b - hk);
                    h.push(hk);
                }
                Endpoint::Infinite => {
                    let s0 = h0_fraction / (alpha.abs() + 1.0);
                    let sk = s0 * q;
                    t.push(1.0 / sk);
                    h.push(sk);
                }
            }
        }
        Ladder { t, h, ratio }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Outcome of one extrapolated limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Limit {
    Finite {
        value: f64,
        #[serde(with = "crate::interval::ext_real")]
        err: f64,
    },
    Diverged { sign: i8 },
    Oscillatory,
}

impl Limit {
    pub fn value(&self) -> Option<f64> {
        match self {
            Limit::Finite { value, .. } => Some(*value),
            _ => None,
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            Limit::Finite { err, .. } => *err,
            _ => f64::INFINITY,
        }
    }

    /// Finite with `err ≤ tol·(1 + |value|)`.
    pub fn reliable(&self, tol: f64) -> bool {
        matches!(self, Limit::Finite { value, err } if *err <= tol * (1.0 + value.abs()))
    }

    /// Value if finite, otherwise an error naming the field.
    pub fn require(&self, field: &str) -> Result<f64> {
        match self {
            Limit::Finite { value, .. } => Ok(*value),
            Limit::Diverged { sign } => Err(Error::numeric(format!("{field}: limit diverges (sign {sign})"))),
            Limit::Oscillatory => Err(Error::numeric(format!("{field}: limit oscillates"))),
        }
    }
}

/// Richardson tableau for samples at `h_k = h0·q^k` assuming an expansion in integer powers of `h`.
/// Returns the entry with the smallest local error estimate.
pub fn richardson(values: &[f64], ratio: f64) -> (f64, f64) {
    richardson_noisy(values, None, ratio)
}

/// Like [`richardson`], with per-sample noise levels. An entry's error is at least its
/// propagated noise, so stalled or quantized samples deep in the tail are not mistaken for convergence.
pub fn richardson_noisy(values: &[f64], noise: Option<&[f64]>, ratio: f64) -> (f64, f64) {
    let n = values.len();
    let noise_of = |lo: usize, hi: usize| -> f64 {
        noise.map_or(0.0, |nz| nz[lo..=hi].iter().fold(0.0, |m: f64, x| m.max(*x)))
    };
    // sum of |coefficients| of column j as a combination of raw samples
    let mut amp = vec![1.0f64; n.max(1)];
    for j in 1..n {
        let f = ratio.powi(-(j as i32)) - 1.0;
        amp[j] = amp[j - 1] * (1.0 + 2.0 / f);
    }
    if n == 0 {
        return (f64::NAN, f64::INFINITY);
    }
    if n == 1 {
        return (values[0], f64::INFINITY);
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut best = (values[n - 1], (values[n - 1] - values[n - 2]).abs().max(noise_of(n - 2, n - 1)));
    for k in 0..n {
        let mut row = vec![values[k]];
        for j in 1..=k {
            let factor = ratio.powi(-(j as i32)) - 1.0;
            let prev: &Vec<f64> = &rows[k - 1];
            let v = row[j - 1] + (row[j - 1] - prev[j - 1]) / factor;
            row.push(v);
        }
        if k >= 1 {
            let prev = &rows[k - 1];
            for j in 0..=k {
                let mut err: f64 = 0.0;
                let mut have = false;
                if j < prev.len() {
                    err = err.max((row[j] - prev[j]).abs());
                    have = true;
                    if k >= 2 && j < rows[k - 2].len() {
                        err = err.max((prev[j] - rows[k - 2][j]).abs());
                    }
                }
                if j >= 1 {
                    err = err.max((row[j] - row[j - 1]).abs());
                    have = true;
                }
                let err = err.max(amp[j] * noise_of(k.saturating_sub(j + 2), k));
                if have && err < best.1 {
                    best = (row[j], err);
                }
            }
        }
        rows.push(row);
    }
    let floor = 4.0 * f64::EPSILON * best.0.abs();
    (best.0, best.1.max(floor))
}

/// Classifies a sampled sequence approaching the endpoint.
pub fn extrapolate_values(values: &[f64], ratio: f64, diverge_threshold: f64) -> Limit {
    extrapolate_with_noise(values, None, ratio, diverge_threshold)
}

/// [`extrapolate_values`] with per-sample noise estimates.
pub fn extrapolate_with_noise(values: &[f64], noise: Option<&[f64]>, ratio: f64, diverge_threshold: f64) -> Limit {
    let n = values.len();
    let last = values[n - 1];
    if !last.is_finite() || last.abs() > diverge_threshold {
        return Limit::Diverged { sign: sign_of(last) };
    }
    let (value, err) = richardson_noisy(values, noise, ratio);
    let growing = n >= 4
        && (n - 3..n).all(|k| values[k].abs() > 1.05 * values[k - 1].abs())
        && values[n - 3..].iter().all(|v| v.signum() == last.signum());
    let settled = err <= 1e-3 * (1.0 + value.abs());
    if growing && !settled {
        return Limit::Diverged { sign: sign_of(last) };
    }
    if !value.is_finite() || err > 1e-1 * (1.0 + value.abs()) || wobbles(values) {
        return Limit::Oscillatory;
    }
    Limit::Finite { value, err }
}

/// Raw increments that keep changing sign at a magnitude well above rounding noise.
fn wobbles(values: &[f64]) -> bool {
    let n = values.len();
    if n < 6 {
        return false;
    }
    let d: Vec<f64> = (1..n).map(|k| values[k] - values[k - 1]).collect();
    let changes = d.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    let big = d[d.len() - 4..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    changes >= 2 && big > 1e-6 * (1.0 + values[n - 1].abs())
}

fn sign_of(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    pub h0_fraction: f64,
    pub ratio: f64,
    pub levels: usize,
    pub diverge_threshold: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            h0_fraction: 0.125,
            ratio: 0.5,
            levels: 12,
            diverge_threshold: 1e12,
        }
    }
}

impl From<&crate::options::Options> for LimitOptions {
    fn from(o: &crate::options::Options) -> Self {
        LimitOptions {
            h0_fraction: o.h0_fraction,
            ratio: o.ratio,
            levels: o.levels,
            diverge_threshold: o.diverge_threshold,
        }
    }
}

/// `lim f(t)` as `t → beta` from the left (or `t → ∞`).
pub fn limit_extrapolate<F>(f: F, alpha: f64, beta: Endpoint, opts: &LimitOptions) -> Result<Limit>
where
    F: Fn(f64) -> Result<f64>,
{
    let ladder = Ladder::new(alpha, beta, opts.h0_fraction, opts.ratio, 0, opts.levels);
    let values = ladder.t.iter().map(|&t| f(t)).collect::<Result<Vec<f64>>>()?;
    Ok(extrapolate_values(&values, opts.ratio, opts.diverge_threshold))
}
