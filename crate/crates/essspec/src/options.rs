//! Numerical tolerances and grid sizes shared by the analysis routines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Options {
    /// Extrapolated limits with a larger error estimate are marked unreliable.
    pub limit_tol: f64,
    /// Case threshold factor; the threshold is `eps_class · (1 + |p near beta|)`.
    pub eps_class: f64,
    /// Bisection tolerance for singular-part endpoints.
    pub root_tol: f64,
    /// Relative residual allowed in the structure-coefficient fits.
    pub fit_tol: f64,
    /// Exclusion margin around the regular part and `Λβ(D)`, relative to the lambda scale.
    pub exclusion_margin: f64,
    /// Interval merge tolerance, relative to `1 + |endpoint|`.
    pub merge_tol: f64,
    /// Extremum polishing tolerance and grid-refinement convergence threshold.
    pub refine_tol: f64,
    /// Relative jump between neighbouring branch samples that triggers a midpoint.
    pub jump_tol: f64,
    /// Smallest sample spacing (in the unit coordinate) produced by adaptive refinement.
    pub min_step: f64,
    /// Tolerance for branch limits at beta and the `inf reg ≤ inf Λβ` check.
    pub tail_tol: f64,
    pub diverge_threshold: f64,
    /// Uniform t-grid points for eigenvalue branches.
    pub t_grid: usize,
    /// Lambda grid points for singular-part scans.
    pub lambda_grid: usize,
    /// Richardson levels.
    pub levels: usize,
    /// First tail offset as a fraction of `beta − alpha`.
    pub h0_fraction: f64,
    /// Geometric ratio between tail offsets.
    pub ratio: f64,
    pub execution: Execution,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            limit_tol: 1e-6,
            eps_class: 1e-6,
            root_tol: 1e-9,
            fit_tol: 1e-6,
            exclusion_margin: 1e-4,
            merge_tol: 1e-9,
            refine_tol: 1e-6,
            jump_tol: 2e-2,
            min_step: 1e-7,
            tail_tol: 1e-6,
            diverge_threshold: 1e12,
            t_grid: 257,
            lambda_grid: 401,
            levels: 12,
            h0_fraction: 0.125,
            ratio: 0.5,
            execution: Execution::default(),
        }
    }
}

impl Options {
    /// Rejects non-positive tolerances and unusable grid sizes, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("limit_tol", self.limit_tol),
            ("eps_class", self.eps_class),
            ("root_tol", self.root_tol),
            ("fit_tol", self.fit_tol),
            ("exclusion_margin", self.exclusion_margin),
            ("merge_tol", self.merge_tol),
            ("refine_tol", self.refine_tol),
            ("jump_tol", self.jump_tol),
            ("min_step", self.min_step),
            ("tail_tol", self.tail_tol),
            ("diverge_threshold", self.diverge_threshold),
            ("h0_fraction", self.h0_fraction),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("tolerances.{key}"), format!("must be positive and finite, got {v}")));
            }
        }
        if !(self.ratio > 0.0 && self.ratio < 1.0) {
            return Err(Error::config("tolerances.ratio", "must lie in (0, 1)"));
        }
        if self.h0_fraction >= 1.0 {
            return Err(Error::config("tolerances.h0_fraction", "must be below 1"));
        }
        if self.t_grid < 2 {
            return Err(Error::config("grid.t", "needs at least 2 points"));
        }
        if self.lambda_grid < 16 {
            return Err(Error::config("grid.lambda", "needs at least 16 points"));
        }
        if self.levels < 3 {
            return Err(Error::config("tolerances.levels", "needs at least 3 levels"));
        }
        Ok(())
    }

    /// Sets one tolerance from a `KEY=VALUE` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::config(format!("tolerances.{key}"), format!("cannot parse `{value}`"));
        let f = || value.parse::<f64>().map_err(|_| bad());
        let u = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "limit_tol" => self.limit_tol = f()?,
            "eps_class" => self.eps_class = f()?,
            "root_tol" => self.root_tol = f()?,
            "fit_tol" => self.fit_tol = f()?,
            "exclusion_margin" => self.exclusion_margin = f()?,
            "merge_tol" => self.merge_tol = f()?,
            "refine_tol" => self.refine_tol = f()?,
            "jump_tol" => self.jump_tol = f()?,
            "min_step" => self.min_step = f()?,
            "tail_tol" => self.tail_tol = f()?,
            "diverge_threshold" => self.diverge_threshold = f()?,
            "t_grid" => self.t_grid = u()?,
            "lambda_grid" => self.lambda_grid = u()?,
            "levels" => self.levels = u()?,
            "h0_fraction" => self.h0_fraction = f()?,
            "ratio" => self.ratio = f()?,
            _ => return Err(Error::config(format!("tolerances.{key}"), "unknown key")),
        }
        self.validate()
    }
}
