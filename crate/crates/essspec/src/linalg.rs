//! Small dense complex linear algebra: Hermitian eigenproblems and jet solves.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CVec = DVector<C64>;
pub type CMat = DMatrix<C64>;

/// A complex vector with its first and second `t`-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct VecJet {
    pub v: CVec,
    pub d1: CVec,
    pub d2: CVec,
}

impl VecJet {
    pub fn zeros(n: usize) -> Self {
        VecJet {
            v: CVec::zeros(n),
            d1: CVec::zeros(n),
            d2: CVec::zeros(n),
        }
    }
}

/// A complex matrix with its first and second `t`-derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MatJet {
    pub v: CMat,
    pub d1: CMat,
    pub d2: CMat,
}

impl MatJet {
    pub fn zeros(n: usize) -> Self {
        MatJet {
            v: CMat::zeros(n, n),
            d1: CMat::zeros(n, n),
            d2: CMat::zeros(n, n),
        }
    }
}

/// Ascending eigenvalues and matching unit eigenvectors (columns) of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    if n == 1 {
        return Ok((vec![m[(0, 0)].re], CMat::from_element(1, 1, C64::new(1.0, 0.0))));
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON * 0.5, 10_000)
        .ok_or_else(|| Error::numeric("Hermitian eigen-decomposition did not converge"))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    if values.iter().any(|v| !v.is_finite()) && scale.is_finite() {
        return Err(Error::numeric("non-finite eigenvalue"));
    }
    let mut vectors = CMat::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(k));
    }
    Ok((values, vectors))
}

/// Ascending eigenvalues only.
pub fn hermitian_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    match m.nrows() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![m[(0, 0)].re]),
        _ => {
            let mut v: Vec<f64> = m
                .clone()
                .try_symmetric_eigen(f64::EPSILON * 0.5, 10_000)
                .ok_or_else(|| Error::numeric("Hermitian eigen-decomposition did not converge"))?
                .eigenvalues
                .iter()
                .copied()
                .collect();
            v.sort_by(f64::total_cmp);
            Ok(v)
        }
    }
}

/// Copies the lower triangle onto the upper one (conjugated) and zeroes the diagonal's imaginary part.
pub fn hermitize_from_lower(m: &mut CMat) {
    let n = m.nrows();
    for i in 0..n {
        m[(i, i)].im = 0.0;
        for j in 0..i {
            m[(j, i)] = m[(i, j)].conj();
        }
    }
}

/// `a* b` (conjugate-linear in the first argument).
pub fn dotc(a: &CVec, b: &CVec) -> C64 {
    a.dotc(b)
}

/// LU factorization reused for the value, first and second derivative solves.
pub struct JetSolver {
    lu: nalgebra::LU<C64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl JetSolver {
    pub fn new(m: &CMat) -> Result<Self> {
        let lu = m.clone().lu();
        if !lu.is_invertible() {
            return Err(Error::numeric("singular matrix in resolvent solve"));
        }
        Ok(JetSolver { lu })
    }

    pub fn solve(&self, rhs: &CVec) -> Result<CVec> {
        self.lu
            .solve(rhs)
            .ok_or_else(|| Error::numeric("singular matrix in resolvent solve"))
    }

    /// Solves `M x = y` for a jet `M`, `y` (differentiating `M x = y` twice).
    pub fn solve_jet(&self, m: &MatJet, y: &VecJet, second: bool) -> Result<VecJet> {
        let x = self.solve(&y.v)?;
        let x1 = self.solve(&(&y.d1 - &m.d1 * &x))?;
        let x2 = if second {
            self.solve(&(&y.d2 - &m.d2 * &x - (&m.d1 * &x1) * C64::new(2.0, 0.0)))?
        } else {
            CVec::zeros(x.len())
        };
        Ok(VecJet { v: x, d1: x1, d2: x2 })
    }
}
