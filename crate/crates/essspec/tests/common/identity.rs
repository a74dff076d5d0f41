//! Schur-coefficient identities on random `(t, λ, model)` triples, against dense linear algebra.

use essspec::linalg::{CMat, CVec, C64};
use essspec::model::CoefficientModel;
use essspec::schur::{partial_fractions, pi_complex, schur_point_detail};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{random_model, rel_err};

/// Worst relative errors over the suite.
#[derive(Debug, Default)]
pub struct IdentityErrors {
    pub triples: usize,
    pub determinant: f64,
    pub cross: f64,
    pub nevanlinna: f64,
    pub sigma_sum: f64,
    /// Samples with `Im(−π(t, ζ)) < 0` beyond rounding.
    pub negative_imaginary: usize,
    pub negative_weights: usize,
}

struct Sample {
    p: f64,
    b: CVec,
    c: CVec,
    d: CMat,
    delta: CMat,
}

fn sample(m: &CoefficientModel, t: f64) -> Sample {
    let pt = m.eval(t).unwrap();
    let p = pt.p.value;
    let b = pt.b.v.clone();
    let d = pt.d.v.clone();
    let delta = &d - &b * b.adjoint() / C64::new(p, 0.0);
    Sample { p, b, c: pt.c.v.clone(), d, delta }
}

fn shifted(m: &CMat, z: C64) -> CMat {
    m - DMatrix::identity(m.nrows(), m.ncols()) * z
}

fn eigenvalues(m: &CMat) -> Vec<f64> {
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// A real lambda at least `gap` away from the spectra of `D` and `Δ`.
fn admissible_lambda(rng: &mut ChaCha8Rng, s: &Sample, gap: f64) -> f64 {
    let mut eig = eigenvalues(&s.d);
    eig.extend(eigenvalues(&s.delta));
    loop {
        let l: f64 = rng.gen_range(-6.0..6.0);
        if eig.iter().all(|e| (e - l).abs() > gap) {
            return l;
        }
    }
}

fn crel(a: C64, b: C64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Runs `triples` random checks with `n` cycling through 1, 2, 3.
pub fn identity_suite(triples: usize, seed: u64) -> IdentityErrors {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = IdentityErrors { triples, ..Default::default() };
    for k in 0..triples {
        let m = random_model(&mut rng, 1 + k % 3);
        let t: f64 = rng.gen_range(0.0..0.95);
        let s = sample(&m, t);
        let l = admissible_lambda(&mut rng, &s, 0.05);
        let z = C64::new(l, 0.0);

        // π det(D − λ) = p det(Δ − λ)
        let (sp, res) = schur_point_detail(&m, t, l).unwrap();
        let lhs = C64::new(sp.pi, 0.0) * shifted(&s.d, z).determinant();
        let rhs = C64::new(s.p, 0.0) * shifted(&s.delta, z).determinant();
        out.determinant = out.determinant.max(crel(lhs, rhs));

        // b*(D − λ)⁻¹c / π = b*(Δ − λ)⁻¹c / p
        let lhs = s.b.dotc(&res.xc) / sp.pi;
        let y = shifted(&s.delta, z).lu().solve(&s.c).unwrap();
        let rhs = s.b.dotc(&y) / s.p;
        out.cross = out.cross.max(crel(lhs, rhs));

        // Im(−π(t, ζ)) = Im ζ ‖(D − ζ)⁻¹b‖²
        let eta: f64 = rng.gen_range(0.01..2.0);
        let zeta = C64::new(l, eta);
        let (pi, _) = pi_complex(&m, t, zeta).unwrap();
        let x = shifted(&s.d, zeta).lu().solve(&s.b).unwrap();
        let expected = eta * x.norm_squared();
        if -pi.im < -1e-10 * expected {
            out.negative_imaginary += 1;
        }
        out.nevanlinna = out.nevanlinna.max(rel_err(-pi.im, expected));

        // Σσ_j = ‖b‖²
        let pf = partial_fractions(&m, t).unwrap();
        out.negative_weights += pf.weights.iter().filter(|&&w| w < 0.0).count();
        let sum: f64 = pf.weights.iter().sum();
        out.sigma_sum = out.sigma_sum.max(rel_err(sum, s.b.norm_squared()));
    }
    out
}
