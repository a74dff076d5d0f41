//! Built-in models against their closed-form side channels.

mod common;

use essspec::asymptotic::{asym_coeffs, classify_case, Case};
use essspec::builtin::{
    example_a, example_b, lane_emden, stellar_model, ExampleAParams, ExampleBParams, LaneEmdenOptions, StellarParams,
};
use essspec::expr::parse_expr;
use essspec::limits::{limit_extrapolate, LimitOptions};
use essspec::model::{ComplexExpr, Endpoint};
use essspec::options::Options;
use essspec::schur::schur_point;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dyadic value `k/8` so that products and sums below stay exact.
fn eighth(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 8.0
}

fn affine(a: f64, b: f64) -> String {
    format!("{a} + ({b})*t")
}

/// Parameters aimed at a given case: `G = ρ̃m̃ − ψ̃²` with `G(0)` and `G′(0)` chosen exactly.
fn example_a_params(rng: &mut ChaCha8Rng, target: Case) -> ExampleAParams {
    let r0 = *[0.5, 1.0, 2.0].choose(rng).unwrap();
    let r1 = eighth(rng, -2, 4);
    let m1 = eighth(rng, -2, 4);
    let s0 = *[0.5, 1.0, 2.0].choose(rng).unwrap();
    let (m0, s1) = match target {
        Case::I => (s0 * s0 / r0 + eighth(rng, 1, 8), eighth(rng, -4, 4)),
        Case::II => {
            let m0 = s0 * s0 / r0;
            // G′(0) = r1 m0 + r0 m1 − 2 s0 s1 away from zero
            let s1 = (r1 * m0 + r0 * m1) / (2.0 * s0) + *[-0.5, 0.5].choose(rng).unwrap();
            (m0, s1)
        }
        _ => {
            let m0 = s0 * s0 / r0;
            (m0, (r1 * m0 + r0 * m1) / (2.0 * s0))
        }
    };
    ExampleAParams {
        rho: parse_expr(&affine(r0, r1)).unwrap(),
        m: parse_expr(&affine(m0, m1)).unwrap(),
        psi: ComplexExpr::real(parse_expr(&affine(s0, s1)).unwrap()),
        phi: parse_expr(&format!("{}", eighth(rng, 0, 40))).unwrap(),
    }
}

#[test]
fn example_a_case_tags_match_predicate() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = Options::default();
    let targets = [Case::I, Case::II, Case::III];
    for k in 0..20 {
        let p = example_a_params(&mut rng, targets[k % 3]);
        let (m, side) = example_a(&p).unwrap();
        assert_eq!(side.case, targets[k % 3], "sample {k}: predicate");
        // D = m/(1−t)² stays above −10, so lambda = −10 avoids every pole
        let tag = classify_case(&asym_coeffs(&m, -10.0, &opts).unwrap(), opts.eps_class);
        assert_eq!(tag.case, side.case, "sample {k}: {tag:?}");
    }
}

#[test]
fn example_b_pi2_matches_closed_form() {
    let opts = Options::default();
    for phi in [0.0, 0.5] {
        let mut p = ExampleBParams::unit();
        p.phi = parse_expr(&phi.to_string()).unwrap();
        let (m, side) = example_b(&p).unwrap();
        assert_eq!(side.case, Case::III);
        for l in [-1.7, -0.6, 0.35, 0.9, 2.3] {
            let a = asym_coeffs(&m, l, &opts).unwrap();
            let got = a.pi2.unwrap().value().unwrap();
            let want = side.pi2(l);
            assert!(common::rel_err(got, want) <= 1e-5, "phi {phi}, lambda {l}: {got} vs {want}");
            let tag = classify_case(&a, opts.eps_class);
            assert_eq!(tag.case, Case::III);
        }
    }
}

#[test]
fn stellar_boundary_lemma() {
    let le = lane_emden(3.0, 1.0, &LaneEmdenOptions::default()).unwrap();
    let r = le.radius;
    let ratio = |t: f64| {
        let (y, v, _) = le.eval(t)?;
        Ok((t - r) * v / y)
    };
    let lim = limit_extrapolate(ratio, 1.0, Endpoint::Finite(r), &LimitOptions::default()).unwrap();
    let v = lim.value().expect("finite limit");
    assert!((v - 1.0).abs() <= 1e-4, "{lim:?}");
}

#[test]
fn stellar_r_vanishes_identically() {
    let (m, side) = stellar_model(&StellarParams::default(), &LaneEmdenOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let t = rng.gen_range(1.0..side.radius - 1e-3);
        let l = rng.gen_range(-5.0..5.0);
        if let Ok(sp) = schur_point(&m, t, l) {
            assert_eq!(sp.r, 0.0, "t {t}, lambda {l}");
            assert_eq!(sp.r_d1, 0.0);
        }
    }
}

#[test]
fn lane_emden_profile() {
    for n in [1.0, 1.5, 3.0, 4.0] {
        let le = lane_emden(n, 1.0, &LaneEmdenOptions::default()).unwrap();
        assert!(le.theta.windows(2).all(|w| w[1] < w[0]), "n {n}: theta not decreasing");
        assert!(le.max_residual <= 1e-8, "n {n}: residual {}", le.max_residual);
        let last = le.t.len() - 1;
        for i in (0..last).step_by(37) {
            let res = le.residual(le.t[i]).unwrap();
            assert!(res.abs() <= 1e-8, "n {n}: residual {res} at t = {}", le.t[i]);
        }
        let (y, _, _) = le.eval(le.radius).unwrap();
        assert!(y.abs() <= 1e-10, "n {n}: theta(R) = {y}");
    }
}
