//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;

use common::identity::identity_suite;
use common::*;
use essspec::asymptotic::{asym_coeffs, Case};
use essspec::builtin::{example_b, lane_emden, ExampleBParams, LaneEmdenOptions};
use essspec::config::AnalysisConfig;
use essspec::diagnostics::{assumption_diagnostics, Outcome};
use essspec::interval::{Interval, IntervalSet};
use essspec::oracle::oracle_grid;
use essspec::regular::{lambda_beta, regular_part};
use essspec::report::{run_analyze, SpectrumReport};
use essspec::singular::StructureBranch;

type Check = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol || (a == b)
}

fn analyze(cfg: &AnalysisConfig) -> Result<SpectrumReport, String> {
    run_analyze(cfg).map_err(|e| e.to_string())
}

/// The set is the single interval `[lo, hi]` within `tol`.
fn single(set: &IntervalSet, lo: f64, hi: f64, tol: f64) -> Result<(), String> {
    let s = set.intervals();
    ensure!(s.len() == 1, "expected one interval, got {s:?}");
    ensure!(near(s[0].lo, lo, tol) && near(s[0].hi, hi, tol), "expected [{lo}, {hi}], got {:?}", s[0]);
    Ok(())
}

fn stellar() -> Check {
    let r = analyze(&stellar_config())?;
    ensure!(r.case == Case::II, "case {:?}", r.case);
    ensure!(r.case_tags.iter().all(|t| t.case == Case::II), "probe tags {:?}", r.case_tags);
    ensure!(r.singular_part.set.is_empty(), "singular part {:?}", r.singular_part.set);
    single(&r.regular_part.set, 0.0, 0.0, 1e-6)?;
    single(&r.essential_spectrum, 0.0, 0.0, 1e-6)?;
    ensure!(r.essential_radius.radius <= 1e-6, "radius {}", r.essential_radius.radius);
    Ok(format!("Case II, ess = {:?}", r.essential_spectrum.intervals()[0]))
}

fn lane_emden_radii() -> Check {
    let opts = LaneEmdenOptions::default();
    let mut out = Vec::new();
    for (n, want) in [(1.0, PI), (0.0, 6f64.sqrt())] {
        let le = lane_emden(n, 1.0, &opts).map_err(|e| e.to_string())?;
        ensure!(near(le.radius, want, 1e-8), "n = {n}: R = {} vs {want}", le.radius);
        ensure!(le.max_residual <= 1e-8, "n = {n}: residual {}", le.max_residual);
        out.push(format!("R({n}) = {:.12}", le.radius));
    }
    Ok(out.join(", "))
}

fn example_a_unit_check() -> Check {
    let cfg = example_a_unit();
    let r = analyze(&cfg)?;
    ensure!(r.case == Case::III, "case {:?}", r.case);
    let (m, _) = cfg.build_model().map_err(|e| e.to_string())?;
    let a = asym_coeffs(&m, 2.0, &cfg.options).map_err(|e| e.to_string())?;
    let got = (
        a.pi2.and_then(|l| l.value()).unwrap_or(f64::NAN),
        a.r1.value().unwrap_or(f64::NAN),
        a.varkappa0.value().unwrap_or(f64::NAN),
    );
    ensure!(near(got.0, -2.0, 1e-6) && near(got.1, 0.0, 1e-6) && near(got.2, 3.0, 1e-6), "(pi2, r1, varkappa0) = {got:?}");
    single(&r.singular_part.set, 0.0, 4.0, 1e-6)?;
    let class = r.structure_class.ok_or("no structure class")?;
    ensure!(class.branch == StructureBranch::A1, "branch {:?}", class.branch);
    ensure!(class.interval_count_bound == Some(1), "bound {:?}", class.interval_count_bound);
    let sup = r.singular_part.set.sup().unwrap_or(f64::NAN);
    ensure!(near(r.essential_radius.radius, 4.0, 1e-6) && near(sup, 4.0, 1e-6), "radius {}, sup {sup}", r.essential_radius.radius);
    let cf = r.essential_radius.closed_form.ok_or("no closed form")?;
    ensure!(near(cf.m, 5.0, 1e-4) && near(cf.n, -10.0, 1e-4) && near(cf.k, 0.0, 1e-4), "(M, N, K) = ({}, {}, {})", cf.m, cf.n, cf.k);
    ensure!(near(cf.lambda_minus, 0.0, 1e-4) && near(cf.lambda_plus, 4.0, 1e-4) && cf.agrees, "{cf:?}");
    Ok(format!("sing = {:?}, (M, N, K) = ({:.6}, {:.6}, {:.6})", r.singular_part.set.intervals()[0], cf.m, cf.n, cf.k))
}

fn example_a_case_one_check() -> Check {
    let r = analyze(&example_a_case_one())?;
    ensure!(r.case == Case::I, "case {:?}", r.case);
    ensure!(r.singular_part.set.is_empty(), "singular part {:?}", r.singular_part.set);
    single(&r.regular_part.set, 0.5, f64::INFINITY, 1e-6)?;
    ensure!(r.essential_radius.radius == f64::INFINITY, "radius {}", r.essential_radius.radius);
    Ok(format!("reg = {:?}", r.regular_part.set.intervals()[0]))
}

fn example_b_unit_check() -> Check {
    let (_, side) = example_b(&ExampleBParams::unit()).map_err(|e| e.to_string())?;
    ensure!(near(side.lambda11, 0.0, 1e-8), "lambda11 {}", side.lambda11);
    ensure!(near(side.k1, 0.0, 1e-8) && near(side.k2, 0.0, 1e-8), "K1 {}, K2 {}", side.k1, side.k2);
    let r = analyze(&example_b_unit())?;
    ensure!(r.case == Case::III, "case {:?}", r.case);
    let lb: Vec<f64> = r.lambda_beta.points.iter().map(|p| p.lambda).collect();
    ensure!(lb.len() == 1 && near(lb[0], 0.0, 1e-8), "numeric limits {lb:?}");
    single(&r.singular_part.set, -1.0, 1.0, 1e-6)?;
    single(&r.essential_spectrum, -1.0, 1.0, 1e-6)?;
    let class = r.structure_class.ok_or("no structure class")?;
    ensure!(class.branch == StructureBranch::A1 && class.interval_count_bound == Some(2), "{class:?}");
    let s = r.structure.as_ref().ok_or("no structure coefficients")?;
    let (g, g4psi) = (s.g_beta, s.g_beta + 4.0 * s.psi_beta);
    ensure!(near(g, 1.0, 1e-4) && near(g4psi, 4.0, 1e-4), "g = {g}, g + 4psi = {g4psi}");
    ensure!(near(side.g_beta(), 1.0, 1e-12), "closed-form g {}", side.g_beta());
    Ok(format!("sing = {:?}, g = {g:.6}, g + 4psi = {g4psi:.6}", r.singular_part.set.intervals()[0]))
}

fn identities() -> Check {
    let e = identity_suite(1000, 0x5eed);
    ensure!(e.determinant <= 1e-9 && e.cross <= 1e-9, "{e:?}");
    ensure!(e.nevanlinna <= 1e-10 && e.negative_imaginary == 0, "{e:?}");
    ensure!(e.sigma_sum <= 1e-10 && e.negative_weights == 0, "{e:?}");
    Ok(format!(
        "{} triples, worst errors {:.1e} / {:.1e} / {:.1e} / {:.1e}",
        e.triples, e.determinant, e.cross, e.nevanlinna, e.sigma_sum
    ))
}

fn oracle() -> Check {
    let mut total = (0, 0);
    for (cfg, fixed) in [
        (example_a_unit(), Interval::new(-1.0, 5.0)),
        (example_b_unit(), Interval::new(-2.0, 2.0)),
        (b_zero_config(), Interval::new(-5.0, 5.0)),
    ] {
        let r = analyze(&cfg)?;
        let (m, _) = cfg.build_model().map_err(|e| e.to_string())?;
        for (window, step) in [(fixed, (fixed.hi - fixed.lo) / 40.0), (r.window, (r.window.hi - r.window.lo) / 400.0)] {
            let rows = oracle_grid(&m, window, step, &cfg.options).map_err(|e| e.to_string())?;
            let (bad, checked) = oracle_disagreements(&rows, &r.singular_part.set, cfg.options.root_tol);
            ensure!(bad.is_empty(), "{}: disagreement at {bad:?}", m.name);
            ensure!(checked * 2 >= rows.len(), "{}: only {checked} of {} rows decided", m.name, rows.len());
            total.0 += checked;
            total.1 += rows.len();
        }
    }
    Ok(format!("0 disagreements, {} of {} grid points decided", total.0, total.1))
}

fn finite_endpoints(s: &IntervalSet) -> Vec<f64> {
    s.endpoints().into_iter().filter(|x| x.is_finite()).collect()
}

fn refinement() -> Check {
    let mut worst: f64 = 0.0;
    for cfg in [stellar_config(), example_a_unit(), example_a_case_one(), example_b_unit()] {
        let (m, _) = cfg.build_model().map_err(|e| e.to_string())?;
        let coarse = regular_part(&m, &cfg.options).map_err(|e| e.to_string())?;
        let mut fine_opts = cfg.options.clone();
        fine_opts.t_grid = 2 * cfg.options.t_grid - 1;
        let fine = regular_part(&m, &fine_opts).map_err(|e| e.to_string())?;
        let (a, b) = (finite_endpoints(&coarse.set), finite_endpoints(&fine.set));
        ensure!(a.len() == b.len(), "{}: {a:?} vs {b:?}", m.name);
        for (x, y) in a.iter().zip(&b) {
            ensure!((x - y).abs() < 1e-6, "{}: endpoint {x} vs {y}", m.name);
            worst = worst.max((x - y).abs());
        }
        let lb = lambda_beta(&m, &cfg.options).map_err(|e| e.to_string())?;
        if let (Some(r), Some(&l)) = (coarse.set.inf(), lb.finite_limits.first()) {
            ensure!(r <= l + 1e-9 * (1.0 + l.abs()), "{}: inf reg {r} > inf limits {l}", m.name);
        }
        let report = analyze(&cfg)?;
        ensure!(report.regular_inf_check != Some(false), "{}: report inf check failed", m.name);
    }
    Ok(format!("largest endpoint shift {worst:.1e}"))
}

fn diagnostics() -> Check {
    let cfg = example_a_unit();
    let (m, _) = cfg.build_model().map_err(|e| e.to_string())?;
    let d = assumption_diagnostics(&m, 2.0, &cfg.options).map_err(|e| e.to_string())?;
    let phi1 = d.probe("phi1_limit").ok_or("no phi1 probe")?;
    ensure!(phi1.outcome == Outcome::Pass && near(phi1.value, -2.0, 1e-4), "{phi1:?}");

    let cfg = stellar_config();
    let (m, _) = cfg.build_model().map_err(|e| e.to_string())?;
    let d = assumption_diagnostics(&m, 1.0, &cfg.options).map_err(|e| e.to_string())?;
    ensure!(d.s_pi == 1, "stellar s_pi {}", d.s_pi);
    Ok(format!("phi1 = {:.8}, stellar s_pi = +1", phi1.value))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("stellar model", stellar),
        ("Lane-Emden radii", lane_emden_radii),
        ("example A, unit parameters", example_a_unit_check),
        ("example A, Case I", example_a_case_one_check),
        ("example B, unit parameters", example_b_unit_check),
        ("Schur identities", identities),
        ("oracle equivalence", oracle),
        ("regular part refinement", refinement),
        ("assumption diagnostics", diagnostics),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
