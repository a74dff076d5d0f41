//! End-to-end spectrum analysis: oracle agreement, refinement, reports and plots.

mod common;

use common::*;
use essspec::asymptotic::Case;
use essspec::config::AnalysisConfig;
use essspec::interval::{Interval, IntervalSet};
use essspec::oracle::oracle_grid;
use essspec::plot::plot_svg;
use essspec::regular::{lambda_beta, regular_part};
use essspec::report::{from_json, run_analyze, to_json};
use essspec::singular::{PointStatus, StructureBranch};

fn oracle_check(cfg: &AnalysisConfig, window: Interval, step: f64) {
    let report = run_analyze(cfg).unwrap();
    let (m, _) = cfg.build_model().unwrap();
    let rows = oracle_grid(&m, window, step, &cfg.options).unwrap();
    let (bad, checked) = oracle_disagreements(&rows, &report.singular_part.set, cfg.options.root_tol);
    assert!(checked >= rows.len() / 2, "only {checked} of {} rows decided", rows.len());
    assert!(bad.is_empty(), "{}: oracle disagrees at {bad:?}", m.name);
}

#[test]
fn oracle_agrees_with_singular_part() {
    oracle_check(&example_a_unit(), Interval::new(-1.0, 5.0), 0.25);
    oracle_check(&example_b_unit(), Interval::new(-2.0, 2.0), 0.1);
    oracle_check(&b_zero_config(), Interval::new(-5.0, 5.0), 0.05);
}

#[test]
fn oracle_table_example_a() {
    let cfg = example_a_unit();
    let (m, _) = cfg.build_model().unwrap();
    let rows = oracle_grid(&m, Interval::new(-1.0, 5.0), 0.25, &cfg.options).unwrap();
    assert_eq!(rows.len(), 25);
    for r in &rows {
        // away from the endpoints the sign is decided and matches [0, 4]
        if (r.lambda - 0.0).abs() > 1e-9 && (r.lambda - 4.0).abs() > 1e-9 {
            assert_eq!(r.sign > 0, (0.0..=4.0).contains(&r.lambda), "{r:?}");
        } else {
            assert!(r.discriminant.abs() < 1e-6, "{r:?}");
        }
    }
}

#[test]
fn oracle_refuses_case_two() {
    let cfg = stellar_config();
    let (m, _) = cfg.build_model().unwrap();
    let e = oracle_grid(&m, Interval::new(-1.0, 1.0), 0.1, &cfg.options).unwrap_err();
    assert!(e.to_string().contains("not Case III"), "{e}");
}

#[test]
fn vanishing_b_gives_right_ray() {
    // π = (1−t)², ϰ = −λ: the discriminant is λ − 1/4 with structure class b2
    let r = run_analyze(&b_zero_config()).unwrap();
    assert_eq!(r.case, Case::III);
    let class = r.structure_class.unwrap();
    assert_eq!(class.branch, StructureBranch::B2);
    assert!(class.right_ray && !class.left_ray);
    let s = r.singular_part.set.intervals();
    assert_eq!(s.len(), 1, "{s:?}");
    assert!((s[0].lo - 0.25).abs() < 1e-6 && s[0].hi == f64::INFINITY, "{s:?}");
    assert_eq!(r.essential_radius.radius, f64::INFINITY);
}

fn finite_endpoints(s: &IntervalSet) -> Vec<f64> {
    s.endpoints().into_iter().filter(|x| x.is_finite()).collect()
}

#[test]
fn regular_part_is_stable_under_refinement() {
    for cfg in [example_a_unit(), example_a_case_one(), example_b_unit(), stellar_config(), b_zero_config()] {
        let (m, _) = cfg.build_model().unwrap();
        let coarse = regular_part(&m, &cfg.options).unwrap();
        let mut fine_opts = cfg.options.clone();
        fine_opts.t_grid = 2 * cfg.options.t_grid - 1;
        let fine = regular_part(&m, &fine_opts).unwrap();
        let (a, b) = (finite_endpoints(&coarse.set), finite_endpoints(&fine.set));
        assert_eq!(a.len(), b.len(), "{}: {a:?} vs {b:?}", m.name);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-6, "{}: {x} vs {y}", m.name);
        }
        let lb = lambda_beta(&m, &cfg.options).unwrap();
        if let (Some(r), Some(&l)) = (coarse.set.inf(), lb.finite_limits.first()) {
            assert!(r <= l + 1e-9 * (1.0 + l.abs()), "{}: inf reg {r} > inf limits {l}", m.name);
        }
    }
}

#[test]
fn report_round_trips_and_is_deterministic() {
    for cfg in [example_a_unit(), example_b_unit(), stellar_config(), example_a_case_one()] {
        let a = to_json(&run_analyze(&cfg).unwrap()).unwrap();
        let b = to_json(&run_analyze(&cfg).unwrap()).unwrap();
        assert_eq!(a, b, "two runs differ");
        let again = to_json(&from_json(&a).unwrap()).unwrap();
        assert_eq!(a, again, "parse then serialize changed the report");
        let r = from_json(&a).unwrap();
        assert_eq!(plot_svg(&r), plot_svg(&run_analyze(&cfg).unwrap()));
    }
}

#[test]
fn report_union_invariant() {
    for cfg in [example_a_unit(), example_b_unit(), stellar_config(), example_a_case_one()] {
        let r = run_analyze(&cfg).unwrap();
        let union = r.regular_part.set.union(&r.singular_part.set, cfg.options.merge_tol);
        assert_eq!(union, r.essential_spectrum);
    }
}

#[test]
fn stellar_report() {
    let r = run_analyze(&stellar_config()).unwrap();
    assert_eq!(r.case, Case::II);
    assert!(r.singular_part.set.is_empty());
    let e = r.essential_spectrum.intervals();
    assert_eq!(e.len(), 1);
    assert!(e[0].lo.abs() < 1e-6 && e[0].hi.abs() < 1e-6, "{e:?}");
    assert!(r.essential_radius.radius < 1e-6);
}

#[test]
fn plot_examples() {
    let a = plot_svg(&run_analyze(&example_a_unit()).unwrap());
    assert_eq!(a.matches("class=\"band").count(), 1, "{a}");
    assert!(a.contains("class=\"band singular\""));
    assert!(!a.contains("class=\"marker"));
    assert!(!a.contains("class=\"arrow"));

    let rb = run_analyze(&example_b_unit()).unwrap();
    assert_eq!(rb.lambda_beta.points.len(), 1);
    assert_eq!(rb.lambda_beta.points[0].status, PointStatus::InRegular);
    let b = plot_svg(&rb);
    assert_eq!(b.matches("class=\"band").count(), 1);
    assert!(b.contains("class=\"marker in-regular\" data-lambda=\"0\""), "{b}");

    let c = plot_svg(&run_analyze(&example_a_case_one()).unwrap());
    assert_eq!(c.matches("class=\"arrow regular\"").count(), 1, "ray to +inf");

    let mut empty = rb.clone();
    empty.regular_part.set = IntervalSet::empty();
    empty.singular_part.set = IntervalSet::empty();
    empty.lambda_beta.points.clear();
    let e = plot_svg(&empty);
    assert!(e.contains("class=\"axis\""));
    assert!(!e.contains("class=\"band") && !e.contains("class=\"marker") && !e.contains("class=\"tick"));
}

#[test]
fn malformed_config_names_key() {
    let text = r#"{"schema_version": 1, "model": {"builtin": "example_a"}, "tolerances": {"fit_tol": -1e-3}}"#;
    let e = AnalysisConfig::from_json(text).unwrap_err();
    assert!(e.is_usage());
    assert!(e.to_string().contains("tolerances.fit_tol"), "{e}");
}
