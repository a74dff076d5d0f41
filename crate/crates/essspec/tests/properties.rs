//! Property tests for interval sets, number serialization, expression jets and the
//! Schur coefficients of scalar models.

use essspec::config::custom_model;
use essspec::expr::parse_expr;
use essspec::interval::{Interval, IntervalSet};
use essspec::report::to_json;
use essspec::schur::schur_point;
use proptest::prelude::*;
use serde_json::json;

fn interval() -> impl Strategy<Value = Interval> {
    (-100.0..100.0f64, 0.0..20.0f64).prop_map(|(lo, w)| Interval::new(lo, lo + w))
}

proptest! {
    #[test]
    fn interval_sets_are_sorted_and_disjoint(items in prop::collection::vec(interval(), 0..12)) {
        let s = IntervalSet::from_intervals(items.clone(), 0.0);
        for w in s.intervals().windows(2) {
            prop_assert!(w[0].hi < w[1].lo);
        }
        for i in &items {
            prop_assert!(s.contains(i.lo, 0.0) && s.contains(i.hi, 0.0));
            prop_assert!(s.contains(0.5 * (i.lo + i.hi), 0.0));
        }
        for e in s.endpoints() {
            prop_assert!(items.iter().any(|i| i.lo == e || i.hi == e));
        }
    }

    #[test]
    fn union_is_commutative_and_idempotent(
        a in prop::collection::vec(interval(), 0..6),
        b in prop::collection::vec(interval(), 0..6),
    ) {
        let (sa, sb) = (IntervalSet::from_intervals(a, 0.0), IntervalSet::from_intervals(b, 0.0));
        let ab = sa.union(&sb, 0.0);
        prop_assert_eq!(&ab, &sb.union(&sa, 0.0));
        prop_assert_eq!(&ab, &ab.union(&ab, 0.0));
        prop_assert_eq!(&ab, &ab.union(&sa, 0.0));
    }

    #[test]
    fn floats_round_trip_through_report_json(xs in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..20)) {
        let text = to_json(&xs).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn polynomial_jets_are_exact(a in -5.0..5.0f64, b in -5.0..5.0f64, c in -5.0..5.0f64, t in -2.0..2.0f64) {
        let e = parse_expr(&format!("({a}) + ({b})*t + ({c})*t^2")).unwrap();
        let d = e.eval2(t).unwrap();
        let scale = 1.0 + a.abs() + b.abs() + c.abs();
        prop_assert!((d.value - (a + b * t + c * t * t)).abs() <= 1e-13 * scale * (1.0 + t * t));
        prop_assert!((d.d1 - (b + 2.0 * c * t)).abs() <= 1e-13 * scale * (1.0 + t.abs()));
        prop_assert!((d.d2 - 2.0 * c).abs() <= 1e-13 * scale);
    }

    /// For n = 1 the coefficients have closed forms in the scalar entries.
    #[test]
    fn scalar_schur_closed_form(
        p in 0.5..3.0f64, q in -3.0..3.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -3.0..3.0f64,
        l in -6.0..6.0f64,
    ) {
        prop_assume!((d - l).abs() > 0.05);
        let m = custom_model(&json!({
            "alpha": 0, "beta": 1, "p": p, "q": q,
            "b": [[b, 0.0]], "c": [[0.0, c]], "d": [[d]]
        })).unwrap();
        let sp = schur_point(&m, 0.3, l).unwrap();
        // b real and c imaginary: b*(d − l)⁻¹c = i b c/(d − l)
        prop_assert!((sp.pi - (p - b * b / (d - l))).abs() <= 1e-12 * (1.0 + sp.pi.abs()));
        prop_assert!((sp.r - b * c / (d - l)).abs() <= 1e-12 * (1.0 + sp.r.abs()));
        prop_assert!((sp.varkappa - (q - l - c * c / (d - l))).abs() <= 1e-12 * (1.0 + sp.varkappa.abs()));
    }
}
