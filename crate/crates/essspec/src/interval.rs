//! Ordered unions of closed intervals on the extended real line.

use serde::{Deserialize, Serialize};

/// Serde helpers writing `±∞` as the strings `"inf"` / `"-inf"`.
pub mod ext_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *x == f64::INFINITY {
            s.serialize_str("inf")
        } else if *x == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Null,
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Null => Ok(f64::NAN),
            Raw::Num(x) => Ok(x),
            Raw::Str(s) => match s.as_str() {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not an extended real: {s}"))),
            },
        }
    }
}

/// [`ext_real`] for optional values; `None` is `null`.
pub mod ext_real_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        match x {
            Some(v) => super::ext_real::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        #[derive(Deserialize)]
        struct Wrap(#[serde(with = "super::ext_real")] f64);
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "ext_real")]
    pub lo: f64,
    #[serde(with = "ext_real")]
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn is_compact(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalSet {
    intervals: Vec<Interval>,
}

fn gap_tol(x: f64, merge_tol: f64) -> f64 {
    if x.is_finite() {
        merge_tol * (1.0 + x.abs())
    } else {
        0.0
    }
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet::default()
    }

    /// Sorts and merges intervals whose gap is below `merge_tol·(1 + |endpoint|)`.
    pub fn from_intervals(mut items: Vec<Interval>, merge_tol: f64) -> Self {
        items.retain(|i| !(i.lo.is_nan() || i.hi.is_nan()));
        items.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.hi.total_cmp(&b.hi)));
        let mut out: Vec<Interval> = Vec::with_capacity(items.len());
        for it in items {
            match out.last_mut() {
                Some(last) if it.lo <= last.hi + gap_tol(last.hi, merge_tol) => {
                    last.hi = last.hi.max(it.hi);
                }
                _ => out.push(it),
            }
        }
        IntervalSet { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn union(&self, other: &IntervalSet, merge_tol: f64) -> IntervalSet {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalSet::from_intervals(all, merge_tol)
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(x, tol))
    }

    pub fn compact_count(&self) -> usize {
        self.intervals.iter().filter(|i| i.is_compact()).count()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(Interval::is_compact)
    }

    pub fn inf(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.lo)
    }

    pub fn sup(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.hi)
    }

    /// All endpoints in ascending order.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals.iter().flat_map(|i| [i.lo, i.hi]).collect()
    }

    /// Largest finite endpoint magnitude (0 for the empty set).
    pub fn max_finite_abs(&self) -> f64 {
        self.endpoints()
            .into_iter()
            .filter(|x| x.is_finite())
            .fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `sup |x|` over the set: `+∞` if unbounded, 0 if empty.
    pub fn sup_abs(&self) -> f64 {
        if !self.is_bounded() {
            return f64::INFINITY;
        }
        self.max_finite_abs()
    }

    /// Distance from `x` to the nearest finite endpoint (`+∞` if there is none).
    pub fn distance_to_endpoint(&self, x: f64) -> f64 {
        self.endpoints()
            .into_iter()
            .filter(|e| e.is_finite())
            .fold(f64::INFINITY, |m, e| m.min((x - e).abs()))
    }

    /// Distance from `x` to the set (0 inside, `+∞` for the empty set).
    pub fn distance(&self, x: f64) -> f64 {
        self.intervals.iter().fold(f64::INFINITY, |m, i| {
            let d = if x < i.lo {
                i.lo - x
            } else if x > i.hi {
                x - i.hi
            } else {
                0.0
            };
            m.min(d)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merging_and_order() {
        let s = IntervalSet::from_intervals(
            vec![Interval::new(3.0, 4.0), Interval::new(0.0, 1.0), Interval::new(1.0 + 1e-12, 2.0)],
            1e-9,
        );
        assert_eq!(s.intervals(), &[Interval::new(0.0, 2.0), Interval::new(3.0, 4.0)]);
        assert_eq!(s.compact_count(), 2);
        assert_eq!(s.sup_abs(), 4.0);
    }

    #[test]
    fn unbounded_and_empty() {
        let s = IntervalSet::from_intervals(vec![Interval::new(0.5, f64::INFINITY)], 1e-9);
        assert_eq!(s.sup_abs(), f64::INFINITY);
        assert_eq!(s.compact_count(), 0);
        assert_eq!(IntervalSet::empty().sup_abs(), 0.0);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[{"lo":0.5,"hi":"inf"}]"#);
        let back: IntervalSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn containment_and_distance() {
        let s = IntervalSet::from_intervals(vec![Interval::new(-1.0, 1.0), Interval::point(3.0)], 1e-9);
        assert!(s.contains(0.0, 0.0) && s.contains(3.0, 0.0) && !s.contains(2.0, 0.1));
        assert_eq!(s.distance(2.0), 1.0);
        assert_eq!(s.distance_to_endpoint(0.2), 0.8);
    }
}
