//! The hyperparameter constraint language.
//!
//! A [`Schema`] denotes a set of instances. The leaves are categorical
//! sets ([`Schema::Enum`]) and numeric intervals ([`Schema::Range`]);
//! records constrain named fields, and `AnyOf`/`AllOf`/`Not` are union,
//! intersection and complement. The external JSON dialect is handled in
//! [`parse`]; membership in [`validate`]; the brute-force instance
//! enumeration used as a test oracle in [`enumerate`].

mod enumerate;
mod parse;
mod validate;

use std::collections::BTreeMap;
use std::fmt;

pub use enumerate::{enumerate_discretized, DEFAULT_ENUMERATION_CAP};
pub use parse::{parse_schema, schema_from_json, schema_to_json, serialize_schema};
pub use validate::{validate_config, validate_instance, ValidationResult, Violation};

use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NumKind {
    Real,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Distribution {
    #[default]
    Uniform,
    LogUniform,
}

impl Distribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Distribution::Uniform => "uniform",
            Distribution::LogUniform => "loguniform",
        }
    }
}

/// A numeric interval. Bounds may be infinite; `lo <= hi` and the interval
/// is nonempty for every `Range` built through [`Range::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub lo_exclusive: bool,
    pub hi_exclusive: bool,
    pub kind: NumKind,
    pub distribution: Distribution,
}

impl Range {
    /// Returns `None` when the interval contains no admissible value.
    pub fn new(
        lo: f64,
        hi: f64,
        lo_exclusive: bool,
        hi_exclusive: bool,
        kind: NumKind,
        distribution: Distribution,
    ) -> Option<Range> {
        if lo.is_nan() || hi.is_nan() || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return None;
        }
        let r = Range {
            lo,
            hi,
            // exclusivity is meaningless at an infinite bound
            lo_exclusive: lo_exclusive && lo.is_finite(),
            hi_exclusive: hi_exclusive && hi.is_finite(),
            kind,
            distribution,
        };
        if r.is_empty() {
            None
        } else {
            Some(r)
        }
    }

    /// Open real interval `(lo..hi)`, the notation used throughout the
    /// operator schemas.
    pub fn open(lo: f64, hi: f64) -> Option<Range> {
        Range::new(lo, hi, true, true, NumKind::Real, Distribution::Uniform)
    }

    pub fn closed(lo: f64, hi: f64) -> Option<Range> {
        Range::new(lo, hi, false, false, NumKind::Real, Distribution::Uniform)
    }

    pub fn integer(lo: i64, hi: i64) -> Option<Range> {
        Range::new(
            lo as f64,
            hi as f64,
            false,
            false,
            NumKind::Integer,
            Distribution::Uniform,
        )
    }

    pub fn with_distribution(mut self, distribution: Distribution) -> Self {
        self.distribution = distribution;
        self
    }

    fn is_empty(&self) -> bool {
        if self.lo > self.hi {
            return true;
        }
        match self.kind {
            NumKind::Real => self.lo == self.hi && (self.lo_exclusive || self.hi_exclusive),
            NumKind::Integer => match self.integer_bounds() {
                Some((a, b)) => a > b,
                None => false,
            },
        }
    }

    /// Smallest and largest admissible integers, for finite integer ranges.
    pub fn integer_bounds(&self) -> Option<(i64, i64)> {
        if !self.lo.is_finite() || !self.hi.is_finite() {
            return None;
        }
        let mut a = self.lo.ceil();
        if self.lo_exclusive && a == self.lo {
            a += 1.0;
        }
        let mut b = self.hi.floor();
        if self.hi_exclusive && b == self.hi {
            b -= 1.0;
        }
        Some((a as i64, b as i64))
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let above = if self.lo_exclusive { x > self.lo } else { x >= self.lo };
        let below = if self.hi_exclusive { x < self.hi } else { x <= self.hi };
        above && below
    }

    /// Integer ranges admit integral numbers; real ranges admit any number.
    pub fn contains(&self, v: &Value) -> bool {
        match (self.kind, v) {
            (NumKind::Integer, Value::Int(i)) => self.contains_f64(*i as f64),
            (NumKind::Integer, Value::Real(r)) => r.fract() == 0.0 && self.contains_f64(*r),
            (NumKind::Integer, _) => false,
            (NumKind::Real, v) => v.as_f64().is_some_and(|x| self.contains_f64(x)),
        }
    }

    /// Intersection of two intervals. The distribution comes from `self`.
    pub fn intersect(&self, other: &Range) -> Option<Range> {
        let (lo, lo_exclusive) = if self.lo > other.lo {
            (self.lo, self.lo_exclusive)
        } else if other.lo > self.lo {
            (other.lo, other.lo_exclusive)
        } else {
            (self.lo, self.lo_exclusive || other.lo_exclusive)
        };
        let (hi, hi_exclusive) = if self.hi < other.hi {
            (self.hi, self.hi_exclusive)
        } else if other.hi < self.hi {
            (other.hi, other.hi_exclusive)
        } else {
            (self.hi, self.hi_exclusive || other.hi_exclusive)
        };
        let kind = if self.kind == NumKind::Integer || other.kind == NumKind::Integer {
            NumKind::Integer
        } else {
            NumKind::Real
        };
        Range::new(lo, hi, lo_exclusive, hi_exclusive, kind, self.distribution)
    }

    /// Removes the given points from the interval. The result is the list
    /// of disjoint sub-intervals left over, in ascending order.
    pub fn exclude(&self, points: &[Value]) -> Vec<Range> {
        let mut cuts: Vec<f64> = points
            .iter()
            .filter(|v| self.contains(v))
            .filter_map(Value::as_f64)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pieces = Vec::with_capacity(cuts.len() + 1);
        let mut lo = self.lo;
        let mut lo_exclusive = self.lo_exclusive;
        for c in cuts {
            pieces.extend(Range::new(lo, c, lo_exclusive, true, self.kind, self.distribution));
            lo = c;
            lo_exclusive = true;
        }
        pieces.extend(Range::new(
            lo,
            self.hi,
            lo_exclusive,
            self.hi_exclusive,
            self.kind,
            self.distribution,
        ));
        pieces
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_exclusive { '(' } else { '[' };
        let close = if self.hi_exclusive { ')' } else { ']' };
        write!(f, "{open}{}..{}{close}", self.lo, self.hi)?;
        if self.kind == NumKind::Integer {
            f.write_str("int")?;
        }
        if self.distribution == Distribution::LogUniform {
            f.write_str("log")?;
        }
        Ok(())
    }
}

/// AST of the constraint language.
#[derive(Debug, Clone, PartialEq)]
pub enum Schema {
    /// Accepts everything.
    Top,
    /// Accepts nothing.
    Bottom,
    /// Nonempty, duplicate-free categorical set.
    Enum(Vec<Value>),
    Range(Range),
    Record(BTreeMap<String, Schema>),
    AnyOf(Vec<Schema>),
    AllOf(Vec<Schema>),
    Not(Box<Schema>),
}

impl Schema {
    /// Builds a categorical set, dropping duplicates (first occurrence
    /// wins). An empty set is `Bottom`.
    pub fn enumeration<I, V>(values: I) -> Schema
    where
        I: IntoIterator<Item = V>,
        V: Into<Value>,
    {
        let mut out: Vec<Value> = Vec::new();
        for v in values {
            let v = v.into();
            if !out.contains(&v) {
                out.push(v);
            }
        }
        if out.is_empty() {
            Schema::Bottom
        } else {
            Schema::Enum(out)
        }
    }

    pub fn range(range: Option<Range>) -> Schema {
        range.map_or(Schema::Bottom, Schema::Range)
    }

    pub fn record<I, K>(props: I) -> Schema
    where
        I: IntoIterator<Item = (K, Schema)>,
        K: Into<String>,
    {
        Schema::Record(props.into_iter().map(|(k, s)| (k.into(), s)).collect())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(s: Schema) -> Schema {
        Schema::Not(Box::new(s))
    }

    pub fn any_of(children: Vec<Schema>) -> Schema {
        Schema::AnyOf(children)
    }

    pub fn all_of(children: Vec<Schema>) -> Schema {
        Schema::AllOf(children)
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        1 + match self {
            Schema::Top | Schema::Bottom | Schema::Enum(_) | Schema::Range(_) => 0,
            Schema::Record(props) => props.values().map(Schema::size).sum(),
            Schema::AnyOf(cs) | Schema::AllOf(cs) => cs.iter().map(Schema::size).sum(),
            Schema::Not(c) => c.size(),
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, cs: &[Schema], sep: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{c}")?;
            }
            f.write_str(")")
        }
        match self {
            Schema::Top => f.write_str("⊤"),
            Schema::Bottom => f.write_str("⊥"),
            Schema::Enum(vs) => {
                f.write_str("[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Schema::Range(r) => write!(f, "{r}"),
            Schema::Record(props) => {
                f.write_str("dict{")?;
                for (i, (k, s)) in props.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{k}: {s}")?;
                }
                f.write_str("}")
            }
            Schema::AnyOf(cs) => join(f, cs, " ∨ "),
            Schema::AllOf(cs) => join(f, cs, " ∧ "),
            Schema::Not(c) => write!(f, "¬{c}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_enum_is_bottom() {
        assert_eq!(Schema::enumeration(Vec::<Value>::new()), Schema::Bottom);
        assert_eq!(
            Schema::enumeration(["a", "b", "a"]),
            Schema::Enum(vec!["a".into(), "b".into()])
        );
    }

    #[test]
    fn empty_ranges_are_rejected() {
        assert!(Range::open(1.0, 1.0).is_none());
        assert!(Range::closed(1.0, 1.0).is_some());
        assert!(Range::closed(2.0, 1.0).is_none());
        assert!(Range::new(0.1, 0.9, false, false, NumKind::Integer, Distribution::Uniform).is_none());
        assert_eq!(Schema::range(Range::open(0.0, 0.0)), Schema::Bottom);
    }

    #[test]
    fn integer_range_membership() {
        let r = Range::new(1.0, 4.0, true, false, NumKind::Integer, Distribution::Uniform).unwrap();
        assert_eq!(r.integer_bounds(), Some((2, 4)));
        assert!(!r.contains(&Value::Int(1)));
        assert!(r.contains(&Value::Int(4)));
        assert!(r.contains(&Value::Real(3.0)));
        assert!(!r.contains(&Value::Real(3.5)));
    }

    #[test]
    fn intersection_keeps_tighter_bound() {
        let a = Range::open(0.0, 1.0).unwrap();
        let b = Range::closed(0.5, 2.0).unwrap();
        let c = a.intersect(&b).unwrap();
        assert_eq!((c.lo, c.hi, c.lo_exclusive, c.hi_exclusive), (0.5, 1.0, false, true));
        assert!(a.intersect(&Range::closed(1.0, 2.0).unwrap()).is_none());
    }

    #[test]
    fn exclude_splits_interval() {
        let r = Range::open(0.0, 1.0).unwrap();
        let pieces = r.exclude(&[Value::Real(0.25), Value::Str("x".into()), Value::Real(3.0)]);
        assert_eq!(pieces.len(), 2);
        assert!(!pieces.iter().any(|p| p.contains_f64(0.25)));
        assert!(pieces[0].contains_f64(0.1) && pieces[1].contains_f64(0.9));

        let closed = Range::closed(0.0, 1.0).unwrap();
        let pieces = closed.exclude(&[Value::Int(0)]);
        assert_eq!(pieces.len(), 1);
        assert!(pieces[0].lo_exclusive);
    }
}
