//! Normalization of one operator's hyperparameter schema into a
//! disjunction of flat grids, `∨(dict{cat*, cont*}*)`.
//!
//! The rewriting is a single bottom-up pass ([`rewrite`]): at each node the
//! simplification rules run first, then disjunctions are hoisted. Only
//! exact duplicate disjuncts are removed. Whatever cannot be brought into
//! the flat shape (negation of anything but an enum under a conjunction,
//! nested records, unconstrained keys) is reported as
//! [`Error::NotNormalizable`].

mod hoist;
mod rewrite;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::schema::{schema_to_json, Range, Schema};
use crate::value::Value;

pub use hoist::hoist as hoist_with_cap;

pub const DEFAULT_DISJUNCT_CAP: usize = 10_000;

/// One hyperparameter's admissible values inside a grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Dimension {
    Categorical(Vec<Value>),
    Continuous(Range),
}

impl Dimension {
    pub fn contains(&self, v: &Value) -> bool {
        match self {
            Dimension::Categorical(vs) => vs.contains(v),
            Dimension::Continuous(r) => r.contains(v),
        }
    }

    pub fn to_schema(&self) -> Schema {
        match self {
            Dimension::Categorical(vs) => Schema::Enum(vs.clone()),
            Dimension::Continuous(r) => Schema::Range(*r),
        }
    }

    pub fn from_schema(s: &Schema) -> Option<Dimension> {
        match s {
            Schema::Enum(vs) => Some(Dimension::Categorical(vs.clone())),
            Schema::Range(r) => Some(Dimension::Continuous(*r)),
            _ => None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self, Dimension::Categorical(_))
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_schema().fmt(f)
    }
}

/// A flat record of dimensions.
pub type Grid = BTreeMap<String, Dimension>;

pub fn grid_to_schema(grid: &Grid) -> Schema {
    Schema::Record(grid.iter().map(|(k, d)| (k.clone(), d.to_schema())).collect())
}

pub fn grid_contains(grid: &Grid, config: &BTreeMap<String, Value>) -> bool {
    grid.len() == config.len()
        && grid
            .iter()
            .all(|(k, d)| config.get(k).is_some_and(|v| d.contains(v)))
}

/// The normal form: a disjunction of grids that all bind the same keys.
/// Zero disjuncts means the operator admits no configuration.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizedSpace {
    pub disjuncts: Vec<Grid>,
}

impl NormalizedSpace {
    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    /// The space as a schema: `anyOf` of records (`false` when empty).
    pub fn to_schema(&self) -> Schema {
        if self.disjuncts.is_empty() {
            Schema::Bottom
        } else {
            Schema::AnyOf(self.disjuncts.iter().map(grid_to_schema).collect())
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        schema_to_json(&self.to_schema())
    }

    /// Reads a schema that is already literally in normal form.
    pub fn from_schema(schema: &Schema) -> Result<NormalizedSpace> {
        let disjuncts = match schema {
            Schema::Bottom => Vec::new(),
            Schema::Top => vec![Grid::new()],
            Schema::Record(_) => vec![record_to_grid(schema)?],
            Schema::AnyOf(cs) => cs.iter().map(record_to_grid).collect::<Result<_>>()?,
            other => return Err(Error::NotNormalizable(format!("residual {other}"))),
        };
        let space = NormalizedSpace { disjuncts };
        space.check_key_sets()?;
        Ok(space)
    }

    fn check_key_sets(&self) -> Result<()> {
        let Some(first) = self.disjuncts.first() else {
            return Ok(());
        };
        for g in &self.disjuncts[1..] {
            if !g.keys().eq(first.keys()) {
                let missing = first
                    .keys()
                    .find(|k| !g.contains_key(*k))
                    .or_else(|| g.keys().find(|k| !first.contains_key(*k)))
                    .cloned()
                    .unwrap_or_default();
                return Err(Error::NotNormalizable(format!(
                    "not every disjunct binds hyperparameter `{missing}`"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for NormalizedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_schema().fmt(f)
    }
}

fn record_to_grid(s: &Schema) -> Result<Grid> {
    let Schema::Record(props) = s else {
        return Err(Error::NotNormalizable(format!("disjunct {s} is not a record")));
    };
    props
        .iter()
        .map(|(k, sub)| {
            Dimension::from_schema(sub)
                .map(|d| (k.clone(), d))
                .ok_or_else(|| {
                    Error::NotNormalizable(format!(
                        "hyperparameter `{k}` is {sub}, not a categorical or a range"
                    ))
                })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeOptions {
    /// Upper bound on the number of disjuncts any single rewrite may produce.
    pub disjunct_cap: usize,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            disjunct_cap: DEFAULT_DISJUNCT_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizeStats {
    pub visits: usize,
    pub ast_size: usize,
}

/// Applies the simplification rewrites only.
pub fn simplify(schema: &Schema) -> Schema {
    let mut rw = rewrite::Rewriter::new(false, usize::MAX);
    rw.visit(schema)
        .expect("simplification never distributes, so it cannot hit the cap")
}

/// Applies the hoisting rewrites only, with the default cap.
pub fn hoist(schema: &Schema) -> Result<Schema> {
    hoist::hoist(schema, DEFAULT_DISJUNCT_CAP)
}

pub fn normalize(schema: &Schema) -> Result<NormalizedSpace> {
    normalize_with(schema, &NormalizeOptions::default()).map(|(space, _)| space)
}

pub fn normalize_with(
    schema: &Schema,
    opts: &NormalizeOptions,
) -> Result<(NormalizedSpace, NormalizeStats)> {
    let mut rw = rewrite::Rewriter::new(true, opts.disjunct_cap);
    let rewritten = rw.visit(schema)?;
    let stats = NormalizeStats {
        visits: rw.visits,
        ast_size: schema.size(),
    };
    Ok((NormalizedSpace::from_schema(&rewritten)?, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{parse_schema, serialize_schema};

    fn e<V: Into<Value> + Clone>(vs: &[V]) -> Schema {
        Schema::enumeration(vs.iter().cloned())
    }

    fn unit() -> Schema {
        Schema::range(Range::open(0.0, 1.0))
    }

    fn j48() -> Schema {
        Schema::all_of(vec![
            Schema::record([("R", e(&[true, false])), ("C", unit())]),
            Schema::any_of(vec![
                Schema::record([("R", Schema::not(e(&[true])))]),
                Schema::record([("C", e(&[0.25]))]),
            ]),
        ])
    }

    fn lr() -> Schema {
        Schema::all_of(vec![
            Schema::record([("S", e(&["linear", "sag", "lbfgs"])), ("P", e(&["l1", "l2"]))]),
            Schema::any_of(vec![
                Schema::record([("S", Schema::not(e(&["sag", "lbfgs"])))]),
                Schema::record([("P", e(&["l2"]))]),
            ]),
        ])
    }

    fn grid(pairs: Vec<(&str, Dimension)>) -> Grid {
        pairs.into_iter().map(|(k, d)| (k.to_string(), d)).collect()
    }

    fn cat<V: Into<Value> + Clone>(vs: &[V]) -> Dimension {
        Dimension::Categorical(vs.iter().cloned().map(Into::into).collect())
    }

    #[test]
    fn simplify_enum_minus_negated_enum() {
        let s = Schema::all_of(vec![e(&[true, false]), Schema::not(e(&[true]))]);
        assert_eq!(simplify(&s), e(&[false]));
    }

    #[test]
    fn simplify_drops_top() {
        assert_eq!(simplify(&Schema::all_of(vec![unit(), Schema::Top])), unit());
    }

    #[test]
    fn simplify_intersects_enums() {
        let s = Schema::all_of(vec![e(&["l1", "l2"]), e(&["l2"])]);
        assert_eq!(simplify(&s), e(&["l2"]));
    }

    #[test]
    fn simplify_or_bottom_and_de_morgan() {
        assert_eq!(simplify(&Schema::any_of(vec![unit(), Schema::Bottom])), unit());
        assert_eq!(simplify(&Schema::any_of(vec![unit(), Schema::Top])), Schema::Top);
        // ¬([a] ∨ [b]) ∧ [a, b, c] ⇒ [c]
        let s = Schema::all_of(vec![
            Schema::not(Schema::any_of(vec![e(&["a"]), e(&["b"])])),
            e(&["a", "b", "c"]),
        ]);
        assert_eq!(simplify(&s), e(&["c"]));
    }

    #[test]
    fn simplify_does_not_hoist() {
        let s = Schema::record([("N", Schema::any_of(vec![unit(), e(&["mle"])]))]);
        assert_eq!(simplify(&s), s);
    }

    #[test]
    fn simplify_merges_records() {
        let s = Schema::all_of(vec![
            Schema::record([("a", e(&[1i64, 2])), ("b", e(&["x"]))]),
            Schema::record([("a", e(&[2i64, 3]))]),
        ]);
        assert_eq!(simplify(&s), Schema::record([("a", e(&[2i64])), ("b", e(&["x"]))]));
    }

    #[test]
    fn hoist_record_with_disjunctive_field() {
        let s = Schema::record([("N", Schema::any_of(vec![unit(), e(&["mle"])]))]);
        let expected = Schema::any_of(vec![
            Schema::record([("N", unit())]),
            Schema::record([("N", e(&["mle"]))]),
        ]);
        assert_eq!(hoist(&s).unwrap(), expected);
    }

    #[test]
    fn hoist_distributes_conjunction() {
        let (a, b, c, d) = (e(&["a"]), e(&["b"]), e(&["c"]), e(&["d"]));
        let s = Schema::all_of(vec![
            Schema::any_of(vec![a.clone(), b.clone()]),
            Schema::any_of(vec![c.clone(), d.clone()]),
        ]);
        let Schema::AnyOf(parts) = hoist(&s).unwrap() else { panic!() };
        assert_eq!(
            parts,
            vec![
                Schema::all_of(vec![a.clone(), c.clone()]),
                Schema::all_of(vec![a, d.clone()]),
                Schema::all_of(vec![b.clone(), c]),
                Schema::all_of(vec![b, d]),
            ]
        );
    }

    #[test]
    fn hoist_leaves_flat_record_alone() {
        let s = Schema::record([("a", e(&[1i64])), ("b", unit())]);
        assert_eq!(hoist(&s).unwrap(), s);
    }

    #[test]
    fn hoist_respects_cap() {
        let wide = Schema::any_of((0..20i64).map(|i| e(&[i])).collect());
        let s = Schema::all_of(vec![wide.clone(), wide]);
        assert!(matches!(hoist_with_cap(&s, 100), Err(Error::Explosion { count: 400, .. })));
    }

    #[test]
    fn normalize_pca() {
        let s = Schema::record([("N", Schema::any_of(vec![unit(), e(&["mle"])]))]);
        let space = normalize(&s).unwrap();
        assert_eq!(
            space.disjuncts,
            vec![
                grid(vec![("N", Dimension::Continuous(Range::open(0.0, 1.0).unwrap()))]),
                grid(vec![("N", cat(&["mle"]))]),
            ]
        );
    }

    #[test]
    fn normalize_j48() {
        let space = normalize(&j48()).unwrap();
        assert_eq!(
            space.disjuncts,
            vec![
                grid(vec![
                    ("R", cat(&[false])),
                    ("C", Dimension::Continuous(Range::open(0.0, 1.0).unwrap()))
                ]),
                grid(vec![("R", cat(&[true, false])), ("C", cat(&[0.25]))]),
            ]
        );
    }

    #[test]
    fn normalize_lr() {
        let space = normalize(&lr()).unwrap();
        assert_eq!(
            space.disjuncts,
            vec![
                grid(vec![("S", cat(&["linear"])), ("P", cat(&["l1", "l2"]))]),
                grid(vec![("S", cat(&["linear", "sag", "lbfgs"])), ("P", cat(&["l2"]))]),
            ]
        );
    }

    #[test]
    fn negated_range_is_not_normalizable() {
        let err = normalize(&Schema::not(unit())).unwrap_err();
        assert!(matches!(err, Error::NotNormalizable(_)), "{err}");
        let s = Schema::record([("x", Schema::all_of(vec![unit(), Schema::not(unit())]))]);
        assert!(matches!(normalize(&s), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn lone_negated_enum_is_not_normalizable() {
        let s = Schema::record([("R", Schema::not(e(&[true])))]);
        assert!(matches!(normalize(&s), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn range_minus_point_splits() {
        let s = Schema::all_of(vec![
            Schema::record([("C", unit())]),
            Schema::record([("C", Schema::not(e(&[0.25])))]),
        ]);
        let space = normalize(&s).unwrap();
        assert_eq!(space.disjuncts.len(), 2);
        assert!(space
            .disjuncts
            .iter()
            .all(|g| !g["C"].contains(&Value::Real(0.25))));
    }

    #[test]
    fn unsatisfiable_schema_has_no_disjuncts() {
        let s = Schema::all_of(vec![
            Schema::record([("a", e(&["x"]))]),
            Schema::record([("a", e(&["y"]))]),
        ]);
        assert!(normalize(&s).unwrap().is_empty());
    }

    #[test]
    fn mismatched_key_sets_are_rejected() {
        let s = Schema::any_of(vec![Schema::record([("a", e(&[1i64]))]), Schema::record([("b", e(&[1i64]))])]);
        assert!(matches!(normalize(&s), Err(Error::NotNormalizable(_))));
    }

    #[test]
    fn visits_are_linear() {
        let (_, stats) = normalize_with(&j48(), &NormalizeOptions::default()).unwrap();
        assert_eq!(stats.visits, stats.ast_size);
    }

    #[test]
    fn normalizing_normal_form_is_identity() {
        for s in [j48(), lr()] {
            let space = normalize(&s).unwrap();
            let text = serialize_schema(&space.to_schema());
            let again = normalize(&parse_schema(&text).unwrap()).unwrap();
            assert_eq!(again, space);
        }
    }

    #[test]
    fn duplicate_disjuncts_are_removed() {
        let r = Schema::record([("a", e(&[1i64]))]);
        let s = Schema::any_of(vec![r.clone(), r.clone()]);
        assert_eq!(normalize(&s).unwrap().disjuncts.len(), 1);
    }
}
