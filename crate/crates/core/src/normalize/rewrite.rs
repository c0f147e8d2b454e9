//! Single bottom-up rewriting pass: at each node the children are
//! rewritten first, then the node is simplified, then (when enabled)
//! disjunctions are hoisted above it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::schema::{Range, Schema};
use crate::value::Value;

pub(crate) struct Rewriter {
    hoist: bool,
    cap: usize,
    pub(crate) visits: usize,
}

impl Rewriter {
    pub(crate) fn new(hoist: bool, cap: usize) -> Self {
        Rewriter {
            hoist,
            cap,
            visits: 0,
        }
    }

    pub(crate) fn visit(&mut self, schema: &Schema) -> Result<Schema> {
        self.visits += 1;
        match schema {
            Schema::Top | Schema::Bottom | Schema::Enum(_) | Schema::Range(_) => Ok(schema.clone()),
            Schema::Not(child) => {
                let inner = self.visit(child)?;
                self.negate(inner)
            }
            Schema::AnyOf(children) => {
                let parts = children.iter().map(|c| self.visit(c)).collect::<Result<Vec<_>>>()?;
                self.or(parts)
            }
            Schema::AllOf(children) => {
                let mut acc = Schema::Top;
                for c in children {
                    let part = self.visit(c)?;
                    acc = self.and(acc, part)?;
                }
                Ok(acc)
            }
            Schema::Record(props) => {
                let mut out = BTreeMap::new();
                for (k, sub) in props {
                    out.insert(k.clone(), self.visit(sub)?);
                }
                self.record(out)
            }
        }
    }

    fn check_cap(&self, what: &str, count: usize) -> Result<()> {
        if count > self.cap {
            return Err(Error::Explosion {
                what: what.to_string(),
                count,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// s∨⊥ ⇒ s, s∨⊤ ⇒ ⊤, flattening, exact-duplicate removal.
    fn or(&mut self, parts: Vec<Schema>) -> Result<Schema> {
        let mut out: Vec<Schema> = Vec::new();
        for p in parts {
            let items = match p {
                Schema::AnyOf(cs) => cs,
                other => vec![other],
            };
            for item in items {
                match item {
                    Schema::Bottom => {}
                    Schema::Top => return Ok(Schema::Top),
                    item if out.contains(&item) => {}
                    item => out.push(item),
                }
            }
        }
        if self.hoist {
            self.check_cap("disjunction", out.len())?;
        }
        Ok(match out.len() {
            0 => Schema::Bottom,
            1 => out.pop().unwrap_or(Schema::Bottom),
            _ => Schema::AnyOf(out),
        })
    }

    fn negate(&mut self, s: Schema) -> Result<Schema> {
        Ok(match s {
            Schema::Top => Schema::Bottom,
            Schema::Bottom => Schema::Top,
            Schema::Not(inner) => *inner,
            // ¬(s0 ∨ s1) ⇒ (¬s0) ∧ (¬s1)
            Schema::AnyOf(cs) => {
                let mut acc = Schema::Top;
                for c in cs {
                    let n = self.negate(c)?;
                    acc = self.and(acc, n)?;
                }
                acc
            }
            other => Schema::not(other),
        })
    }

    pub(crate) fn and(&mut self, a: Schema, b: Schema) -> Result<Schema> {
        match (a, b) {
            (Schema::Top, x) | (x, Schema::Top) => Ok(x),
            (Schema::Bottom, _) | (_, Schema::Bottom) => Ok(Schema::Bottom),
            (Schema::AnyOf(xs), y) if self.hoist => self.distribute(xs, vec![y]),
            (x, Schema::AnyOf(ys)) if self.hoist => self.distribute(vec![x], ys),
            (Schema::AllOf(xs), y) => self.extend_residual(xs, y),
            (x, Schema::AllOf(ys)) => {
                let mut acc = Schema::AllOf(vec![x]);
                for y in ys {
                    acc = self.and(acc, y)?;
                }
                Ok(acc)
            }
            (x, y) => match self.combine(&x, &y)? {
                Some(s) => Ok(s),
                None => Ok(Schema::AllOf(vec![x, y])),
            },
        }
    }

    /// (s0 ∨ s1) ∧ (s2 ∨ s3) ⇒ (s0∧s2) ∨ (s0∧s3) ∨ (s1∧s2) ∨ (s1∧s3)
    fn distribute(&mut self, xs: Vec<Schema>, ys: Vec<Schema>) -> Result<Schema> {
        self.check_cap("disjunction hoisting", xs.len().saturating_mul(ys.len()))?;
        let mut parts = Vec::with_capacity(xs.len() * ys.len());
        for x in &xs {
            for y in &ys {
                parts.push(self.and(x.clone(), y.clone())?);
            }
        }
        self.or(parts)
    }

    /// Adds a conjunct to a conjunction that could not be fully combined,
    /// merging it into the first member it combines with.
    fn extend_residual(&mut self, mut xs: Vec<Schema>, y: Schema) -> Result<Schema> {
        for i in 0..xs.len() {
            if matches!(xs[i], Schema::AnyOf(_)) {
                continue;
            }
            if let Some(merged) = self.combine(&xs[i], &y)? {
                if merged == Schema::Bottom {
                    return Ok(Schema::Bottom);
                }
                xs.remove(i);
                return self.and(Schema::AllOf(xs), merged).map(unwrap_single);
            }
        }
        xs.push(y);
        Ok(unwrap_single(Schema::AllOf(xs)))
    }

    /// Conjunction of two non-disjunctive forms; `None` when no rewrite
    /// applies.
    fn combine(&mut self, x: &Schema, y: &Schema) -> Result<Option<Schema>> {
        use Schema::*;
        let out = match (x, y) {
            // [cat0] ∧ [cat1] ⇒ [cat0 ∩ cat1]
            (Enum(a), Enum(b)) => Schema::enumeration(a.iter().filter(|v| b.contains(v)).cloned()),
            // [cat0] ∧ ¬[cat1] ⇒ [cat0 ∖ cat1]
            (Enum(a), Not(n)) | (Not(n), Enum(a)) if matches!(**n, Enum(_)) => {
                let Enum(b) = &**n else { unreachable!() };
                Schema::enumeration(a.iter().filter(|v| !b.contains(v)).cloned())
            }
            (Not(n0), Not(n1)) => match (&**n0, &**n1) {
                (Enum(a), Enum(b)) => {
                    Schema::not(Schema::enumeration(a.iter().chain(b.iter()).cloned()))
                }
                _ => return Ok(None),
            },
            (Range(a), Range(b)) => Schema::range(a.intersect(b)),
            (Enum(a), Range(r)) | (Range(r), Enum(a)) => {
                Schema::enumeration(a.iter().filter(|v| r.contains(v)).cloned())
            }
            (Range(r), Not(n)) | (Not(n), Range(r)) if matches!(**n, Enum(_)) => {
                let Enum(excluded) = &**n else { unreachable!() };
                self.split_range(r, excluded)?
            }
            (Record(a), Record(b)) => return self.merge_records(a, b).map(Some),
            // records are never members of scalar sets
            (Record(_), Enum(_) | Range(_)) | (Enum(_) | Range(_), Record(_)) => Bottom,
            (Record(_), Not(n)) | (Not(n), Record(_)) if matches!(**n, Enum(_) | Range(_)) => {
                if matches!(x, Record(_)) {
                    x.clone()
                } else {
                    y.clone()
                }
            }
            _ => return Ok(None),
        };
        Ok(Some(out))
    }

    fn split_range(&mut self, r: &Range, excluded: &[Value]) -> Result<Schema> {
        let pieces: Vec<Schema> = r.exclude(excluded).into_iter().map(Schema::Range).collect();
        self.or(pieces)
    }

    /// dict{k0:s0, k1:s1} ∧ dict{k0:s0'} ⇒ dict{k0:s0∧s0', k1:s1}; a key
    /// missing on one side is unconstrained there.
    fn merge_records(
        &mut self,
        a: &BTreeMap<String, Schema>,
        b: &BTreeMap<String, Schema>,
    ) -> Result<Schema> {
        let mut out = a.clone();
        for (k, sb) in b {
            let merged = match out.remove(k) {
                Some(sa) => self.and(sa, sb.clone())?,
                None => sb.clone(),
            };
            out.insert(k.clone(), merged);
        }
        self.record(out)
    }

    /// dict{k0: s0 ∨ s0', k1: s1} ⇒ dict{k0:s0, k1:s1} ∨ dict{k0:s0', k1:s1}
    fn record(&mut self, props: BTreeMap<String, Schema>) -> Result<Schema> {
        if props.values().any(|s| *s == Schema::Bottom) {
            return Ok(Schema::Bottom);
        }
        if !self.hoist || !props.values().any(|s| matches!(s, Schema::AnyOf(_))) {
            return Ok(Schema::Record(props));
        }
        let count = props
            .values()
            .map(|s| match s {
                Schema::AnyOf(cs) => cs.len(),
                _ => 1,
            })
            .try_fold(1usize, |acc, n| acc.checked_mul(n))
            .unwrap_or(usize::MAX);
        self.check_cap("record hoisting", count)?;
        let mut rows: Vec<BTreeMap<String, Schema>> = vec![BTreeMap::new()];
        for (k, s) in props {
            let alts = match s {
                Schema::AnyOf(cs) => cs,
                other => vec![other],
            };
            let mut next = Vec::with_capacity(rows.len() * alts.len());
            for row in &rows {
                for alt in &alts {
                    let mut r = row.clone();
                    r.insert(k.clone(), alt.clone());
                    next.push(r);
                }
            }
            rows = next;
        }
        self.or(rows.into_iter().map(Schema::Record).collect())
    }
}

fn unwrap_single(s: Schema) -> Schema {
    match s {
        Schema::AllOf(mut xs) if xs.len() == 1 => xs.pop().unwrap_or(Schema::Top),
        Schema::AllOf(xs) if xs.is_empty() => Schema::Top,
        other => other,
    }
}
