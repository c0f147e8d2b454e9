//! Brute-force instance enumeration over a discretized schema.
//!
//! Every `Range` contributes `cuts` evenly spaced interior points and every
//! `Enum` (negated or not) contributes its members. Candidate values are
//! collected per record key, the Cartesian product over keys is formed,
//! and the result is filtered by [`validate_instance`]. This path shares
//! nothing with the normalizer and is used to check it.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::value::{Instance, Value};

use super::{validate_instance, NumKind, Range, Schema};

pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// `cuts` evenly spaced points strictly inside `[lo, hi]`.
fn interior_points(r: &Range, cuts: usize) -> Result<Vec<Value>> {
    if !r.is_bounded() {
        return Err(Error::Config(format!("cannot discretize unbounded range {r}")));
    }
    let step = (r.hi - r.lo) / (cuts as f64 + 1.0);
    let mut out: Vec<Value> = Vec::with_capacity(cuts);
    for i in 1..=cuts {
        let x = r.lo + step * i as f64;
        let v = match r.kind {
            NumKind::Real => Value::Real(x),
            NumKind::Integer => Value::Int(x.round() as i64),
        };
        if !out.contains(&v) {
            out.push(v);
        }
    }
    Ok(out)
}

fn push_unique(into: &mut Vec<Value>, v: Value) {
    if !into.contains(&v) {
        into.push(v);
    }
}

/// Collects candidate scalars from a value-level schema.
fn scalar_atoms(schema: &Schema, cuts: usize, out: &mut Vec<Value>) -> Result<()> {
    match schema {
        Schema::Top | Schema::Bottom => Ok(()),
        Schema::Enum(vs) => {
            for v in vs {
                push_unique(out, v.clone());
            }
            Ok(())
        }
        Schema::Range(r) => {
            for v in interior_points(r, cuts)? {
                push_unique(out, v);
            }
            Ok(())
        }
        Schema::AnyOf(cs) | Schema::AllOf(cs) => cs.iter().try_for_each(|c| scalar_atoms(c, cuts, out)),
        Schema::Not(c) => scalar_atoms(c, cuts, out),
        Schema::Record(_) => Err(Error::unsupported(
            "enumeration",
            "records nested inside record properties",
        )),
    }
}

/// Collects candidate values per key from the records reachable at the
/// top level (through `AnyOf`, `AllOf` and `Not`).
fn record_atoms(
    schema: &Schema,
    cuts: usize,
    out: &mut BTreeMap<String, Vec<Value>>,
) -> Result<bool> {
    match schema {
        Schema::Record(props) => {
            for (k, sub) in props {
                scalar_atoms(sub, cuts, out.entry(k.clone()).or_default())?;
            }
            Ok(true)
        }
        Schema::AnyOf(cs) | Schema::AllOf(cs) => {
            let mut any = false;
            for c in cs {
                any |= record_atoms(c, cuts, out)?;
            }
            Ok(any)
        }
        Schema::Not(c) => record_atoms(c, cuts, out),
        _ => Ok(false),
    }
}

/// Enumerates the discretized instance set of `schema`.
///
/// Record-shaped schemas yield record instances binding every key that
/// occurs in any top-level record; other schemas yield scalars.
pub fn enumerate_discretized(schema: &Schema, cuts: usize, cap: usize) -> Result<Vec<Instance>> {
    if cuts < 2 {
        return Err(Error::Config(format!("cuts must be at least 2, got {cuts}")));
    }
    let mut per_key = BTreeMap::new();
    let candidates: Vec<Instance> = if record_atoms(schema, cuts, &mut per_key)? {
        if let Some((k, _)) = per_key.iter().find(|(_, vs)| vs.is_empty()) {
            return Err(Error::Config(format!("hyperparameter `{k}` has no candidate values")));
        }
        let total = per_key
            .values()
            .try_fold(1usize, |acc, vs| acc.checked_mul(vs.len()))
            .unwrap_or(usize::MAX);
        if total > cap {
            return Err(Error::Explosion {
                what: "discretized enumeration".into(),
                count: total,
                cap,
            });
        }
        let mut rows: Vec<BTreeMap<String, Instance>> = vec![BTreeMap::new()];
        for (k, vs) in &per_key {
            let mut next = Vec::with_capacity(rows.len() * vs.len());
            for row in &rows {
                for v in vs {
                    let mut r = row.clone();
                    r.insert(k.clone(), Instance::Value(v.clone()));
                    next.push(r);
                }
            }
            rows = next;
        }
        rows.into_iter().map(Instance::Record).collect()
    } else {
        let mut atoms = Vec::new();
        scalar_atoms(schema, cuts, &mut atoms)?;
        atoms.into_iter().map(Instance::Value).collect()
    };
    Ok(candidates
        .into_iter()
        .filter(|inst| validate_instance(schema, inst).is_ok())
        .collect())
}
