use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::schema::Schema;

/// Moves every disjunction above the conjunctions and records containing
/// it, bottom-up, without simplifying anything else.
///
/// `(s0 ∨ s1) ∧ s2` becomes `(s0 ∧ s2) ∨ (s1 ∧ s2)` and
/// `dict{k: s0 ∨ s1, ...}` becomes `dict{k: s0, ...} ∨ dict{k: s1, ...}`.
pub fn hoist(schema: &Schema, cap: usize) -> Result<Schema> {
    match schema {
        Schema::Top | Schema::Bottom | Schema::Enum(_) | Schema::Range(_) => Ok(schema.clone()),
        Schema::Not(c) => Ok(Schema::not(hoist(c, cap)?)),
        Schema::AnyOf(cs) => {
            let mut out = Vec::with_capacity(cs.len());
            for c in cs {
                match hoist(c, cap)? {
                    Schema::AnyOf(inner) => out.extend(inner),
                    other => out.push(other),
                }
            }
            check(out.len(), cap)?;
            Ok(Schema::AnyOf(out))
        }
        Schema::AllOf(cs) => {
            let parts = cs.iter().map(|c| hoist(c, cap)).collect::<Result<Vec<_>>>()?;
            if !parts.iter().any(|p| matches!(p, Schema::AnyOf(_))) {
                return Ok(Schema::AllOf(parts));
            }
            let rows = product(parts, cap)?;
            Ok(Schema::AnyOf(rows.into_iter().map(Schema::AllOf).collect()))
        }
        Schema::Record(props) => {
            let mut keys = Vec::with_capacity(props.len());
            let mut parts = Vec::with_capacity(props.len());
            for (k, s) in props {
                keys.push(k.clone());
                parts.push(hoist(s, cap)?);
            }
            if !parts.iter().any(|p| matches!(p, Schema::AnyOf(_))) {
                return Ok(Schema::Record(keys.into_iter().zip(parts).collect()));
            }
            let rows = product(parts, cap)?;
            Ok(Schema::AnyOf(
                rows.into_iter()
                    .map(|row| Schema::Record(keys.iter().cloned().zip(row).collect::<BTreeMap<_, _>>()))
                    .collect(),
            ))
        }
    }
}

fn check(count: usize, cap: usize) -> Result<()> {
    if count > cap {
        return Err(Error::Explosion {
            what: "disjunction hoisting".into(),
            count,
            cap,
        });
    }
    Ok(())
}

/// Cartesian product of the alternatives of each part; a non-disjunctive
/// part is its own single alternative.
fn product(parts: Vec<Schema>, cap: usize) -> Result<Vec<Vec<Schema>>> {
    let alternatives: Vec<Vec<Schema>> = parts
        .into_iter()
        .map(|p| match p {
            Schema::AnyOf(cs) => cs,
            other => vec![other],
        })
        .collect();
    let count = alternatives
        .iter()
        .try_fold(1usize, |acc, a| acc.checked_mul(a.len()))
        .unwrap_or(usize::MAX);
    check(count, cap)?;
    let mut rows: Vec<Vec<Schema>> = vec![Vec::new()];
    for alts in alternatives {
        let mut next = Vec::with_capacity(rows.len() * alts.len());
        for row in &rows {
            for alt in &alts {
                let mut r = row.clone();
                r.push(alt.clone());
                next.push(r);
            }
        }
        rows = next;
    }
    Ok(rows)
}
