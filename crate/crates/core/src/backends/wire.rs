//! JSON wire formats of compiled spaces. Object keys are sorted, so the
//! output is byte-stable.
//!
//! A dimension is written as a schema (`{"enum": [...]}` or a range) and a
//! grid as an object of dimensions. Each document carries a `backend` tag:
//!
//! * flat: `{"backend": "flat", "disjuncts": [grid, ...]}`
//! * grid: as flat, plus `cuts`, `seed` and `sampled_from`, one object
//!   per disjunct mapping each sampled name to its source range
//! * nested: `{"backend": "nested", "space": node}` where a node is
//!   `{"steps": {"0": node, ...}}`, `{"anyOf": [grid, ...]}` or
//!   `{"choice": {"key": k, "alternatives": [{"label": v, "space": node}]}}`

use std::collections::BTreeMap;

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::normalize::{Dimension, Grid};
use crate::schema::{schema_from_json, schema_to_json, Schema};
use crate::value::Value;

use super::{CompiledSpace, FlatSpace, GridSpace, NestedAlternative, NestedSpace};

fn dimension_to_json(d: &Dimension) -> Json {
    schema_to_json(&d.to_schema())
}

fn grid_to_json(g: &Grid) -> Json {
    Json::Object(g.iter().map(|(k, d)| (k.clone(), dimension_to_json(d))).collect())
}

fn grids_to_json(gs: &[Grid]) -> Json {
    Json::Array(gs.iter().map(grid_to_json).collect())
}

fn nested_to_json(n: &NestedSpace) -> Json {
    match n {
        NestedSpace::Grids(gs) => json!({ "anyOf": grids_to_json(gs) }),
        NestedSpace::Steps(parts) => {
            let steps: Map<String, Json> = parts
                .iter()
                .enumerate()
                .map(|(i, p)| (i.to_string(), nested_to_json(p)))
                .collect();
            json!({ "steps": steps })
        }
        NestedSpace::Choice { key, alternatives } => json!({
            "choice": {
                "key": key,
                "alternatives": alternatives
                    .iter()
                    .map(|a| json!({ "label": a.label.to_json(), "space": nested_to_json(&a.space) }))
                    .collect::<Vec<_>>(),
            }
        }),
    }
}

pub fn space_to_json(space: &CompiledSpace) -> Json {
    match space {
        CompiledSpace::Flat(f) => json!({ "backend": "flat", "disjuncts": grids_to_json(&f.disjuncts) }),
        CompiledSpace::Grid(g) => json!({
            "backend": "grid",
            "cuts": g.cuts,
            "seed": g.seed,
            "disjuncts": grids_to_json(&g.disjuncts),
            "sampled_from": g.sources.iter().map(|m| {
                Json::Object(m.iter().map(|(k, r)| (k.clone(), schema_to_json(&Schema::Range(*r)))).collect())
            }).collect::<Vec<_>>(),
        }),
        CompiledSpace::Nested(n) => json!({ "backend": "nested", "space": nested_to_json(n) }),
    }
}

pub fn serialize_space(space: &CompiledSpace) -> String {
    let mut text = serde_json::to_string_pretty(&space_to_json(space)).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn parse_space(text: &str) -> Result<CompiledSpace> {
    let json: Json = serde_json::from_str(text).map_err(Error::from_json)?;
    space_from_json(&json)
}

fn object<'a>(json: &'a Json, at: &str) -> Result<&'a Map<String, Json>> {
    json.as_object().ok_or_else(|| Error::parse(at, "expected an object"))
}

fn array<'a>(json: Option<&'a Json>, at: &str) -> Result<&'a Vec<Json>> {
    json.and_then(Json::as_array)
        .ok_or_else(|| Error::parse(at, "expected an array"))
}

fn only_keys(obj: &Map<String, Json>, keys: &[&str], at: &str) -> Result<()> {
    match obj.keys().find(|k| !keys.contains(&k.as_str())) {
        Some(k) => Err(Error::parse(at, format!("unexpected key `{k}`"))),
        None => Ok(()),
    }
}

fn dimension_from_json(json: &Json, at: &str) -> Result<Dimension> {
    let s = schema_from_json(json).map_err(|e| Error::parse(at, e.to_string()))?;
    Dimension::from_schema(&s).ok_or_else(|| Error::parse(at, "expected an enum or a range"))
}

fn grid_from_json(json: &Json, at: &str) -> Result<Grid> {
    object(json, at)?
        .iter()
        .map(|(k, v)| Ok((k.clone(), dimension_from_json(v, &format!("{at}/{k}"))?)))
        .collect()
}

fn grids_from_json(json: Option<&Json>, at: &str) -> Result<Vec<Grid>> {
    array(json, at)?
        .iter()
        .enumerate()
        .map(|(i, g)| grid_from_json(g, &format!("{at}/{i}")))
        .collect()
}

fn nested_from_json(json: &Json, at: &str) -> Result<NestedSpace> {
    let obj = object(json, at)?;
    if obj.len() != 1 {
        return Err(Error::parse(at, "expected exactly one of `steps`, `anyOf`, `choice`"));
    }
    if let Some(gs) = obj.get("anyOf") {
        return Ok(NestedSpace::Grids(grids_from_json(Some(gs), &format!("{at}/anyOf"))?));
    }
    if let Some(steps) = obj.get("steps") {
        let here = format!("{at}/steps");
        let steps = object(steps, &here)?;
        let mut parts = Vec::with_capacity(steps.len());
        for i in 0..steps.len() {
            let part = steps
                .get(&i.to_string())
                .ok_or_else(|| Error::parse(&here, format!("missing step {i}")))?;
            parts.push(nested_from_json(part, &format!("{here}/{i}"))?);
        }
        return Ok(NestedSpace::Steps(parts));
    }
    if let Some(choice) = obj.get("choice") {
        let here = format!("{at}/choice");
        let c = object(choice, &here)?;
        only_keys(c, &["key", "alternatives"], &here)?;
        let key = c
            .get("key")
            .and_then(Json::as_str)
            .ok_or_else(|| Error::parse(&here, "expected a string `key`"))?
            .to_string();
        let mut alternatives = Vec::new();
        for (i, a) in array(c.get("alternatives"), &format!("{here}/alternatives"))?.iter().enumerate() {
            let at_alt = format!("{here}/alternatives/{i}");
            let a = object(a, &at_alt)?;
            only_keys(a, &["label", "space"], &at_alt)?;
            let label = a
                .get("label")
                .and_then(Value::from_json)
                .ok_or_else(|| Error::parse(&at_alt, "expected a scalar `label`"))?;
            let space = nested_from_json(
                a.get("space").ok_or_else(|| Error::parse(&at_alt, "missing `space`"))?,
                &format!("{at_alt}/space"),
            )?;
            alternatives.push(NestedAlternative { label, space });
        }
        return Ok(NestedSpace::Choice { key, alternatives });
    }
    Err(Error::parse(at, "expected one of `steps`, `anyOf`, `choice`"))
}

pub fn space_from_json(json: &Json) -> Result<CompiledSpace> {
    let obj = object(json, "/")?;
    let backend = obj
        .get("backend")
        .and_then(Json::as_str)
        .ok_or_else(|| Error::parse("/backend", "expected `flat`, `grid` or `nested`"))?;
    match backend {
        "flat" => {
            only_keys(obj, &["backend", "disjuncts"], "/")?;
            Ok(CompiledSpace::Flat(FlatSpace {
                disjuncts: grids_from_json(obj.get("disjuncts"), "/disjuncts")?,
            }))
        }
        "grid" => {
            only_keys(obj, &["backend", "cuts", "seed", "disjuncts", "sampled_from"], "/")?;
            let disjuncts = grids_from_json(obj.get("disjuncts"), "/disjuncts")?;
            if let Some((i, k)) = disjuncts
                .iter()
                .enumerate()
                .find_map(|(i, g)| g.iter().find(|(_, d)| !d.is_categorical()).map(|(k, _)| (i, k)))
            {
                return Err(Error::parse(format!("/disjuncts/{i}/{k}"), "grid spaces hold only enums"));
            }
            let mut sources = Vec::new();
            for (i, m) in array(obj.get("sampled_from"), "/sampled_from")?.iter().enumerate() {
                let at = format!("/sampled_from/{i}");
                let mut from = BTreeMap::new();
                for (k, v) in object(m, &at)? {
                    match dimension_from_json(v, &format!("{at}/{k}"))? {
                        Dimension::Continuous(r) => from.insert(k.clone(), r),
                        Dimension::Categorical(_) => {
                            return Err(Error::parse(format!("{at}/{k}"), "expected a range"))
                        }
                    };
                }
                sources.push(from);
            }
            if sources.len() != disjuncts.len() {
                return Err(Error::parse("/sampled_from", "needs one entry per disjunct"));
            }
            let number = |k: &str| {
                obj.get(k)
                    .and_then(Json::as_u64)
                    .ok_or_else(|| Error::parse(format!("/{k}"), "expected a nonnegative integer"))
            };
            Ok(CompiledSpace::Grid(GridSpace {
                disjuncts,
                sources,
                cuts: number("cuts")? as usize,
                seed: number("seed")?,
            }))
        }
        "nested" => {
            only_keys(obj, &["backend", "space"], "/")?;
            let space = obj.get("space").ok_or_else(|| Error::parse("/", "missing `space`"))?;
            Ok(CompiledSpace::Nested(nested_from_json(space, "/space")?))
        }
        other => Err(Error::parse("/backend", format!("unknown backend `{other}`"))),
    }
}
