//! The schema document format: a constrained JSON dialect.
//!
//! See `docs/formats.md` for the grammar. Parsing is strict: keys outside
//! the dialect are rejected, and well-known JSON Schema keywords the
//! dialect does not cover are reported as unsupported features.

use std::collections::BTreeMap;

use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};
use crate::value::Value;

use super::{Distribution, NumKind, Range, Schema};

const KNOWN_UNSUPPORTED: &[&str] = &[
    "$ref",
    "$schema",
    "$id",
    "$defs",
    "definitions",
    "additionalProperties",
    "patternProperties",
    "required",
    "items",
    "additionalItems",
    "minItems",
    "maxItems",
    "uniqueItems",
    "pattern",
    "format",
    "minLength",
    "maxLength",
    "const",
    "oneOf",
    "if",
    "then",
    "else",
    "multipleOf",
    "dependencies",
    "default",
    "description",
    "title",
    "examples",
];

const DIALECT_KEYS: &[&str] = &[
    "enum",
    "minimum",
    "maximum",
    "exclusiveMinimum",
    "exclusiveMaximum",
    "type",
    "properties",
    "anyOf",
    "allOf",
    "not",
    "distribution",
];

const NUMERIC_KEYS: &[&str] = &[
    "minimum",
    "maximum",
    "exclusiveMinimum",
    "exclusiveMaximum",
    "distribution",
];

/// Parses a schema document.
pub fn parse_schema(text: &str) -> Result<Schema> {
    let json: Json = serde_json::from_str(text).map_err(Error::from_json)?;
    schema_from_json(&json)
}

/// Converts an already-parsed JSON value. Error positions are JSON
/// pointers into that value.
pub fn schema_from_json(json: &Json) -> Result<Schema> {
    from_json(json, "")
}

fn pointer(path: &str) -> String {
    if path.is_empty() {
        "/".to_string()
    } else {
        path.to_string()
    }
}

fn from_json(json: &Json, path: &str) -> Result<Schema> {
    match json {
        Json::Bool(true) => Ok(Schema::Top),
        Json::Bool(false) => Ok(Schema::Bottom),
        Json::Object(obj) => from_object(obj, path),
        other => Err(Error::parse(
            pointer(path),
            format!("expected an object or boolean schema, found {other}"),
        )),
    }
}

fn from_object(obj: &Map<String, Json>, path: &str) -> Result<Schema> {
    for key in obj.keys() {
        if DIALECT_KEYS.contains(&key.as_str()) {
            continue;
        }
        let at = format!("{path}/{key}");
        if KNOWN_UNSUPPORTED.contains(&key.as_str()) {
            return Err(Error::unsupported(at, format!("keyword `{key}`")));
        }
        return Err(Error::parse(at, format!("unknown key `{key}`")));
    }

    for combinator in ["anyOf", "allOf", "not"] {
        if obj.contains_key(combinator) {
            if obj.len() != 1 {
                return Err(Error::parse(
                    pointer(path),
                    format!("`{combinator}` cannot be combined with other keys; wrap them in `allOf`"),
                ));
            }
            return parse_combinator(combinator, &obj[combinator], path);
        }
    }

    let ty = match obj.get("type") {
        None => None,
        Some(Json::String(t)) => Some(t.as_str()),
        Some(other) => {
            return Err(Error::parse(
                format!("{path}/type"),
                format!("`type` must be a string, found {other}"),
            ))
        }
    };
    let has_numeric = NUMERIC_KEYS.iter().any(|k| obj.contains_key(*k));
    let families = [obj.contains_key("enum"), has_numeric, obj.contains_key("properties")];
    if families.iter().filter(|f| **f).count() > 1 {
        return Err(Error::parse(
            pointer(path),
            "`enum`, numeric bounds and `properties` cannot be mixed in one object; use `allOf`",
        ));
    }

    if let Some(values) = obj.get("enum") {
        return parse_enum(values, ty, path);
    }
    if obj.contains_key("properties") {
        if !matches!(ty, None | Some("object")) {
            return Err(Error::parse(
                format!("{path}/type"),
                "`properties` requires type `object`",
            ));
        }
        return parse_properties(&obj["properties"], path);
    }
    match ty {
        None if has_numeric => Err(Error::parse(
            pointer(path),
            "numeric bounds require type `number` or `integer`",
        )),
        None => Ok(Schema::Top),
        Some("number") => parse_range(obj, NumKind::Real, path),
        Some("integer") => parse_range(obj, NumKind::Integer, path),
        Some(_) if has_numeric => Err(Error::parse(
            pointer(path),
            "numeric bounds require type `number` or `integer`",
        )),
        Some("boolean") => Ok(Schema::Enum(vec![Value::Bool(true), Value::Bool(false)])),
        Some("object") => Ok(Schema::Record(BTreeMap::new())),
        Some("string") => Err(Error::unsupported(
            format!("{path}/type"),
            "unrestricted strings (use `enum`)",
        )),
        Some(other) => Err(Error::unsupported(format!("{path}/type"), format!("type `{other}`"))),
    }
}

fn parse_combinator(key: &str, body: &Json, path: &str) -> Result<Schema> {
    let at = format!("{path}/{key}");
    if key == "not" {
        return Ok(Schema::not(from_json(body, &at)?));
    }
    let Json::Array(items) = body else {
        return Err(Error::parse(at, format!("`{key}` must be an array")));
    };
    if items.is_empty() {
        return Err(Error::parse(at, format!("`{key}` must not be empty")));
    }
    let children = items
        .iter()
        .enumerate()
        .map(|(i, c)| from_json(c, &format!("{at}/{i}")))
        .collect::<Result<Vec<_>>>()?;
    Ok(if key == "anyOf" {
        Schema::AnyOf(children)
    } else {
        Schema::AllOf(children)
    })
}

fn parse_enum(values: &Json, ty: Option<&str>, path: &str) -> Result<Schema> {
    let at = format!("{path}/enum");
    let Json::Array(items) = values else {
        return Err(Error::parse(at, "`enum` must be an array"));
    };
    let mut out = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let v = Value::from_json(item)
            .ok_or_else(|| Error::unsupported(format!("{at}/{i}"), format!("enum member {item}")))?;
        let fits = match ty {
            None => true,
            Some("number") => matches!(v, Value::Int(_) | Value::Real(_)),
            Some("integer") => matches!(v, Value::Int(_)),
            Some("string") => matches!(v, Value::Str(_)),
            Some("boolean") => matches!(v, Value::Bool(_)),
            Some(other) => {
                return Err(Error::parse(
                    format!("{path}/type"),
                    format!("type `{other}` cannot be combined with `enum`"),
                ))
            }
        };
        if !fits {
            return Err(Error::parse(
                format!("{at}/{i}"),
                format!("{item} does not have the declared type"),
            ));
        }
        out.push(v);
    }
    Ok(Schema::enumeration(out))
}

fn parse_properties(props: &Json, path: &str) -> Result<Schema> {
    let at = format!("{path}/properties");
    let Json::Object(map) = props else {
        return Err(Error::parse(at, "`properties` must be an object"));
    };
    let mut out = BTreeMap::new();
    for (name, sub) in map {
        out.insert(name.clone(), from_json(sub, &format!("{at}/{name}"))?);
    }
    Ok(Schema::Record(out))
}

fn number(obj: &Map<String, Json>, key: &str, path: &str) -> Result<Option<f64>> {
    match obj.get(key) {
        None => Ok(None),
        Some(Json::Number(n)) => Ok(n.as_f64()),
        Some(other) => Err(Error::parse(
            format!("{path}/{key}"),
            format!("expected a number, found {other}"),
        )),
    }
}

/// Resolves a bound and its exclusivity flag. The flag is either a boolean
/// qualifying the plain bound, or a number standing in for it.
fn bound(obj: &Map<String, Json>, plain: &str, excl: &str, path: &str) -> Result<(Option<f64>, bool)> {
    let value = number(obj, plain, path)?;
    match obj.get(excl) {
        None => Ok((value, false)),
        Some(Json::Bool(flag)) => {
            if value.is_none() && *flag {
                return Err(Error::parse(
                    format!("{path}/{excl}"),
                    format!("`{excl}: true` requires `{plain}`"),
                ));
            }
            Ok((value, *flag))
        }
        Some(Json::Number(n)) => {
            if value.is_some() {
                return Err(Error::parse(
                    format!("{path}/{excl}"),
                    format!("numeric `{excl}` cannot be combined with `{plain}`"),
                ));
            }
            Ok((n.as_f64(), true))
        }
        Some(other) => Err(Error::parse(
            format!("{path}/{excl}"),
            format!("expected a boolean or number, found {other}"),
        )),
    }
}

fn parse_range(obj: &Map<String, Json>, kind: NumKind, path: &str) -> Result<Schema> {
    let (lo, lo_exclusive) = bound(obj, "minimum", "exclusiveMinimum", path)?;
    let (hi, hi_exclusive) = bound(obj, "maximum", "exclusiveMaximum", path)?;
    let distribution = match obj.get("distribution") {
        None => Distribution::Uniform,
        Some(Json::String(d)) if d == "uniform" => Distribution::Uniform,
        Some(Json::String(d)) if d == "loguniform" => Distribution::LogUniform,
        Some(other) => {
            return Err(Error::parse(
                format!("{path}/distribution"),
                format!("expected \"uniform\" or \"loguniform\", found {other}"),
            ))
        }
    };
    let lo = lo.unwrap_or(f64::NEG_INFINITY);
    let hi = hi.unwrap_or(f64::INFINITY);
    if distribution == Distribution::LogUniform && !(lo > 0.0 && hi.is_finite()) {
        return Err(Error::parse(
            format!("{path}/distribution"),
            "loguniform requires a finite range with minimum > 0",
        ));
    }
    Ok(Schema::range(Range::new(
        lo,
        hi,
        lo_exclusive,
        hi_exclusive,
        kind,
        distribution,
    )))
}

fn bound_json(x: f64, kind: NumKind) -> Json {
    if kind == NumKind::Integer && x.fract() == 0.0 && x.abs() < 9.0e15 {
        Json::from(x as i64)
    } else {
        Json::from(x)
    }
}

/// Canonical JSON form of a schema. Object keys come out sorted because
/// `serde_json::Map` is ordered.
pub fn schema_to_json(schema: &Schema) -> Json {
    match schema {
        Schema::Top => Json::Bool(true),
        Schema::Bottom => Json::Bool(false),
        Schema::Enum(values) => {
            let mut obj = Map::new();
            obj.insert("enum".into(), Json::Array(values.iter().map(Value::to_json).collect()));
            Json::Object(obj)
        }
        Schema::Range(r) => {
            let mut obj = Map::new();
            let ty = match r.kind {
                NumKind::Real => "number",
                NumKind::Integer => "integer",
            };
            obj.insert("type".into(), Json::from(ty));
            if r.lo.is_finite() {
                obj.insert("minimum".into(), bound_json(r.lo, r.kind));
                if r.lo_exclusive {
                    obj.insert("exclusiveMinimum".into(), Json::Bool(true));
                }
            }
            if r.hi.is_finite() {
                obj.insert("maximum".into(), bound_json(r.hi, r.kind));
                if r.hi_exclusive {
                    obj.insert("exclusiveMaximum".into(), Json::Bool(true));
                }
            }
            if r.distribution != Distribution::Uniform {
                obj.insert("distribution".into(), Json::from(r.distribution.as_str()));
            }
            Json::Object(obj)
        }
        Schema::Record(props) => {
            let mut obj = Map::new();
            obj.insert("type".into(), Json::from("object"));
            obj.insert(
                "properties".into(),
                Json::Object(props.iter().map(|(k, s)| (k.clone(), schema_to_json(s))).collect()),
            );
            Json::Object(obj)
        }
        Schema::AnyOf(cs) => single("anyOf", Json::Array(cs.iter().map(schema_to_json).collect())),
        Schema::AllOf(cs) => single("allOf", Json::Array(cs.iter().map(schema_to_json).collect())),
        Schema::Not(c) => single("not", schema_to_json(c)),
    }
}

fn single(key: &str, body: Json) -> Json {
    let mut obj = Map::new();
    obj.insert(key.into(), body);
    Json::Object(obj)
}

/// Canonical compact text.
pub fn serialize_schema(schema: &Schema) -> String {
    schema_to_json(schema).to_string()
}
