//! Pipeline files: a JSON tree whose nodes are
//! `{"step": op, "name"?: id, "bindings"?: {...}}`, `{"seq": [..]}`,
//! `{"par": [..]}` and `{"choice": [..]}`. Sequence and parallel lists of
//! more than two entries nest to the left. Learned models are not stored.

use serde_json::{Map, Value as Json};

use crate::error::{Error, Result};
use crate::value::{Config, Value};

use super::{choice, par, seq, PipelineExpr, Step};

pub fn parse_pipeline(text: &str) -> Result<PipelineExpr> {
    let json: Json = serde_json::from_str(text).map_err(Error::from_json)?;
    pipeline_from_json(&json)
}

pub fn pipeline_from_json(json: &Json) -> Result<PipelineExpr> {
    node(json, "")
}

fn node(json: &Json, at: &str) -> Result<PipelineExpr> {
    let Json::Object(obj) = json else {
        return Err(Error::parse(at_or_root(at), "expected an object"));
    };
    let tag = ["step", "seq", "par", "choice"]
        .into_iter()
        .find(|t| obj.contains_key(*t))
        .ok_or_else(|| Error::parse(at_or_root(at), "expected one of `step`, `seq`, `par`, `choice`"))?;
    let allowed: &[&str] = if tag == "step" {
        &["step", "name", "bindings"]
    } else {
        &[tag]
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::parse(at_or_root(at), format!("unexpected key `{k}` in a `{tag}` node")));
    }
    match tag {
        "step" => step(obj, at),
        _ => {
            let here = format!("{at}/{tag}");
            let Some(Json::Array(items)) = obj.get(tag) else {
                return Err(Error::parse(here, "expected an array"));
            };
            let parts = items
                .iter()
                .enumerate()
                .map(|(i, item)| node(item, &format!("{here}/{i}")))
                .collect::<Result<Vec<_>>>()?;
            if parts.len() < 2 {
                return Err(Error::parse(here, format!("needs at least 2 entries, got {}", parts.len())));
            }
            if tag == "choice" {
                return choice(parts);
            }
            let combine = if tag == "seq" { seq } else { par };
            let mut it = parts.into_iter();
            let first = it.next().expect("at least two parts");
            Ok(it.fold(first, combine))
        }
    }
}

fn at_or_root(at: &str) -> String {
    if at.is_empty() {
        "/".into()
    } else {
        at.into()
    }
}

fn step(obj: &Map<String, Json>, at: &str) -> Result<PipelineExpr> {
    let Some(Json::String(op)) = obj.get("step") else {
        return Err(Error::parse(format!("{at}/step"), "expected an operator name"));
    };
    let name = match obj.get("name") {
        None => None,
        Some(Json::String(n)) => Some(n.clone()),
        Some(_) => return Err(Error::parse(format!("{at}/name"), "expected a string")),
    };
    let bindings = match obj.get("bindings") {
        None => None,
        Some(Json::Object(b)) => {
            let mut config = Config::new();
            for (k, v) in b {
                let value = Value::from_json(v).ok_or_else(|| {
                    Error::parse(format!("{at}/bindings/{k}"), "expected a number, string or boolean")
                })?;
                config.insert(k.clone(), value);
            }
            Some(config)
        }
        Some(_) => return Err(Error::parse(format!("{at}/bindings"), "expected an object")),
    };
    Ok(PipelineExpr::Step(Step {
        op: op.clone(),
        name,
        bindings,
        learned: None,
    }))
}

pub fn pipeline_to_json(p: &PipelineExpr) -> Json {
    let mut obj = Map::new();
    match p {
        PipelineExpr::Step(s) => {
            obj.insert("step".into(), Json::String(s.op.clone()));
            if let Some(n) = &s.name {
                obj.insert("name".into(), Json::String(n.clone()));
            }
            if let Some(b) = &s.bindings {
                obj.insert(
                    "bindings".into(),
                    Json::Object(b.iter().map(|(k, v)| (k.clone(), v.to_json())).collect()),
                );
            }
        }
        PipelineExpr::Seq(..) | PipelineExpr::Par(..) => {
            let tag = if matches!(p, PipelineExpr::Seq(..)) { "seq" } else { "par" };
            let mut items = Vec::new();
            left_spine(p, &mut items);
            obj.insert(tag.into(), Json::Array(items.into_iter().map(pipeline_to_json).collect()));
        }
        PipelineExpr::Choice(alts) => {
            obj.insert("choice".into(), Json::Array(alts.iter().map(pipeline_to_json).collect()));
        }
    }
    Json::Object(obj)
}

/// Operands of a left-nested run of the same combinator, which is how
/// lists in the file are read back.
fn left_spine<'a>(p: &'a PipelineExpr, out: &mut Vec<&'a PipelineExpr>) {
    match p {
        PipelineExpr::Seq(a, b) => {
            if matches!(**a, PipelineExpr::Seq(..)) {
                left_spine(a, out);
            } else {
                out.push(a);
            }
            out.push(b);
        }
        PipelineExpr::Par(a, b) => {
            if matches!(**a, PipelineExpr::Par(..)) {
                left_spine(a, out);
            } else {
                out.push(a);
            }
            out.push(b);
        }
        other => out.push(other),
    }
}

pub fn serialize_pipeline(p: &PipelineExpr) -> String {
    serde_json::to_string_pretty(&pipeline_to_json(p)).expect("JSON values serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::op;

    #[test]
    fn running_example_file() {
        let text = r#"{"seq": [{"step": "PCA"}, {"choice": [{"step": "J48"}, {"step": "LR"}]}]}"#;
        let p = parse_pipeline(text).unwrap();
        assert_eq!(p, op("PCA") >> (op("J48") | op("LR")));
    }

    #[test]
    fn long_lists_nest_left_and_roundtrip() {
        let p = parse_pipeline(r#"{"seq": [{"step":"A"}, {"step":"B"}, {"step":"C"}]}"#).unwrap();
        assert_eq!(p, (op("A") >> op("B")) >> op("C"));
        let q = op("A") >> (op("B") >> op("C"));
        for x in [p, q] {
            assert_eq!(parse_pipeline(&serialize_pipeline(&x)).unwrap(), x);
        }
    }

    #[test]
    fn steps_keep_names_and_bindings() {
        let text = r#"{"step": "LR", "name": "lr0", "bindings": {"S": "sag", "P": "l2"}}"#;
        let p = parse_pipeline(text).unwrap();
        let PipelineExpr::Step(s) = &p else { panic!() };
        assert_eq!(s.name.as_deref(), Some("lr0"));
        assert_eq!(s.bindings.as_ref().unwrap()["S"], Value::from("sag"));
        assert_eq!(parse_pipeline(&serialize_pipeline(&p)).unwrap(), p);
    }

    #[test]
    fn malformed_files_are_rejected() {
        for bad in [
            r#"[]"#,
            r#"{"step": 3}"#,
            r#"{"seq": [{"step": "A"}]}"#,
            r#"{"choice": [{"step": "A"}]}"#,
            r#"{"step": "A", "extra": 1}"#,
            r#"{"seq": [{"step": "A"}, {"step": "B"}], "par": []}"#,
            r#"{"step": "A", "bindings": {"x": [1]}}"#,
        ] {
            assert!(matches!(parse_pipeline(bad), Err(Error::Parse { .. })), "{bad}");
        }
    }
}
