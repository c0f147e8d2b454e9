//! Mapping points of a compiled space back to configured pipelines, and
//! configured pipelines to points.

use std::collections::BTreeSet;

use crate::backends::{mangle, CompiledSpace, Plan, SearchPoint};
use crate::error::{Error, Result};
use crate::operators::Registry;
use crate::pipeline::{par, seq, PipelineExpr, Step};
use crate::value::{Config, Value};

/// Resolves every choice of `planned` by its discriminant in `point` and
/// binds every step to its unmangled hyperparameters.
///
/// The result is checked against the registry's schemas. A point that is
/// in `space` but fails that check means the compiler produced an
/// unsound space and is reported as [`Error::SchemaViolation`].
pub fn decode_point(
    planned: &PipelineExpr,
    space: &CompiledSpace,
    point: &SearchPoint,
    reg: &Registry,
) -> Result<PipelineExpr> {
    planned.check(reg)?;
    let plan = Plan::build(planned)?;
    let mut used = BTreeSet::new();
    let mut configs = Vec::new();
    let decoded = decode(&plan, point, reg, &mut used, &mut configs)?;
    if let Some(extra) = point.keys().find(|k| !used.contains(k.as_str())) {
        return Err(Error::UnexpectedKey(extra.clone()));
    }
    if !space.contains(point) {
        return Err(Error::NotInSpace(format!("point {} is in no disjunct", render(point))));
    }
    for (op, config) in &configs {
        reg.lookup(op)?.validate(config)?;
    }
    Ok(decoded)
}

fn decode<'p>(
    plan: &Plan<'p>,
    point: &SearchPoint,
    reg: &Registry,
    used: &mut BTreeSet<String>,
    configs: &mut Vec<(String, Config)>,
) -> Result<PipelineExpr> {
    match plan {
        Plan::Step { step, display } => {
            let spec = reg.lookup(&step.op)?;
            let mut config = Config::new();
            for hp in spec.leading_record().keys() {
                let key = mangle(display, hp);
                let v = point
                    .get(&key)
                    .ok_or_else(|| Error::MissingHyperparameter(key.clone()))?;
                config.insert(hp.clone(), v.clone());
                used.insert(key);
            }
            configs.push((step.op.clone(), config.clone()));
            let name = match &step.name {
                Some(n) => Some(n.clone()),
                None if display != &step.op => Some(display.clone()),
                None => None,
            };
            Ok(PipelineExpr::Step(Step {
                op: step.op.clone(),
                name,
                bindings: Some(config),
                learned: None,
            }))
        }
        Plan::Chain { expr, operands } => {
            let parts = operands
                .iter()
                .map(|o| decode(o, point, reg, used, configs))
                .collect::<Result<Vec<_>>>()?;
            let mut parts = parts.into_iter();
            Ok(rebuild(expr, &mut parts))
        }
        Plan::Choice { key, alternatives } => {
            let value = point.get(key).ok_or_else(|| Error::UnknownDiscriminant {
                key: key.clone(),
                value: None,
            })?;
            let (_, alt) = alternatives
                .iter()
                .find(|(label, _)| label == value)
                .ok_or_else(|| Error::UnknownDiscriminant {
                    key: key.clone(),
                    value: Some(value.clone()),
                })?;
            used.insert(key.clone());
            decode(alt, point, reg, used, configs)
        }
    }
}

/// Rebuilds the sequence/parallel skeleton of `expr` around new operands.
fn rebuild(expr: &PipelineExpr, operands: &mut impl Iterator<Item = PipelineExpr>) -> PipelineExpr {
    match expr {
        PipelineExpr::Seq(a, b) => {
            let a = rebuild(a, operands);
            seq(a, rebuild(b, operands))
        }
        PipelineExpr::Par(a, b) => {
            let a = rebuild(a, operands);
            par(a, rebuild(b, operands))
        }
        _ => operands.next().expect("one decoded operand per chain operand"),
    }
}

/// The point of `space` that decodes to `configured`. `planned` is the
/// pipeline the space was compiled from; `configured` must be one of its
/// choice-free instances with every step bound.
pub fn encode_config(
    planned: &PipelineExpr,
    configured: &PipelineExpr,
    space: &CompiledSpace,
) -> Result<SearchPoint> {
    let plan = Plan::build(planned)?;
    let mut point = SearchPoint::new();
    encode(&plan, configured, &mut point)?;
    if !space.contains(&point) {
        return Err(Error::NotInSpace(format!("point {} is in no disjunct", render(&point))));
    }
    Ok(point)
}

fn mismatch(expected: &str, found: &PipelineExpr) -> Error {
    Error::NotInSpace(format!("expected {expected}, found `{found}`"))
}

fn encode(plan: &Plan<'_>, configured: &PipelineExpr, point: &mut SearchPoint) -> Result<()> {
    match plan {
        Plan::Step { step, display } => {
            let PipelineExpr::Step(c) = configured else {
                return Err(mismatch(&format!("step `{display}`"), configured));
            };
            let name_ok = match &c.name {
                None => step.name.is_none() && display == &step.op,
                Some(n) => Some(n) == step.name.as_ref() || n == display,
            };
            if c.op != step.op || !name_ok {
                return Err(mismatch(&format!("step `{display}`"), configured));
            }
            let bindings = c
                .bindings
                .as_ref()
                .ok_or_else(|| Error::Config(format!("step `{display}` is not configured")))?;
            for (k, v) in bindings {
                point.insert(mangle(display, k), v.clone());
            }
            Ok(())
        }
        Plan::Chain { expr, operands } => {
            let mut pairs = Vec::with_capacity(operands.len());
            pair_chain(expr, configured, &mut pairs)?;
            for (o, c) in operands.iter().zip(pairs) {
                encode(o, c, point)?;
            }
            Ok(())
        }
        Plan::Choice { key, alternatives } => {
            for (label, alt) in alternatives {
                let mut attempt = point.clone();
                if encode(alt, configured, &mut attempt).is_ok() {
                    *point = attempt;
                    point.insert(key.clone(), label.clone());
                    return Ok(());
                }
            }
            Err(Error::NotInSpace(format!(
                "`{configured}` matches no alternative of choice `{key}`"
            )))
        }
    }
}

/// Pairs each chain operand of `planned` with the configured subtree in
/// the same position.
fn pair_chain<'c>(
    planned: &PipelineExpr,
    configured: &'c PipelineExpr,
    out: &mut Vec<&'c PipelineExpr>,
) -> Result<()> {
    match (planned, configured) {
        (PipelineExpr::Seq(a, b), PipelineExpr::Seq(c, d))
        | (PipelineExpr::Par(a, b), PipelineExpr::Par(c, d)) => {
            pair_chain(a, c, out)?;
            pair_chain(b, d, out)
        }
        (PipelineExpr::Seq(..), _) => Err(mismatch("a sequence", configured)),
        (PipelineExpr::Par(..), _) => Err(mismatch("a parallel composition", configured)),
        _ => {
            out.push(configured);
            Ok(())
        }
    }
}

fn render(point: &SearchPoint) -> String {
    let parts: Vec<String> = point.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("{{{}}}", parts.join(", "))
}

/// Reads a point file: a flat JSON object of scalars.
pub fn point_from_json(json: &serde_json::Value) -> Result<SearchPoint> {
    let obj = json
        .as_object()
        .ok_or_else(|| Error::parse("/", "expected an object"))?;
    obj.iter()
        .map(|(k, v)| {
            Value::from_json(v)
                .map(|v| (k.clone(), v))
                .ok_or_else(|| Error::parse(format!("/{k}"), "expected a number, string or boolean"))
        })
        .collect()
}

pub fn point_to_json(point: &SearchPoint) -> serde_json::Value {
    serde_json::Value::Object(point.iter().map(|(k, v)| (k.clone(), v.to_json())).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backends::{compile_flat, compile_nested};
    use crate::pipeline::{choice, op, LifecycleState};

    fn point(pairs: &[(&str, Value)]) -> SearchPoint {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn running() -> PipelineExpr {
        op("PCA") >> (op("J48") | op("LR"))
    }

    fn flat(p: &PipelineExpr, reg: &Registry) -> CompiledSpace {
        CompiledSpace::Flat(compile_flat(p, reg).unwrap())
    }

    #[test]
    fn decodes_the_lr_branch() {
        let reg = Registry::paper();
        let space = flat(&running(), &reg);
        let pt = point(&[
            ("PCA__N", "mle".into()),
            ("1__D", "LR".into()),
            ("LR__S", "sag".into()),
            ("LR__P", "l2".into()),
        ]);
        let p = decode_point(&running(), &space, &pt, &reg).unwrap();
        let bind = |pairs: &[(&str, Value)]| -> Config { point(pairs) };
        let expected = seq(
            PipelineExpr::Step(Step {
                bindings: Some(bind(&[("N", "mle".into())])),
                ..Step::new("PCA")
            }),
            PipelineExpr::Step(Step {
                bindings: Some(bind(&[("S", "sag".into()), ("P", "l2".into())])),
                ..Step::new("LR")
            }),
        );
        assert_eq!(p, expected);
        assert_eq!(p.state(), LifecycleState::Trainable);
        assert_eq!(encode_config(&running(), &p, &space).unwrap(), pt);
    }

    #[test]
    fn decodes_the_j48_special_case() {
        let reg = Registry::paper();
        let space = CompiledSpace::Nested(compile_nested(&running(), &reg).unwrap());
        let pt = point(&[
            ("PCA__N", 0.5.into()),
            ("1__D", "J48".into()),
            ("J48__R", true.into()),
            ("J48__C", 0.25.into()),
        ]);
        let p = decode_point(&running(), &space, &pt, &reg).unwrap();
        assert!(!p.contains_choice());
        assert_eq!(encode_config(&running(), &p, &space).unwrap(), pt);
    }

    #[test]
    fn decode_errors() {
        let reg = Registry::paper();
        let space = flat(&running(), &reg);
        let base = [("PCA__N", Value::from("mle")), ("LR__S", "sag".into()), ("LR__P", "l2".into())];
        let mut pt = point(&base);
        assert!(matches!(
            decode_point(&running(), &space, &pt, &reg),
            Err(Error::UnknownDiscriminant { value: None, .. })
        ));
        pt.insert("1__D".into(), "SVM".into());
        assert!(matches!(
            decode_point(&running(), &space, &pt, &reg),
            Err(Error::UnknownDiscriminant { value: Some(_), .. })
        ));
        pt.insert("1__D".into(), "LR".into());
        pt.remove("LR__P");
        assert!(matches!(
            decode_point(&running(), &space, &pt, &reg),
            Err(Error::MissingHyperparameter(k)) if k == "LR__P"
        ));
        pt.insert("LR__P".into(), "l2".into());
        pt.insert("J48__R".into(), true.into());
        assert!(matches!(
            decode_point(&running(), &space, &pt, &reg),
            Err(Error::UnexpectedKey(k)) if k == "J48__R"
        ));
        pt.remove("J48__R");
        pt.insert("LR__P".into(), "l1".into());
        assert!(matches!(
            decode_point(&running(), &space, &pt, &reg),
            Err(Error::NotInSpace(_))
        ));
    }

    #[test]
    fn unsound_space_is_reported_as_a_schema_violation() {
        let reg = Registry::paper();
        // a space compiled without the side constraints admits sag + l1
        let loose = flat(&running(), &reg.without_constraints());
        let pt = point(&[
            ("PCA__N", "mle".into()),
            ("1__D", "LR".into()),
            ("LR__S", "sag".into()),
            ("LR__P", "l1".into()),
        ]);
        assert!(matches!(
            decode_point(&running(), &loose, &pt, &reg),
            Err(Error::SchemaViolation { .. })
        ));
        assert!(decode_point(&running(), &loose, &pt, &reg.without_constraints()).is_ok());
    }

    #[test]
    fn encode_rejects_configurations_outside_the_space() {
        let reg = Registry::paper();
        let space = flat(&running(), &reg);
        let j48 = PipelineExpr::Step(Step {
            bindings: Some(point(&[("R", true.into()), ("C", 0.5.into())])),
            ..Step::new("J48")
        });
        let pca = op("PCA").configure_all(&reg).unwrap();
        assert!(matches!(
            encode_config(&running(), &seq(pca.clone(), j48), &space),
            Err(Error::NotInSpace(_))
        ));
        let lr = op("LR").configure_all(&reg).unwrap();
        assert!(encode_config(&running(), &seq(pca.clone(), lr), &space).is_ok());
        assert!(encode_config(&running(), &par(pca.clone(), pca), &space).is_err());
    }

    #[test]
    fn duplicate_operators_decode_to_named_steps() {
        let reg = Registry::paper();
        let p = op("LR") >> choice(vec![op("LR"), op("J48")]).unwrap();
        let space = flat(&p, &reg);
        let pt = point(&[
            ("LR_1__S", "linear".into()),
            ("LR_1__P", "l1".into()),
            ("1__D", "LR_2".into()),
            ("LR_2__S", "lbfgs".into()),
            ("LR_2__P", "l2".into()),
        ]);
        let decoded = decode_point(&p, &space, &pt, &reg).unwrap();
        let names: Vec<_> = decoded.steps().iter().map(|s| s.display_name().to_string()).collect();
        assert_eq!(names, vec!["LR_1", "LR_2"]);
        assert_eq!(encode_config(&p, &decoded, &space).unwrap(), pt);
    }

    #[test]
    fn composite_alternatives_roundtrip() {
        let reg = Registry::paper();
        let p = op("PCA") >> choice(vec![op("J48"), op("PCA") >> op("LR")]).unwrap();
        let space = flat(&p, &reg);
        let pt = point(&[
            ("PCA_1__N", "mle".into()),
            ("1__D", "1_1".into()),
            ("PCA_2__N", 0.3.into()),
            ("LR__S", "linear".into()),
            ("LR__P", "l1".into()),
        ]);
        let decoded = decode_point(&p, &space, &pt, &reg).unwrap();
        assert_eq!(decoded.to_string(), "PCA_1(N=mle) >> (PCA_2(N=0.3) >> LR(P=l1, S=linear))");
        assert_eq!(encode_config(&p, &decoded, &space).unwrap(), pt);
    }

    #[test]
    fn point_files_roundtrip() {
        let pt = point(&[("A__x", 1i64.into()), ("D", "A".into()), ("A__y", 0.5.into())]);
        assert_eq!(point_from_json(&point_to_json(&pt)).unwrap(), pt);
        assert!(point_from_json(&serde_json::json!({"a": [1]})).is_err());
    }
}
