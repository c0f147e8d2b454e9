//! Names and paths shared by the compilers and the decoder.
//!
//! A hyperparameter `hp` of a step displayed as `Op` is mangled to
//! `Op__hp`. Display names default to the operator name; when several
//! steps share one, they become `Op_1`, `Op_2`, ... in left-to-right
//! order. Every operand of a maximal sequence/parallel run gets a path:
//! its index under the root, or `parent_index` deeper down. A choice at
//! path `p` is recorded in the discriminant `p__D` (plain `D` for a choice
//! at the root); its value is the chosen alternative's display name, or
//! the alternative's path when it is not a single step.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::pipeline::{PipelineExpr, Step};
use crate::value::Value;

pub const SEPARATOR: &str = "__";

pub fn mangle(display: &str, hp: &str) -> String {
    format!("{display}{SEPARATOR}{hp}")
}

/// Splits a mangled name at the first separator. Display names never
/// contain the separator, so this is exact.
pub fn unmangle(key: &str) -> Option<(&str, &str)> {
    key.split_once(SEPARATOR)
}

pub fn child_path(parent: &str, index: usize) -> String {
    if parent.is_empty() {
        index.to_string()
    } else {
        format!("{parent}_{index}")
    }
}

pub fn discriminant_key(path: &str) -> String {
    if path.is_empty() {
        "D".to_string()
    } else {
        format!("{path}{SEPARATOR}D")
    }
}

/// Display names of all steps in left-to-right order, made unique.
pub fn display_names(p: &PipelineExpr) -> Result<Vec<String>> {
    let steps = p.steps();
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &steps {
        *totals.entry(s.display_name()).or_default() += 1;
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let names: Vec<String> = steps
        .iter()
        .map(|s| {
            let base = s.display_name();
            if totals[base] > 1 {
                let n = seen.entry(base).or_default();
                *n += 1;
                format!("{base}_{n}")
            } else {
                base.to_string()
            }
        })
        .collect();
    let mut unique = std::collections::BTreeSet::new();
    for n in &names {
        if !unique.insert(n.as_str()) {
            return Err(Error::NameCollision(n.clone()));
        }
    }
    Ok(names)
}

/// A pipeline annotated with names, paths and discriminants.
#[derive(Debug, Clone)]
pub(crate) enum Plan<'a> {
    Step {
        step: &'a Step,
        display: String,
    },
    /// Operands of a maximal sequence/parallel run; `expr` is the run's
    /// root so the tree can be rebuilt.
    Chain {
        expr: &'a PipelineExpr,
        operands: Vec<Plan<'a>>,
    },
    Choice {
        key: String,
        alternatives: Vec<(Value, Plan<'a>)>,
    },
}

impl<'a> Plan<'a> {
    pub(crate) fn build(p: &'a PipelineExpr) -> Result<Plan<'a>> {
        let names = display_names(p)?;
        let mut next = 0;
        Ok(build(p, "", &names, &mut next))
    }
}

fn build<'a>(p: &'a PipelineExpr, path: &str, names: &[String], next: &mut usize) -> Plan<'a> {
    match p {
        PipelineExpr::Step(step) => {
            let display = names[*next].clone();
            *next += 1;
            Plan::Step { step, display }
        }
        PipelineExpr::Seq(..) | PipelineExpr::Par(..) => Plan::Chain {
            expr: p,
            operands: p
                .chain()
                .into_iter()
                .enumerate()
                .map(|(i, c)| build(c, &child_path(path, i), names, next))
                .collect(),
        },
        PipelineExpr::Choice(alts) => Plan::Choice {
            key: discriminant_key(path),
            alternatives: alts
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let sub = child_path(path, i);
                    let plan = build(a, &sub, names, next);
                    let label = match &plan {
                        Plan::Step { display, .. } => Value::Str(display.clone()),
                        _ => Value::Str(sub),
                    };
                    (label, plan)
                })
                .collect(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{choice, op};

    #[test]
    fn duplicate_names_get_suffixes() {
        let p = op("KNN") >> (op("KNN") | op("Stump"));
        assert_eq!(display_names(&p).unwrap(), vec!["KNN_1", "KNN_2", "Stump"]);
    }

    #[test]
    fn suffixes_may_collide_with_explicit_names() {
        let p = op("KNN") >> (op("KNN") | op("Stump").named("KNN_1"));
        assert!(matches!(display_names(&p), Err(Error::NameCollision(_))));
    }

    #[test]
    fn discriminant_keys_follow_paths() {
        let p = op("PCA") >> (op("J48") | op("LR"));
        let Plan::Chain { operands, .. } = Plan::build(&p).unwrap() else { panic!() };
        let Plan::Choice { key, alternatives } = &operands[1] else { panic!() };
        assert_eq!(key, "1__D");
        assert_eq!(alternatives[0].0, Value::from("J48"));

        let nested = choice(vec![op("A"), choice(vec![op("B"), op("C")]).unwrap()]).unwrap();
        let Plan::Choice { key, alternatives } = Plan::build(&nested).unwrap() else { panic!() };
        assert_eq!(key, "D");
        assert_eq!(alternatives[1].0, Value::from("1"));
        let Plan::Choice { key, .. } = &alternatives[1].1 else { panic!() };
        assert_eq!(key, "1__D");
    }

    #[test]
    fn mangling_roundtrips() {
        assert_eq!(unmangle(&mangle("LR", "S")), Some(("LR", "S")));
        assert_eq!(unmangle("1_0__D"), Some(("1_0", "D")));
    }
}
