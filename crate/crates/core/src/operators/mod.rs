//! Operator registry: names bound to hyperparameter schemas, defaults and
//! (optionally) a built-in implementation.

pub mod builtins;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{schema_from_json, schema_to_json, validate_config, Schema};
use crate::value::Config;

pub use builtins::{fit_builtin, BuiltinImpl, FitInput, TrainedModel};

const PAPER_OPS: &str = include_str!("../../data/paper_ops.json");
const BUILTIN_OPS: &str = include_str!("../../data/builtin_ops.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Transformer,
    Estimator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    /// A record, or `allOf` whose first child is a record and whose other
    /// children are side constraints.
    pub hyperparams: Schema,
    pub defaults: Config,
    pub kind: OperatorKind,
    pub implementation: Option<BuiltinImpl>,
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !name.contains("__")
}

impl OperatorSpec {
    pub fn new(
        name: impl Into<String>,
        hyperparams: Schema,
        defaults: Config,
        kind: OperatorKind,
        implementation: Option<BuiltinImpl>,
    ) -> Result<Self> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(Error::InvalidName(name));
        }
        let spec = OperatorSpec {
            name,
            hyperparams,
            defaults,
            kind,
            implementation,
        };
        spec.check_shape()?;
        validate_config(&spec.hyperparams, &spec.defaults).map_err(|violation| {
            Error::InvalidDefaults {
                op: spec.name.clone(),
                violation,
            }
        })?;
        Ok(spec)
    }

    fn check_shape(&self) -> Result<()> {
        let bad = |message: &str| Error::InvalidShape {
            op: self.name.clone(),
            message: message.to_string(),
        };
        match &self.hyperparams {
            Schema::Record(_) => Ok(()),
            Schema::AllOf(cs) if matches!(cs.first(), Some(Schema::Record(_))) => Ok(()),
            Schema::AllOf(_) => Err(bad("the first child of `allOf` must be a record")),
            _ => Err(bad("expected a record or an `allOf` led by a record")),
        }
    }

    /// The record listing every hyperparameter with its full range.
    pub fn leading_record(&self) -> &BTreeMap<String, Schema> {
        match &self.hyperparams {
            Schema::Record(props) => props,
            Schema::AllOf(cs) => match cs.first() {
                Some(Schema::Record(props)) => props,
                _ => unreachable!("shape checked at construction"),
            },
            _ => unreachable!("shape checked at construction"),
        }
    }

    /// Side constraints: the `allOf` children after the leading record.
    pub fn constraints(&self) -> &[Schema] {
        match &self.hyperparams {
            Schema::AllOf(cs) => &cs[1..],
            _ => &[],
        }
    }

    /// The same operator with every side constraint dropped.
    pub fn without_constraints(&self) -> OperatorSpec {
        OperatorSpec {
            hyperparams: Schema::Record(self.leading_record().clone()),
            ..self.clone()
        }
    }

    pub fn validate(&self, config: &Config) -> Result<()> {
        validate_config(&self.hyperparams, config).map_err(|violation| Error::SchemaViolation {
            op: self.name.clone(),
            violation,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecEntry {
    hyperparams: serde_json::Value,
    #[serde(default)]
    defaults: Config,
    kind: OperatorKind,
    #[serde(default, rename = "impl", skip_serializing_if = "Option::is_none")]
    implementation: Option<BuiltinImpl>,
}

/// Operators by name. Immutable once loaded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    ops: BTreeMap<String, OperatorSpec>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, spec: OperatorSpec) -> Result<()> {
        if self.ops.contains_key(&spec.name) {
            return Err(Error::DuplicateOperator(spec.name));
        }
        self.ops.insert(spec.name.clone(), spec);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Result<&OperatorSpec> {
        self.ops
            .get(name)
            .ok_or_else(|| Error::UnknownOperator(name.to_string()))
    }

    pub fn get(&self, name: &str) -> Option<&OperatorSpec> {
        self.ops.get(name)
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.ops.keys().map(String::as_str)
    }

    pub fn specs(&self) -> impl Iterator<Item = &OperatorSpec> {
        self.ops.values()
    }

    /// Every operator with its side constraints dropped.
    pub fn without_constraints(&self) -> Registry {
        Registry {
            ops: self
                .ops
                .iter()
                .map(|(k, s)| (k.clone(), s.without_constraints()))
                .collect(),
        }
    }

    /// Adds every operator of `other`; names must not clash.
    pub fn extend(&mut self, other: Registry) -> Result<()> {
        for spec in other.ops.into_values() {
            self.register(spec)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Registry> {
        let entries: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(text).map_err(Error::from_json)?;
        let mut reg = Registry::new();
        for (name, entry) in entries {
            let entry: SpecEntry = serde_json::from_value(entry)
                .map_err(|e| Error::parse(format!("/{name}"), e.to_string()))?;
            let hyperparams = schema_from_json(&entry.hyperparams).map_err(|e| match e {
                Error::Parse { position, message } => Error::Parse {
                    position: format!("/{name}/hyperparams{}", position.trim_end_matches('/')),
                    message,
                },
                Error::UnsupportedFeature { position, feature } => Error::UnsupportedFeature {
                    position: format!("/{name}/hyperparams{}", position.trim_end_matches('/')),
                    feature,
                },
                other => other,
            })?;
            reg.register(OperatorSpec::new(
                name,
                hyperparams,
                entry.defaults,
                entry.kind,
                entry.implementation,
            )?)?;
        }
        Ok(reg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Registry> {
        let text = std::fs::read_to_string(path)?;
        Registry::parse(&text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .ops
            .iter()
            .map(|(name, s)| {
                let entry = SpecEntry {
                    hyperparams: schema_to_json(&s.hyperparams),
                    defaults: s.defaults.clone(),
                    kind: s.kind,
                    implementation: s.implementation,
                };
                (
                    name.clone(),
                    serde_json::to_value(entry).expect("registry entries serialize"),
                )
            })
            .collect();
        serde_json::Value::Object(map)
    }

    /// PCA, J48 and LR with the running-example schemas. Compile-only.
    pub fn paper() -> Registry {
        Registry::parse(PAPER_OPS).expect("bundled paper_ops.json is valid")
    }

    /// The desk-scale built-in operators.
    pub fn builtins() -> Registry {
        Registry::parse(BUILTIN_OPS).expect("bundled builtin_ops.json is valid")
    }

    /// Both bundled registries.
    pub fn bundled() -> Registry {
        let mut reg = Registry::paper();
        reg.extend(Registry::builtins())
            .expect("bundled registries have disjoint names");
        reg
    }
}
