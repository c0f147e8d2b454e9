use std::fmt;

use crate::value::{Config, Instance};

use super::Schema;

/// Why an instance is outside a schema: where it failed and which
/// construct rejected it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// JSON-pointer style location inside the schema, e.g. `/allOf/1/anyOf`.
    pub path: String,
    pub construct: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let path = if self.path.is_empty() { "/" } else { &self.path };
        write!(f, "{} at {path}: {}", self.construct, self.message)
    }
}

impl std::error::Error for Violation {}

pub type ValidationResult = Result<(), Violation>;

/// Set membership of `instance` in the set denoted by `schema`.
///
/// Records constrain only the keys they list, and every listed key must be
/// present. `Not` is complement with respect to all instances.
pub fn validate_instance(schema: &Schema, instance: &Instance) -> ValidationResult {
    check(schema, instance, &mut String::new())
}

/// Convenience wrapper for flat configurations.
pub fn validate_config(schema: &Schema, config: &Config) -> ValidationResult {
    validate_instance(schema, &Instance::record(config))
}

fn fail(path: &str, construct: &str, message: String) -> ValidationResult {
    Err(Violation {
        path: path.to_string(),
        construct: construct.to_string(),
        message,
    })
}

fn check(schema: &Schema, instance: &Instance, path: &mut String) -> ValidationResult {
    match schema {
        Schema::Top => Ok(()),
        Schema::Bottom => fail(path, "false", "nothing is accepted".into()),
        Schema::Enum(values) => match instance {
            Instance::Value(v) if values.contains(v) => Ok(()),
            _ => fail(path, "enum", format!("{instance} is not one of the allowed values")),
        },
        Schema::Range(r) => match instance {
            Instance::Value(v) if r.contains(v) => Ok(()),
            _ => fail(path, "range", format!("{instance} is outside {r}")),
        },
        Schema::Record(props) => {
            let Instance::Record(fields) = instance else {
                return fail(path, "object", format!("{instance} is not a record"));
            };
            for (key, sub) in props {
                let mark = path.len();
                path.push_str("/properties/");
                path.push_str(key);
                let res = match fields.get(key) {
                    Some(field) => check(sub, field, path),
                    None => fail(path, "object", format!("missing property `{key}`")),
                };
                path.truncate(mark);
                res?;
            }
            Ok(())
        }
        Schema::AnyOf(children) => {
            for (i, child) in children.iter().enumerate() {
                let mark = path.len();
                path.push_str(&format!("/anyOf/{i}"));
                let ok = check(child, instance, path).is_ok();
                path.truncate(mark);
                if ok {
                    return Ok(());
                }
            }
            fail(
                &format!("{path}/anyOf"),
                "anyOf",
                format!("{instance} matches none of the {} branches", children.len()),
            )
        }
        Schema::AllOf(children) => {
            for (i, child) in children.iter().enumerate() {
                let mark = path.len();
                path.push_str(&format!("/allOf/{i}"));
                let res = check(child, instance, path);
                path.truncate(mark);
                res?;
            }
            Ok(())
        }
        Schema::Not(child) => {
            let mark = path.len();
            path.push_str("/not");
            let inner = check(child, instance, path);
            path.truncate(mark);
            match inner {
                Ok(()) => fail(path, "not", format!("{instance} matches the negated schema")),
                Err(_) => Ok(()),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::Range;
    use crate::value::Value;

    fn rec(pairs: &[(&str, Value)]) -> Instance {
        Instance::Record(
            pairs
                .iter()
                .map(|(k, v)| (k.to_string(), Instance::Value(v.clone())))
                .collect(),
        )
    }

    #[test]
    fn enum_membership() {
        let s = Schema::enumeration(["mle"]);
        assert!(validate_instance(&s, &Value::from("mle").into()).is_ok());
        assert!(validate_instance(&s, &Value::from("x").into()).is_err());
    }

    #[test]
    fn range_exclusivity() {
        let s = Schema::range(Range::open(0.0, 1.0));
        assert!(validate_instance(&s, &Value::Real(0.5).into()).is_ok());
        assert!(validate_instance(&s, &Value::Real(0.0).into()).is_err());
        assert!(validate_instance(&s, &Value::Real(1.0).into()).is_err());
        assert!(validate_instance(&s, &Value::Str("0.5".into()).into()).is_err());
    }

    #[test]
    fn record_requires_listed_keys_only() {
        let s = Schema::record([("a", Schema::enumeration([true]))]);
        assert!(validate_instance(&s, &rec(&[("a", true.into()), ("b", 1i64.into())])).is_ok());
        let err = validate_instance(&s, &rec(&[("b", 1i64.into())])).unwrap_err();
        assert_eq!(err.path, "/properties/a");
        assert!(validate_instance(&s, &Value::Bool(true).into()).is_err());
    }

    #[test]
    fn not_is_complement() {
        let s = Schema::not(Schema::enumeration([true]));
        assert!(validate_instance(&s, &Value::Bool(false).into()).is_ok());
        assert!(validate_instance(&s, &Value::Int(3).into()).is_ok());
        let err = validate_instance(&s, &Value::Bool(true).into()).unwrap_err();
        assert_eq!(err.construct, "not");
    }

    #[test]
    fn anyof_failure_reports_branch_location() {
        let s = Schema::all_of(vec![
            Schema::Top,
            Schema::any_of(vec![Schema::enumeration([1i64]), Schema::enumeration([2i64])]),
        ]);
        let err = validate_instance(&s, &Value::Int(3).into()).unwrap_err();
        assert_eq!(err.path, "/allOf/1/anyOf");
        assert_eq!(err.construct, "anyOf");
    }
}
