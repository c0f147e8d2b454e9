//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use sscomp::normalize::{Dimension, Grid};
use sscomp::operators::{OperatorKind, OperatorSpec, Registry};
use sscomp::pipeline::{choice, op, par, seq, PipelineExpr};
use sscomp::schema::{Distribution, NumKind, Range, Schema};
use sscomp::value::{Config, Value};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A grid with categorical values sorted, for order-insensitive comparison.
pub fn canonical(g: &Grid) -> Vec<(String, String)> {
    g.iter()
        .map(|(k, d)| {
            let text = match d {
                Dimension::Categorical(vs) => {
                    let mut vs = vs.clone();
                    vs.sort();
                    format!("{vs:?}")
                }
                Dimension::Continuous(r) => format!("{r:?}"),
            };
            (k.clone(), text)
        })
        .collect()
}

/// Disjunct lists as multisets.
pub fn same_disjuncts(a: &[Grid], b: &[Grid]) -> bool {
    let mut ca: Vec<_> = a.iter().map(canonical).collect();
    let mut cb: Vec<_> = b.iter().map(canonical).collect();
    ca.sort();
    cb.sort();
    ca == cb
}

pub fn cat<V: Into<Value> + Clone>(vs: &[V]) -> Dimension {
    Dimension::Categorical(vs.iter().cloned().map(Into::into).collect())
}

pub fn open(lo: f64, hi: f64) -> Dimension {
    Dimension::Continuous(Range::open(lo, hi).unwrap())
}

pub fn grid(entries: Vec<(&str, Dimension)>) -> Grid {
    entries.into_iter().map(|(k, d)| (k.to_string(), d)).collect()
}

const KEYS: [&str; 3] = ["a", "b", "c"];

fn random_range<R: Rng>(rng: &mut R) -> Range {
    let bounds: [f64; 5] = [-2.0, 0.0, 1.0, 2.5, 4.0];
    let i = rng.gen_range(0..bounds.len() - 1);
    let j = rng.gen_range(i + 1..bounds.len());
    if rng.gen_bool(0.4) {
        Range::integer(bounds[i].ceil() as i64, bounds[j].floor() as i64)
            .unwrap_or_else(|| Range::integer(0, 3).unwrap())
    } else {
        Range::new(bounds[i], bounds[j], rng.gen_bool(0.5), rng.gen_bool(0.5), NumKind::Real, Distribution::Uniform)
            .unwrap_or_else(|| Range::closed(0.0, 1.0).unwrap())
    }
}

fn random_value<R: Rng>(rng: &mut R) -> Value {
    match rng.gen_range(0..5) {
        0 => Value::Bool(rng.gen()),
        1 => Value::Int(rng.gen_range(-1..4)),
        2 => Value::Real([0.0, 0.5, 1.0, 2.5][rng.gen_range(0..4)]),
        _ => Value::Str(["x", "y", "z"][rng.gen_range(0..3)].to_string()),
    }
}

fn random_enum<R: Rng>(rng: &mut R) -> Schema {
    let n = rng.gen_range(1..=3);
    Schema::enumeration((0..n).map(|_| random_value(rng)))
}

/// A value schema: enums, ranges, `not` over enums, and `anyOf`/`allOf`
/// of those. A grounded schema never has a bare `not` as a disjunct, so
/// it denotes a union of categorical sets and ranges on its own.
pub fn random_field<R: Rng>(rng: &mut R, depth: usize, grounded: bool) -> Schema {
    let leaf = depth == 0 || rng.gen_bool(0.5);
    if leaf {
        return match rng.gen_range(0..if grounded { 2 } else { 3 }) {
            0 => random_enum(rng),
            1 => Schema::Range(random_range(rng)),
            _ => Schema::not(random_enum(rng)),
        };
    }
    let n = rng.gen_range(2..=3);
    if rng.gen_bool(0.5) {
        Schema::AnyOf((0..n).map(|_| random_field(rng, depth - 1, grounded)).collect())
    } else {
        Schema::AllOf((0..n).map(|i| random_field(rng, depth - 1, grounded && i == 0)).collect())
    }
}

fn random_constraint<R: Rng>(rng: &mut R, keys: &[&str]) -> Schema {
    let record = |rng: &mut R| {
        let k = keys[rng.gen_range(0..keys.len())];
        Schema::record([(k, random_field(rng, 1, false))])
    };
    let n = rng.gen_range(1..=3);
    let records: Vec<Schema> = (0..n).map(|_| record(rng)).collect();
    if n == 1 {
        records.into_iter().next().unwrap_or(Schema::Top)
    } else {
        Schema::AnyOf(records)
    }
}

/// An operator-shaped schema: a record listing every key, optionally
/// conjoined with side constraints over subsets of the keys.
pub fn random_schema<R: Rng>(rng: &mut R) -> Schema {
    let n = rng.gen_range(1..=KEYS.len());
    let keys = &KEYS[..n];
    let leading = Schema::record(keys.iter().map(|k| (*k, random_field(rng, 2, true))));
    let extra = rng.gen_range(0..=2);
    if extra == 0 {
        return leading;
    }
    let mut parts = vec![leading];
    parts.extend((0..extra).map(|_| random_constraint(rng, keys)));
    Schema::AllOf(parts)
}

fn collect_candidates(s: &Schema, key: Option<&str>, cuts: usize, out: &mut BTreeMap<String, Vec<Value>>) {
    let mut push = |key: Option<&str>, v: Value| {
        if let Some(k) = key {
            let e = out.entry(k.to_string()).or_default();
            if !e.contains(&v) {
                e.push(v);
            }
        }
    };
    match s {
        Schema::Enum(vs) => vs.iter().for_each(|v| push(key, v.clone())),
        Schema::Range(r) => {
            for i in 0..cuts {
                let x = r.lo + (r.hi - r.lo) * i as f64 / (cuts - 1).max(1) as f64;
                match r.kind {
                    NumKind::Real => push(key, Value::Real(x)),
                    NumKind::Integer => push(key, Value::Int(x.round() as i64)),
                }
            }
            // a point just inside each bound
            let eps = (r.hi - r.lo) * 1e-3;
            if r.kind == NumKind::Real {
                push(key, Value::Real(r.lo + eps));
                push(key, Value::Real(r.hi - eps));
            }
        }
        Schema::Record(props) => {
            for (k, sub) in props {
                collect_candidates(sub, Some(k), cuts, out);
            }
        }
        Schema::AnyOf(cs) | Schema::AllOf(cs) => cs.iter().for_each(|c| collect_candidates(c, key, cuts, out)),
        Schema::Not(c) => collect_candidates(c, key, cuts, out),
        Schema::Top | Schema::Bottom => {}
    }
}

/// Candidate configurations: per key, every enum member plus `cuts`
/// evenly spaced points of every range, bounds included, and points just
/// inside each real bound; then the product over keys.
pub fn universe(schema: &Schema, cuts: usize) -> Vec<Config> {
    let mut cands = BTreeMap::new();
    collect_candidates(schema, None, cuts, &mut cands);
    let mut rows = vec![Config::new()];
    for (k, vs) in cands {
        rows = rows
            .iter()
            .flat_map(|row| {
                vs.iter().map(|v| {
                    let mut r = row.clone();
                    r.insert(k.clone(), v.clone());
                    r
                })
            })
            .collect();
    }
    rows
}

/// Extra operators with known normal-form sizes.
pub fn counting_registry() -> Registry {
    let mut reg = Registry::bundled();
    let tri = Schema::record([(
        "x",
        Schema::AnyOf(vec![
            Schema::enumeration(["a"]),
            Schema::Range(Range::closed(0.0, 1.0).unwrap()),
            Schema::Range(Range::closed(2.0, 3.0).unwrap()),
        ]),
    )]);
    let quad = Schema::record([
        ("x", Schema::AnyOf(vec![Schema::enumeration(["a"]), Schema::Range(Range::closed(0.0, 1.0).unwrap())])),
        ("y", Schema::AnyOf(vec![Schema::enumeration(["b"]), Schema::Range(Range::integer(1, 5).unwrap())])),
    ]);
    let defaults = |pairs: &[(&str, Value)]| -> Config { pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect() };
    reg.register(OperatorSpec::new("Tri", tri, defaults(&[("x", "a".into())]), OperatorKind::Transformer, None).unwrap())
        .unwrap();
    reg.register(
        OperatorSpec::new("Quad", quad, defaults(&[("x", "a".into()), ("y", "b".into())]), OperatorKind::Transformer, None)
            .unwrap(),
    )
    .unwrap();
    reg
}

/// Normal-form sizes of the counting registry, worked out by hand.
pub fn leaf_counts() -> BTreeMap<&'static str, usize> {
    [
        ("PCA", 2),
        ("J48", 2),
        ("LR", 2),
        ("Scaler", 2),
        ("Projector", 2),
        ("KNN", 2),
        ("LogReg", 2),
        ("Stump", 2),
        ("Vote", 2),
        ("Concat", 1),
        ("Tri", 3),
        ("Quad", 4),
    ]
    .into_iter()
    .collect()
}

/// A pipeline of at most `budget` steps and combinator depth `depth`.
pub fn random_pipeline<R: Rng>(rng: &mut R, ops: &[&str], budget: usize, depth: usize) -> PipelineExpr {
    if budget <= 1 || depth == 0 || rng.gen_bool(0.25) {
        return op(*ops.choose(rng).expect("operators"));
    }
    let left_budget = rng.gen_range(1..budget);
    let right_budget = rng.gen_range(1..=budget - left_budget);
    let a = random_pipeline(rng, ops, left_budget, depth - 1);
    let b = random_pipeline(rng, ops, right_budget, depth - 1);
    match rng.gen_range(0..3) {
        0 => seq(a, b),
        1 => par(a, b),
        _ => choice(vec![a, b]).expect("two alternatives"),
    }
}

pub fn combinator_depth(p: &PipelineExpr) -> usize {
    match p {
        PipelineExpr::Step(_) => 0,
        PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => 1 + combinator_depth(a).max(combinator_depth(b)),
        PipelineExpr::Choice(alts) => 1 + alts.iter().map(combinator_depth).max().unwrap_or(0),
    }
}

/// Flat disjunct count by the product and sum laws.
pub fn expected_count(p: &PipelineExpr, leaves: &BTreeMap<&str, usize>) -> usize {
    match p {
        PipelineExpr::Step(s) => leaves[s.op.as_str()],
        PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => expected_count(a, leaves) * expected_count(b, leaves),
        PipelineExpr::Choice(alts) => alts.iter().map(|a| expected_count(a, leaves)).sum(),
    }
}
