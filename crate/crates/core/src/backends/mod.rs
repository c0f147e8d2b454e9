//! Compilation of a pipeline over a registry into three search-space
//! styles:
//!
//! * **flat**: a list of grids, one per combination of operator
//!   disjuncts, with choices recorded in discriminant dimensions;
//! * **grid**: the flat space with every range replaced by a few sampled
//!   values, for exhaustive search;
//! * **nested**: a tree that follows the pipeline, with a tagged
//!   disjunction at every choice.
//!
//! Naming is described in [`plan`].

mod flat;
mod grid;
mod nested;
pub mod plan;
mod sample;
mod wire;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::normalize::{normalize_with, Grid, NormalizeOptions, NormalizedSpace, DEFAULT_DISJUNCT_CAP};
use crate::operators::Registry;
use crate::pipeline::{PipelineExpr, Step};
use crate::schema::Schema;
use crate::value::Config;

pub use flat::FlatSpace;
pub use grid::{GridSpace, DEFAULT_CUTS};
pub use nested::{NestedAlternative, NestedSpace};
pub use plan::{child_path, discriminant_key, display_names, mangle, unmangle};
pub use sample::{sample_dimension, sample_grid, sample_range};
pub use wire::{parse_space, serialize_space, space_from_json, space_to_json};

pub(crate) use plan::Plan;

/// A flat assignment of mangled names (and discriminants) to values.
pub type SearchPoint = Config;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Flat,
    Grid,
    Nested,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Flat => "flat",
            Backend::Grid => "grid",
            Backend::Nested => "nested",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(Backend::Flat),
            "grid" => Ok(Backend::Grid),
            "nested" => Ok(Backend::Nested),
            other => Err(Error::Config(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    /// Cap on disjuncts, both per operator and for the whole pipeline.
    pub disjunct_cap: usize,
    /// Values sampled per range by the grid backend.
    pub cuts: usize,
    pub seed: u64,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            disjunct_cap: DEFAULT_DISJUNCT_CAP,
            cuts: DEFAULT_CUTS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CompiledSpace {
    Flat(FlatSpace),
    Grid(GridSpace),
    Nested(NestedSpace),
}

impl CompiledSpace {
    pub fn backend(&self) -> Backend {
        match self {
            CompiledSpace::Flat(_) => Backend::Flat,
            CompiledSpace::Grid(_) => Backend::Grid,
            CompiledSpace::Nested(_) => Backend::Nested,
        }
    }

    pub fn contains(&self, point: &SearchPoint) -> bool {
        match self {
            CompiledSpace::Flat(f) => f.contains(point),
            CompiledSpace::Grid(g) => g.contains(point),
            CompiledSpace::Nested(n) => n.contains(point),
        }
    }

    /// The space as a list of flat grids.
    pub fn flat_grids(&self) -> Result<Vec<Grid>> {
        match self {
            CompiledSpace::Flat(f) => Ok(f.disjuncts.clone()),
            CompiledSpace::Grid(g) => Ok(g.disjuncts.clone()),
            CompiledSpace::Nested(n) => n.flatten(),
        }
    }

    pub fn to_text(&self) -> String {
        serialize_space(self)
    }
}

struct Compiler<'r> {
    reg: &'r Registry,
    opts: CompileOptions,
    cache: HashMap<String, NormalizedSpace>,
}

impl<'r> Compiler<'r> {
    fn new(reg: &'r Registry, opts: CompileOptions) -> Self {
        Compiler {
            reg,
            opts,
            cache: HashMap::new(),
        }
    }

    fn normalized(&mut self, step: &Step) -> Result<NormalizedSpace> {
        let spec = self.reg.lookup(&step.op)?;
        let norm_opts = NormalizeOptions {
            disjunct_cap: self.opts.disjunct_cap,
        };
        match &step.bindings {
            // a bound step contributes exactly its bound point
            Some(b) => {
                let fixed = Schema::record(
                    b.iter()
                        .map(|(k, v)| (k.clone(), Schema::enumeration([v.clone()]))),
                );
                let schema = Schema::all_of(vec![spec.hyperparams.clone(), fixed]);
                Ok(normalize_with(&schema, &norm_opts)?.0)
            }
            None => {
                if let Some(s) = self.cache.get(&step.op) {
                    return Ok(s.clone());
                }
                let s = normalize_with(&spec.hyperparams, &norm_opts)?.0;
                self.cache.insert(step.op.clone(), s.clone());
                Ok(s)
            }
        }
    }

    fn step_grids(&mut self, step: &Step, display: &str) -> Result<Vec<Grid>> {
        let space = self.normalized(step)?;
        if space.is_empty() {
            return Err(Error::EmptyOperatorSpace(display.to_string()));
        }
        Ok(space
            .disjuncts
            .into_iter()
            .map(|g| g.into_iter().map(|(k, d)| (mangle(display, &k), d)).collect())
            .collect())
    }

    fn flat(&mut self, plan: &Plan<'_>) -> Result<Vec<Grid>> {
        match plan {
            Plan::Step { step, display } => self.step_grids(step, display),
            Plan::Chain { operands, .. } => {
                let parts = operands.iter().map(|o| self.flat(o)).collect::<Result<Vec<_>>>()?;
                flat::product(parts, self.opts.disjunct_cap)
            }
            Plan::Choice { key, alternatives } => {
                let mut out = Vec::new();
                for (label, alt) in alternatives {
                    let mut grids = self.flat(alt)?;
                    flat::tag(&mut grids, key, label, false)?;
                    out.extend(grids);
                    flat::check_cap("combining choice alternatives", out.len(), self.opts.disjunct_cap)?;
                }
                Ok(out)
            }
        }
    }

    fn nested(&mut self, plan: &Plan<'_>) -> Result<NestedSpace> {
        match plan {
            Plan::Step { step, display } => Ok(NestedSpace::Grids(self.step_grids(step, display)?)),
            Plan::Chain { operands, .. } => Ok(NestedSpace::Steps(
                operands.iter().map(|o| self.nested(o)).collect::<Result<_>>()?,
            )),
            Plan::Choice { key, alternatives } => {
                let mut alts = Vec::with_capacity(alternatives.len());
                for (label, alt) in alternatives {
                    let mut space = self.nested(alt)?;
                    // a step alternative carries the discriminant in its grids
                    if let NestedSpace::Grids(grids) = &mut space {
                        flat::tag(grids, key, label, false)?;
                    }
                    alts.push(NestedAlternative {
                        label: label.clone(),
                        space,
                    });
                }
                Ok(NestedSpace::Choice {
                    key: key.clone(),
                    alternatives: alts,
                })
            }
        }
    }
}

fn prepare<'p>(p: &'p PipelineExpr, reg: &Registry) -> Result<Plan<'p>> {
    p.check(reg)?;
    Plan::build(p)
}

pub fn compile_flat(p: &PipelineExpr, reg: &Registry) -> Result<FlatSpace> {
    compile_flat_with(p, reg, &CompileOptions::default())
}

pub fn compile_flat_with(p: &PipelineExpr, reg: &Registry, opts: &CompileOptions) -> Result<FlatSpace> {
    let plan = prepare(p, reg)?;
    let disjuncts = Compiler::new(reg, *opts).flat(&plan)?;
    Ok(FlatSpace { disjuncts })
}

pub fn compile_grid(p: &PipelineExpr, reg: &Registry, cuts: usize, seed: u64) -> Result<GridSpace> {
    compile_grid_with(
        p,
        reg,
        &CompileOptions {
            cuts,
            seed,
            ..CompileOptions::default()
        },
    )
}

pub fn compile_grid_with(p: &PipelineExpr, reg: &Registry, opts: &CompileOptions) -> Result<GridSpace> {
    if opts.cuts == 0 {
        return Err(Error::Config("cuts must be positive".into()));
    }
    let flat = compile_flat_with(p, reg, opts)?;
    GridSpace::discretize(&flat, opts.cuts, opts.seed)
}

pub fn compile_nested(p: &PipelineExpr, reg: &Registry) -> Result<NestedSpace> {
    compile_nested_with(p, reg, &CompileOptions::default())
}

pub fn compile_nested_with(p: &PipelineExpr, reg: &Registry, opts: &CompileOptions) -> Result<NestedSpace> {
    let plan = prepare(p, reg)?;
    let mut compiler = Compiler::new(reg, *opts);
    Ok(match &plan {
        Plan::Chain { .. } => compiler.nested(&plan)?,
        other => NestedSpace::Steps(vec![compiler.nested(other)?]),
    })
}

pub fn compile(p: &PipelineExpr, reg: &Registry, backend: Backend, opts: &CompileOptions) -> Result<CompiledSpace> {
    Ok(match backend {
        Backend::Flat => CompiledSpace::Flat(compile_flat_with(p, reg, opts)?),
        Backend::Grid => CompiledSpace::Grid(compile_grid_with(p, reg, opts)?),
        Backend::Nested => CompiledSpace::Nested(compile_nested_with(p, reg, opts)?),
    })
}
