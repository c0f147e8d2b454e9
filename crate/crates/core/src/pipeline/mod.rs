//! Pipelines built from operators with three combinators: sequence
//! (`>>`), parallel (`&`) and choice (`|`), plus the lifecycle each
//! pipeline moves through as it is configured and trained.

mod exec;
mod format;
mod typestate;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{BitAnd, BitOr, Shr};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::operators::{is_identifier, Registry, TrainedModel};
use crate::value::Config;

pub use exec::{fit, predict, transform};
pub use format::{parse_pipeline, pipeline_from_json, pipeline_to_json, serialize_pipeline};
pub use typestate::{Trainable, Trained};

/// How much of a pipeline is bound. Ordered `Planned < Trainable < Trained`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LifecycleState {
    /// Topology fixed; hyperparameters or operator choices still free.
    Planned,
    /// Every hyperparameter and choice bound; nothing learned yet.
    Trainable,
    Trained,
}

impl fmt::Display for LifecycleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LifecycleState::Planned => "planned",
            LifecycleState::Trainable => "trainable",
            LifecycleState::Trained => "trained",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub op: String,
    /// Display name used for mangling; defaults to the operator name.
    pub name: Option<String>,
    pub bindings: Option<Config>,
    pub learned: Option<Arc<TrainedModel>>,
}

impl Step {
    pub fn new(op: impl Into<String>) -> Self {
        Step {
            op: op.into(),
            name: None,
            bindings: None,
            learned: None,
        }
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.op)
    }

    pub fn state(&self) -> LifecycleState {
        if self.learned.is_some() {
            LifecycleState::Trained
        } else if self.bindings.is_some() {
            LifecycleState::Trainable
        } else {
            LifecycleState::Planned
        }
    }

    /// Binds hyperparameters on top of the current bindings (or the
    /// operator's defaults). Any learned state is dropped.
    pub fn configure(&self, reg: &Registry, bindings: &Config) -> Result<Step> {
        let spec = reg.lookup(&self.op)?;
        if let Some(unknown) = bindings.keys().find(|k| !spec.leading_record().contains_key(*k)) {
            return Err(Error::Config(format!(
                "operator `{}` has no hyperparameter `{unknown}`",
                self.op
            )));
        }
        let mut config = self.bindings.clone().unwrap_or_else(|| spec.defaults.clone());
        config.extend(bindings.iter().map(|(k, v)| (k.clone(), v.clone())));
        spec.validate(&config)?;
        Ok(Step {
            bindings: Some(config),
            learned: None,
            ..self.clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PipelineExpr {
    Step(Step),
    Seq(Box<PipelineExpr>, Box<PipelineExpr>),
    Par(Box<PipelineExpr>, Box<PipelineExpr>),
    Choice(Vec<PipelineExpr>),
}

/// Shorthand for an unconfigured step.
pub fn op(name: impl Into<String>) -> PipelineExpr {
    PipelineExpr::Step(Step::new(name))
}

pub fn seq(a: PipelineExpr, b: PipelineExpr) -> PipelineExpr {
    PipelineExpr::Seq(Box::new(a), Box::new(b))
}

/// Runs both branches on the same input. Outputs are not concatenated;
/// follow with `Concat` for that.
pub fn par(a: PipelineExpr, b: PipelineExpr) -> PipelineExpr {
    PipelineExpr::Par(Box::new(a), Box::new(b))
}

pub fn choice(alternatives: Vec<PipelineExpr>) -> Result<PipelineExpr> {
    if alternatives.len() < 2 {
        return Err(Error::Arity(alternatives.len()));
    }
    Ok(PipelineExpr::Choice(alternatives))
}

impl Shr for PipelineExpr {
    type Output = PipelineExpr;
    fn shr(self, rhs: PipelineExpr) -> PipelineExpr {
        seq(self, rhs)
    }
}

impl BitAnd for PipelineExpr {
    type Output = PipelineExpr;
    fn bitand(self, rhs: PipelineExpr) -> PipelineExpr {
        par(self, rhs)
    }
}

/// `a | b | c` builds one three-way choice. Use [`choice`] to nest.
impl BitOr for PipelineExpr {
    type Output = PipelineExpr;
    fn bitor(self, rhs: PipelineExpr) -> PipelineExpr {
        match self {
            PipelineExpr::Choice(mut alts) => {
                alts.push(rhs);
                PipelineExpr::Choice(alts)
            }
            lhs => PipelineExpr::Choice(vec![lhs, rhs]),
        }
    }
}

impl PipelineExpr {
    pub fn step(op: impl Into<String>) -> PipelineExpr {
        self::op(op)
    }

    /// Sets the display name of a step. Has no effect on composites.
    pub fn named(self, name: impl Into<String>) -> PipelineExpr {
        match self {
            PipelineExpr::Step(s) => PipelineExpr::Step(Step {
                name: Some(name.into()),
                ..s
            }),
            other => other,
        }
    }

    pub fn state(&self) -> LifecycleState {
        match self {
            PipelineExpr::Step(s) => s.state(),
            PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => a.state().min(b.state()),
            PipelineExpr::Choice(_) => LifecycleState::Planned,
        }
    }

    /// Steps in left-to-right order, including those inside every
    /// alternative of every choice.
    pub fn steps(&self) -> Vec<&Step> {
        let mut out = Vec::new();
        self.collect_steps(&mut out);
        out
    }

    fn collect_steps<'a>(&'a self, out: &mut Vec<&'a Step>) {
        match self {
            PipelineExpr::Step(s) => out.push(s),
            PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => {
                a.collect_steps(out);
                b.collect_steps(out);
            }
            PipelineExpr::Choice(alts) => alts.iter().for_each(|a| a.collect_steps(out)),
        }
    }

    pub fn count_steps(&self) -> usize {
        match self {
            PipelineExpr::Step(_) => 1,
            PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => a.count_steps() + b.count_steps(),
            PipelineExpr::Choice(alts) => alts.iter().map(PipelineExpr::count_steps).sum(),
        }
    }

    /// The operands of a maximal run of sequence and parallel nodes, left
    /// to right. Any other node is its own single operand.
    pub fn chain(&self) -> Vec<&PipelineExpr> {
        let mut out = Vec::new();
        self.collect_chain(&mut out);
        out
    }

    fn collect_chain<'a>(&'a self, out: &mut Vec<&'a PipelineExpr>) {
        match self {
            PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => {
                a.collect_chain(out);
                b.collect_chain(out);
            }
            other => out.push(other),
        }
    }

    pub fn is_composite(&self) -> bool {
        !matches!(self, PipelineExpr::Step(_))
    }

    pub fn contains_choice(&self) -> bool {
        match self {
            PipelineExpr::Step(_) => false,
            PipelineExpr::Seq(a, b) | PipelineExpr::Par(a, b) => {
                a.contains_choice() || b.contains_choice()
            }
            PipelineExpr::Choice(_) => true,
        }
    }

    /// Checks operator names, display names and bindings against `reg`.
    pub fn check(&self, reg: &Registry) -> Result<()> {
        for s in self.steps() {
            let spec = reg.lookup(&s.op)?;
            if let Some(name) = &s.name {
                if !is_identifier(name) {
                    return Err(Error::InvalidName(name.clone()));
                }
            }
            if let Some(b) = &s.bindings {
                spec.validate(b)?;
            }
        }
        Ok(())
    }

    /// Applies each entry of `bindings` to the steps with that display
    /// name. Returns a new pipeline; `self` is untouched.
    pub fn configure(&self, reg: &Registry, bindings: &BTreeMap<String, Config>) -> Result<PipelineExpr> {
        let names: Vec<&str> = self.steps().iter().map(|s| s.display_name()).collect();
        if let Some(unknown) = bindings.keys().find(|k| !names.contains(&k.as_str())) {
            return Err(Error::Config(format!("pipeline has no step named `{unknown}`")));
        }
        self.map_steps(&mut |s| match bindings.get(s.display_name()) {
            Some(b) => s.configure(reg, b),
            None => Ok(s.clone()),
        })
    }

    /// Binds the defaults of every unbound step.
    pub fn configure_all(&self, reg: &Registry) -> Result<PipelineExpr> {
        self.map_steps(&mut |s| {
            if s.bindings.is_some() {
                Ok(s.clone())
            } else {
                s.configure(reg, &Config::new())
            }
        })
    }

    pub(crate) fn map_steps(&self, f: &mut impl FnMut(&Step) -> Result<Step>) -> Result<PipelineExpr> {
        Ok(match self {
            PipelineExpr::Step(s) => PipelineExpr::Step(f(s)?),
            PipelineExpr::Seq(a, b) => seq(a.map_steps(f)?, b.map_steps(f)?),
            PipelineExpr::Par(a, b) => par(a.map_steps(f)?, b.map_steps(f)?),
            PipelineExpr::Choice(alts) => PipelineExpr::Choice(
                alts.iter().map(|a| a.map_steps(f)).collect::<Result<_>>()?,
            ),
        })
    }

    /// Same pipeline with every learned model dropped.
    pub fn untrained(&self) -> PipelineExpr {
        self.map_steps(&mut |s| {
            Ok(Step {
                learned: None,
                ..s.clone()
            })
        })
        .expect("infallible")
    }

    /// True when both pipelines have the same sequence, parallel and
    /// choice structure over the same operators.
    pub fn same_topology(&self, other: &PipelineExpr) -> bool {
        match (self, other) {
            (PipelineExpr::Step(a), PipelineExpr::Step(b)) => a.op == b.op,
            (PipelineExpr::Seq(a0, a1), PipelineExpr::Seq(b0, b1))
            | (PipelineExpr::Par(a0, a1), PipelineExpr::Par(b0, b1)) => {
                a0.same_topology(b0) && a1.same_topology(b1)
            }
            (PipelineExpr::Choice(a), PipelineExpr::Choice(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_topology(y))
            }
            _ => false,
        }
    }
}

impl From<Step> for PipelineExpr {
    fn from(s: Step) -> Self {
        PipelineExpr::Step(s)
    }
}

impl fmt::Display for PipelineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn rank(p: &PipelineExpr) -> u8 {
            match p {
                PipelineExpr::Step(_) => 3,
                PipelineExpr::Seq(..) => 2,
                PipelineExpr::Par(..) => 1,
                PipelineExpr::Choice(_) => 0,
            }
        }
        fn operand(f: &mut fmt::Formatter<'_>, p: &PipelineExpr, min: u8) -> fmt::Result {
            if rank(p) < min {
                write!(f, "({p})")
            } else {
                write!(f, "{p}")
            }
        }
        match self {
            PipelineExpr::Step(s) => {
                f.write_str(s.display_name())?;
                if let Some(b) = &s.bindings {
                    let parts: Vec<String> = b.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    write!(f, "({})", parts.join(", "))?;
                }
                Ok(())
            }
            PipelineExpr::Seq(a, b) => {
                operand(f, a, 2)?;
                f.write_str(" >> ")?;
                operand(f, b, 3)
            }
            PipelineExpr::Par(a, b) => {
                operand(f, a, 1)?;
                f.write_str(" & ")?;
                operand(f, b, 2)
            }
            PipelineExpr::Choice(alts) => {
                for (i, a) in alts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    operand(f, a, 1)?;
                }
                Ok(())
            }
        }
    }
}
