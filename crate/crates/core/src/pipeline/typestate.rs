//! Wrappers that carry the lifecycle state in the type, so that calling
//! `predict` on something untrained does not compile.

use nalgebra::DMatrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::operators::Registry;

use super::{exec, LifecycleState, PipelineExpr};

/// A pipeline with every hyperparameter and choice bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Trainable(PipelineExpr);

/// A pipeline whose every step has learned state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained(PipelineExpr);

impl Trainable {
    pub fn new(p: PipelineExpr) -> Result<Self> {
        let actual = p.state();
        if actual < LifecycleState::Trainable {
            return Err(Error::Lifecycle {
                action: "treat as trainable",
                required: LifecycleState::Trainable,
                actual,
            });
        }
        Ok(Trainable(p.untrained()))
    }

    pub fn expr(&self) -> &PipelineExpr {
        &self.0
    }

    pub fn fit(&self, data: &Dataset, reg: &Registry, seed: u64) -> Result<Trained> {
        exec::fit(&self.0, data, reg, seed).map(Trained)
    }
}

impl Trained {
    pub fn new(p: PipelineExpr) -> Result<Self> {
        let actual = p.state();
        if actual < LifecycleState::Trained {
            return Err(Error::Lifecycle {
                action: "treat as trained",
                required: LifecycleState::Trained,
                actual,
            });
        }
        Ok(Trained(p))
    }

    pub fn expr(&self) -> &PipelineExpr {
        &self.0
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        exec::predict(&self.0, x)
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
        exec::transform(&self.0, x)
    }
}
