//! Desk-scale implementations of the bundled operators.
//!
//! Data flows between steps as a list of matrices: most operators take
//! exactly one input, while `Concat` and `Vote` combine several (the
//! outputs of a parallel composition). Estimators used as transformers
//! emit a single column of predicted class indices.

mod knn;
mod logreg;
mod projector;
mod scaler;
mod stump;
mod vote;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::value::Config;

use super::OperatorSpec;

pub use knn::Knn;
pub use logreg::LogReg;
pub use projector::Projector;
pub use scaler::Scaler;
pub use stump::Stump;
pub use vote::Vote;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinImpl {
    Scaler,
    Projector,
    Knn,
    Logreg,
    Stump,
    Vote,
    Concat,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Scaler(Scaler),
    Projector(Projector),
    Knn(Knn),
    LogReg(LogReg),
    Stump(Stump),
    Vote(Vote),
    Concat,
}

/// Training inputs for one step.
#[derive(Debug, Clone, Copy)]
pub struct FitInput<'a> {
    pub inputs: &'a [DMatrix<f64>],
    pub labels: &'a [usize],
    pub n_classes: usize,
    pub seed: u64,
}

pub fn fit_builtin(spec: &OperatorSpec, config: &Config, data: FitInput<'_>) -> Result<TrainedModel> {
    let Some(imp) = spec.implementation else {
        return Err(Error::Config(format!(
            "operator `{}` is compile-only and cannot be trained",
            spec.name
        )));
    };
    spec.validate(config)?;
    if let Some(x) = data.inputs.first() {
        if x.nrows() != data.labels.len() {
            return Err(Error::Training(format!(
                "{} rows but {} labels",
                x.nrows(),
                data.labels.len()
            )));
        }
    }
    Ok(match imp {
        BuiltinImpl::Scaler => TrainedModel::Scaler(Scaler::fit(config, single(data.inputs)?)?),
        BuiltinImpl::Projector => {
            TrainedModel::Projector(Projector::fit(config, single(data.inputs)?, data.seed)?)
        }
        BuiltinImpl::Knn => {
            TrainedModel::Knn(Knn::fit(config, single(data.inputs)?, data.labels, data.n_classes)?)
        }
        BuiltinImpl::Logreg => TrainedModel::LogReg(LogReg::fit(
            config,
            single(data.inputs)?,
            data.labels,
            data.n_classes,
            data.seed,
        )?),
        BuiltinImpl::Stump => TrainedModel::Stump(Stump::fit(
            config,
            single(data.inputs)?,
            data.labels,
            data.n_classes,
        )?),
        BuiltinImpl::Vote => TrainedModel::Vote(Vote::fit(config, data.inputs, data.n_classes)?),
        BuiltinImpl::Concat => {
            concat(data.inputs)?;
            TrainedModel::Concat
        }
    })
}

impl TrainedModel {
    pub fn is_estimator(&self) -> bool {
        !matches!(
            self,
            TrainedModel::Scaler(_) | TrainedModel::Projector(_) | TrainedModel::Concat
        )
    }

    /// Class indices, one per row. Transformers cannot predict.
    pub fn predict(&self, inputs: &[DMatrix<f64>]) -> Result<Vec<usize>> {
        match self {
            TrainedModel::Knn(m) => m.predict(single(inputs)?),
            TrainedModel::LogReg(m) => m.predict(single(inputs)?),
            TrainedModel::Stump(m) => m.predict(single(inputs)?),
            TrainedModel::Vote(m) => m.predict(inputs),
            TrainedModel::Scaler(_) | TrainedModel::Projector(_) | TrainedModel::Concat => Err(
                Error::Training("a transformer cannot predict; end the pipeline with an estimator".into()),
            ),
        }
    }

    pub fn transform(&self, inputs: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
        match self {
            TrainedModel::Scaler(m) => m.transform(single(inputs)?),
            TrainedModel::Projector(m) => m.transform(single(inputs)?),
            TrainedModel::Concat => concat(inputs),
            _ => {
                let labels = self.predict(inputs)?;
                Ok(DMatrix::from_iterator(
                    labels.len(),
                    1,
                    labels.iter().map(|l| *l as f64),
                ))
            }
        }
    }
}

fn single(inputs: &[DMatrix<f64>]) -> Result<&DMatrix<f64>> {
    match inputs {
        [x] => Ok(x),
        _ => Err(Error::Training(format!(
            "expected one input, got {}; combine parallel branches with Concat or Vote",
            inputs.len()
        ))),
    }
}

fn concat(inputs: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let Some(first) = inputs.first() else {
        return Err(Error::Training("Concat needs at least one input".into()));
    };
    let rows = first.nrows();
    if inputs.iter().any(|m| m.nrows() != rows) {
        return Err(Error::Training("Concat inputs have different row counts".into()));
    }
    let cols: usize = inputs.iter().map(|m| m.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut at = 0;
    for m in inputs {
        out.columns_mut(at, m.ncols()).copy_from(m);
        at += m.ncols();
    }
    Ok(out)
}

fn check_width(x: &DMatrix<f64>, expected: usize) -> Result<()> {
    if x.ncols() != expected {
        return Err(Error::Training(format!(
            "expected {expected} feature columns, got {}",
            x.ncols()
        )));
    }
    Ok(())
}

fn get<'a>(config: &'a Config, key: &str) -> Result<&'a crate::value::Value> {
    config
        .get(key)
        .ok_or_else(|| Error::Training(format!("missing hyperparameter `{key}`")))
}

fn get_bool(config: &Config, key: &str) -> Result<bool> {
    get(config, key)?
        .as_bool()
        .ok_or_else(|| Error::Training(format!("`{key}` must be a boolean")))
}

fn get_f64(config: &Config, key: &str) -> Result<f64> {
    get(config, key)?
        .as_f64()
        .ok_or_else(|| Error::Training(format!("`{key}` must be a number")))
}

fn get_usize(config: &Config, key: &str) -> Result<usize> {
    get(config, key)?
        .as_i64()
        .and_then(|v| usize::try_from(v).ok())
        .ok_or_else(|| Error::Training(format!("`{key}` must be a nonnegative integer")))
}

fn get_str<'a>(config: &'a Config, key: &str) -> Result<&'a str> {
    get(config, key)?
        .as_str()
        .ok_or_else(|| Error::Training(format!("`{key}` must be a string")))
}

/// Index of the largest score; ties go to the lowest index.
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}
