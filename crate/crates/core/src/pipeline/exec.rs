//! Training and inference. Data flows left to right through sequences and
//! is duplicated into both branches of a parallel composition, whose
//! outputs are passed on side by side.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::operators::{fit_builtin, FitInput, Registry};

use super::{par, seq, LifecycleState, PipelineExpr, Step};

/// Trains every step of a trainable pipeline and returns the trained
/// copy. `p` is not modified, so fitting it twice gives two independent
/// results.
pub fn fit(p: &PipelineExpr, data: &Dataset, reg: &Registry, seed: u64) -> Result<PipelineExpr> {
    require(p, "fit", LifecycleState::Trainable)?;
    for s in p.steps() {
        let spec = reg.lookup(&s.op)?;
        if spec.implementation.is_none() {
            return Err(Error::Config(format!(
                "operator `{}` is compile-only and cannot be trained",
                s.op
            )));
        }
    }
    let ctx = Ctx {
        labels: &data.labels,
        n_classes: data.n_classes(),
        reg,
        seed,
    };
    let (trained, _) = ctx.fit_node(p, vec![data.features.clone()], 0, false)?;
    Ok(trained)
}

pub fn predict(p: &PipelineExpr, x: &DMatrix<f64>) -> Result<Vec<usize>> {
    require(p, "predict with", LifecycleState::Trained)?;
    predict_node(p, vec![x.clone()])
}

/// Outputs of the last step (several when the pipeline ends in a parallel
/// composition).
pub fn transform(p: &PipelineExpr, x: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    require(p, "transform with", LifecycleState::Trained)?;
    transform_node(p, vec![x.clone()])
}

fn require(p: &PipelineExpr, action: &'static str, required: LifecycleState) -> Result<()> {
    let actual = p.state();
    if actual < required {
        return Err(Error::Lifecycle {
            action,
            required,
            actual,
        });
    }
    Ok(())
}

struct Ctx<'a> {
    labels: &'a [usize],
    n_classes: usize,
    reg: &'a Registry,
    seed: u64,
}

impl Ctx<'_> {
    /// `first` is the index of the node's first step, which offsets the
    /// seed so every step draws from its own stream.
    fn fit_node(
        &self,
        p: &PipelineExpr,
        inputs: Vec<DMatrix<f64>>,
        first: usize,
        need_output: bool,
    ) -> Result<(PipelineExpr, Vec<DMatrix<f64>>)> {
        match p {
            PipelineExpr::Step(s) => {
                let spec = self.reg.lookup(&s.op)?;
                let config = s
                    .bindings
                    .as_ref()
                    .ok_or_else(|| Error::Config(format!("step `{}` is not configured", s.display_name())))?;
                let model = fit_builtin(
                    spec,
                    config,
                    FitInput {
                        inputs: &inputs,
                        labels: self.labels,
                        n_classes: self.n_classes,
                        seed: self.seed.wrapping_add(first as u64),
                    },
                )?;
                let outputs = if need_output {
                    vec![model.transform(&inputs)?]
                } else {
                    Vec::new()
                };
                let trained = Step {
                    learned: Some(Arc::new(model)),
                    ..s.clone()
                };
                Ok((PipelineExpr::Step(trained), outputs))
            }
            PipelineExpr::Seq(a, b) => {
                let (ta, mid) = self.fit_node(a, inputs, first, true)?;
                let (tb, out) = self.fit_node(b, mid, first + a.count_steps(), need_output)?;
                Ok((seq(ta, tb), out))
            }
            PipelineExpr::Par(a, b) => {
                let second = first + a.count_steps();
                let (ra, rb) = rayon::join(
                    || self.fit_node(a, inputs.clone(), first, need_output),
                    || self.fit_node(b, inputs.clone(), second, need_output),
                );
                let (ta, mut out) = ra?;
                let (tb, out_b) = rb?;
                out.extend(out_b);
                Ok((par(ta, tb), out))
            }
            PipelineExpr::Choice(_) => Err(Error::Lifecycle {
                action: "fit",
                required: LifecycleState::Trainable,
                actual: LifecycleState::Planned,
            }),
        }
    }
}

fn model(s: &Step) -> Result<&crate::operators::TrainedModel> {
    s.learned.as_deref().ok_or(Error::Lifecycle {
        action: "apply",
        required: LifecycleState::Trained,
        actual: s.state(),
    })
}

fn transform_node(p: &PipelineExpr, inputs: Vec<DMatrix<f64>>) -> Result<Vec<DMatrix<f64>>> {
    match p {
        PipelineExpr::Step(s) => Ok(vec![model(s)?.transform(&inputs)?]),
        PipelineExpr::Seq(a, b) => transform_node(b, transform_node(a, inputs)?),
        PipelineExpr::Par(a, b) => {
            let mut out = transform_node(a, inputs.clone())?;
            out.extend(transform_node(b, inputs)?);
            Ok(out)
        }
        PipelineExpr::Choice(_) => Err(Error::Lifecycle {
            action: "transform with",
            required: LifecycleState::Trained,
            actual: LifecycleState::Planned,
        }),
    }
}

fn predict_node(p: &PipelineExpr, inputs: Vec<DMatrix<f64>>) -> Result<Vec<usize>> {
    match p {
        PipelineExpr::Step(s) => model(s)?.predict(&inputs),
        PipelineExpr::Seq(a, b) => predict_node(b, transform_node(a, inputs)?),
        PipelineExpr::Par(..) => Err(Error::Training(
            "a parallel composition has several outputs; combine them with Vote to predict".into(),
        )),
        PipelineExpr::Choice(_) => Err(Error::Lifecycle {
            action: "predict with",
            required: LifecycleState::Trained,
            actual: LifecycleState::Planned,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synthetic;
    use crate::pipeline::op;
    use crate::value::{Config, Value};

    fn knn1(reg: &Registry) -> PipelineExpr {
        let k1: Config = [("k".to_string(), Value::Int(1))].into();
        op("KNN").configure(reg, &[("KNN".into(), k1)].into()).unwrap()
    }

    #[test]
    fn planned_pipelines_cannot_be_fitted() {
        let reg = Registry::bundled();
        let ds = synthetic(30, 0);
        let err = fit(&(op("Scaler") >> (op("KNN") | op("Stump"))), &ds, &reg, 0).unwrap_err();
        assert!(matches!(
            err,
            Error::Lifecycle {
                actual: LifecycleState::Planned,
                ..
            }
        ));
    }

    #[test]
    fn compile_only_operators_cannot_be_fitted() {
        let reg = Registry::bundled();
        let ds = synthetic(30, 0);
        let p = op("PCA").configure_all(&reg).unwrap();
        assert!(matches!(fit(&p, &ds, &reg, 0), Err(Error::Config(_))));
    }

    #[test]
    fn fitted_knn_recalls_its_training_labels() {
        let reg = Registry::bundled();
        let ds = synthetic(45, 1);
        let p = knn1(&reg);
        let trained = fit(&p, &ds, &reg, 0).unwrap();
        assert_eq!(trained.state(), LifecycleState::Trained);
        assert_eq!(predict(&trained, &ds.features).unwrap(), ds.labels);
        assert!(matches!(predict(&p, &ds.features), Err(Error::Lifecycle { .. })));
    }

    #[test]
    fn fit_is_pure_and_repeatable() {
        let reg = Registry::bundled();
        let ds = synthetic(60, 2);
        let p = (op("Scaler") >> op("LogReg")).configure_all(&reg).unwrap();
        let before = p.clone();
        let a = fit(&p, &ds, &reg, 5).unwrap();
        let b = fit(&p, &ds, &reg, 5).unwrap();
        assert_eq!(p, before);
        assert!(a.same_topology(&p));
        assert_eq!(predict(&a, &ds.features).unwrap(), predict(&b, &ds.features).unwrap());
    }

    #[test]
    fn sequence_transform_is_composition() {
        let reg = Registry::bundled();
        let ds = synthetic(40, 3);
        let p = (op("Scaler") >> op("Projector")).configure_all(&reg).unwrap();
        let whole = fit(&p, &ds, &reg, 9).unwrap();
        let PipelineExpr::Seq(a, b) = &whole else { panic!() };
        let mid = transform(a, &ds.features).unwrap();
        let two_stage = transform(b, &mid[0]).unwrap();
        assert_eq!(transform(&whole, &ds.features).unwrap(), two_stage);
    }

    #[test]
    fn parallel_branches_feed_concat_and_vote() {
        let reg = Registry::bundled();
        let ds = synthetic(60, 4);
        let features = ((op("Scaler") & op("Projector")) >> op("Concat") >> op("KNN"))
            .configure_all(&reg)
            .unwrap();
        let trained = fit(&features, &ds, &reg, 0).unwrap();
        assert_eq!(predict(&trained, &ds.features).unwrap().len(), 60);

        let ensemble = ((op("KNN") & op("Stump") & op("LogReg")) >> op("Vote"))
            .configure_all(&reg)
            .unwrap();
        let trained = fit(&ensemble, &ds, &reg, 0).unwrap();
        let acc = predict(&trained, &ds.features)
            .unwrap()
            .iter()
            .zip(&ds.labels)
            .filter(|(a, b)| a == b)
            .count();
        assert!(acc > 40, "{acc}");
    }

    #[test]
    fn parallel_output_needs_a_combiner() {
        let reg = Registry::bundled();
        let ds = synthetic(30, 5);
        let p = (op("Scaler") & op("Projector")).configure_all(&reg).unwrap();
        let trained = fit(&p, &ds, &reg, 0).unwrap();
        assert_eq!(transform(&trained, &ds.features).unwrap().len(), 2);
        assert!(predict(&trained, &ds.features).is_err());
        let bad = (op("Scaler") & op("Projector")) >> op("KNN");
        let err = fit(&bad.configure_all(&reg).unwrap(), &ds, &reg, 0).unwrap_err();
        assert!(matches!(err, Error::Training(_)));
    }
}
