//! Random and grid search over compiled spaces.

mod cv;
mod history;
mod sample;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::backends::{CompiledSpace, GridSpace, SearchPoint};
use crate::decode::decode_point;
use crate::error::{Error, Result};
use crate::normalize::Dimension;
use crate::operators::Registry;
use crate::pipeline::PipelineExpr;

pub use cv::{cross_validate, stratified_folds, Metric, Objective};
pub use history::{parse_history, SearchHistory, Trial, TrialError};
pub use sample::sample_point;

/// Loss assigned to a failed trial.
pub const WORST: f64 = f64::MAX;

/// Default cap on the number of grid points evaluated.
pub const DEFAULT_GRID_CAP: usize = 100_000;

/// Scores a configured pipeline; lower is better.
pub trait Evaluator: Sync {
    fn evaluate(&self, trainable: &PipelineExpr, reg: &Registry) -> Result<f64>;

    /// Whether every operator must have a built-in implementation.
    fn needs_implementations(&self) -> bool {
        false
    }
}

impl<F> Evaluator for F
where
    F: Fn(&PipelineExpr, &Registry) -> Result<f64> + Sync,
{
    fn evaluate(&self, trainable: &PipelineExpr, reg: &Registry) -> Result<f64> {
        self(trainable, reg)
    }
}

impl Evaluator for Objective {
    fn evaluate(&self, trainable: &PipelineExpr, reg: &Registry) -> Result<f64> {
        cross_validate(trainable, self, reg)
    }

    fn needs_implementations(&self) -> bool {
        true
    }
}

/// Short machine-readable name of an error variant.
pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::UnsupportedFeature { .. } => "unsupported_feature",
        Error::Explosion { .. } => "explosion",
        Error::NotNormalizable(_) => "not_normalizable",
        Error::DuplicateOperator(_) => "duplicate_operator",
        Error::UnknownOperator(_) => "unknown_operator",
        Error::InvalidName(_) => "invalid_name",
        Error::InvalidDefaults { .. } => "invalid_defaults",
        Error::InvalidShape { .. } => "invalid_shape",
        Error::SchemaViolation { .. } => "schema_violation",
        Error::Training(_) => "training",
        Error::Lifecycle { .. } => "lifecycle",
        Error::Arity(_) => "arity",
        Error::NameCollision(_) => "name_collision",
        Error::EmptyOperatorSpace(_) => "empty_operator_space",
        Error::UnknownDiscriminant { .. } => "unknown_discriminant",
        Error::MissingHyperparameter(_) => "missing_hyperparameter",
        Error::UnexpectedKey(_) => "unexpected_key",
        Error::NotInSpace(_) => "not_in_space",
        Error::EmptySpace => "empty_space",
        Error::Config(_) => "config",
        Error::Data(_) => "data",
        _ => "other",
    }
}

fn check_implementations(planned: &PipelineExpr, reg: &Registry) -> Result<()> {
    for step in planned.steps() {
        if reg.lookup(&step.op)?.implementation.is_none() {
            return Err(Error::Config(format!(
                "operator `{}` has no built-in implementation and cannot be trained",
                step.op
            )));
        }
    }
    Ok(())
}

/// The trial RNG: the search seed with the trial index as stream.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Samples `iterations` points and scores each. Trials run in parallel;
/// results depend only on the seed. A trial that fails to decode, train
/// or score gets [`WORST`] and the error is recorded.
pub fn random_search(
    planned: &PipelineExpr,
    space: &CompiledSpace,
    reg: &Registry,
    evaluator: &dyn Evaluator,
    iterations: usize,
    seed: u64,
) -> Result<SearchHistory> {
    planned.check(reg)?;
    if evaluator.needs_implementations() {
        check_implementations(planned, reg)?;
    }
    let points = (0..iterations)
        .map(|i| sample_point(space, &mut trial_rng(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(run_trials(planned, space, reg, evaluator, points))
}

/// Every point of every disjunct, keys varying row-major in sorted order
/// with the last key fastest.
pub fn grid_points(grid: &GridSpace, cap: usize) -> Result<Vec<SearchPoint>> {
    let total = grid.point_count();
    if total > cap {
        return Err(Error::Explosion {
            what: "grid enumeration".into(),
            count: total,
            cap,
        });
    }
    let mut out = Vec::with_capacity(total);
    for g in &grid.disjuncts {
        let mut axes = Vec::with_capacity(g.len());
        for (k, d) in g {
            match d {
                Dimension::Categorical(vs) => axes.push((k, vs)),
                Dimension::Continuous(_) => {
                    return Err(Error::Config(format!("grid dimension `{k}` is continuous")))
                }
            }
        }
        let mut rows = vec![SearchPoint::new()];
        for (k, vs) in axes {
            rows = rows
                .iter()
                .flat_map(|row| {
                    vs.iter().map(move |v| {
                        let mut r = row.clone();
                        r.insert(k.clone(), v.clone());
                        r
                    })
                })
                .collect();
        }
        out.extend(rows);
    }
    Ok(out)
}

/// Evaluates every grid point exactly once.
pub fn grid_search(
    planned: &PipelineExpr,
    grid: &GridSpace,
    reg: &Registry,
    evaluator: &dyn Evaluator,
    cap: usize,
) -> Result<SearchHistory> {
    planned.check(reg)?;
    if evaluator.needs_implementations() {
        check_implementations(planned, reg)?;
    }
    let points = grid_points(grid, cap)?;
    let space = CompiledSpace::Grid(grid.clone());
    Ok(run_trials(planned, &space, reg, evaluator, points))
}

fn run_trials(
    planned: &PipelineExpr,
    space: &CompiledSpace,
    reg: &Registry,
    evaluator: &dyn Evaluator,
    points: Vec<SearchPoint>,
) -> SearchHistory {
    let trials = points
        .into_par_iter()
        .enumerate()
        .map(|(index, point)| {
            let start = Instant::now();
            let outcome = catch_unwind(AssertUnwindSafe(|| {
                let trainable = decode_point(planned, space, &point, reg)?;
                evaluator.evaluate(&trainable, reg)
            }));
            let (loss, error) = match outcome {
                Ok(Ok(loss)) if loss.is_finite() => (loss, None),
                Ok(Ok(loss)) => (WORST, Some(TrialError::new("non_finite", format!("loss is {loss}")))),
                Ok(Err(e)) => (WORST, Some(TrialError::new(error_kind(&e), e.to_string()))),
                Err(panic) => {
                    let message = panic
                        .downcast_ref::<&str>()
                        .map(|s| s.to_string())
                        .or_else(|| panic.downcast_ref::<String>().cloned())
                        .unwrap_or_else(|| "panic".into());
                    (WORST, Some(TrialError::new("panic", message)))
                }
            };
            if let Some(e) = &error {
                log::debug!("trial {index} failed ({}): {}", e.kind, e.message);
            }
            Trial {
                index,
                point,
                loss,
                error,
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    SearchHistory::new(trials)
}
