//! Stratified k-fold cross-validation of a trainable pipeline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::operators::Registry;
use crate::pipeline::{fit, predict, PipelineExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    /// Loss is the negated accuracy.
    Accuracy,
    /// Loss is the fraction of misclassified rows.
    #[default]
    ErrorRate,
}

impl Metric {
    pub fn loss(self, predicted: &[usize], truth: &[usize]) -> f64 {
        let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
        let accuracy = correct as f64 / truth.len().max(1) as f64;
        match self {
            Metric::Accuracy => -accuracy,
            Metric::ErrorRate => 1.0 - accuracy,
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "accuracy" => Ok(Metric::Accuracy),
            "error-rate" | "error_rate" => Ok(Metric::ErrorRate),
            other => Err(Error::Config(format!("unknown metric `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Objective {
    pub data: Dataset,
    pub metric: Metric,
    pub folds: usize,
    pub seed: u64,
}

impl Objective {
    pub fn new(data: Dataset, metric: Metric, folds: usize, seed: u64) -> Result<Self> {
        if folds < 2 || folds > data.n_rows() {
            return Err(Error::Config(format!(
                "folds must be between 2 and the number of rows ({}), got {folds}",
                data.n_rows()
            )));
        }
        Ok(Objective {
            data,
            metric,
            folds,
            seed,
        })
    }
}

/// Test-row indices of each fold. Rows of each class are shuffled, then
/// classes are dealt round-robin onto the folds in turn, so any remainder
/// lands on the first folds.
pub fn stratified_folds(labels: &[usize], folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for c in 0..n_classes {
        let mut rows: Vec<usize> = (0..labels.len()).filter(|i| labels[*i] == c).collect();
        rows.shuffle(&mut rng);
        for r in rows {
            out[next % folds].push(r);
            next += 1;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    out
}

/// Mean per-fold loss. Training errors are returned, not absorbed.
pub fn cross_validate(trainable: &PipelineExpr, objective: &Objective, reg: &Registry) -> Result<f64> {
    let data = &objective.data;
    let folds = stratified_folds(&data.labels, objective.folds, objective.seed);
    let mut in_test = vec![usize::MAX; data.n_rows()];
    for (f, rows) in folds.iter().enumerate() {
        for r in rows {
            in_test[*r] = f;
        }
    }
    let mut total = 0.0;
    for (f, test_rows) in folds.iter().enumerate() {
        let train_rows: Vec<usize> = (0..data.n_rows()).filter(|r| in_test[*r] != f).collect();
        let train = data.subset(&train_rows);
        let test = data.subset(test_rows);
        let trained = fit(trainable, &train, reg, objective.seed.wrapping_add(f as u64))?;
        let predicted = predict(&trained, &test.features)?;
        total += objective.metric.loss(&predicted, &test.labels);
    }
    Ok(total / folds.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::op;
    use crate::value::{Config, Value};
    use nalgebra::DMatrix;

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<usize> = (0..23).map(|i| usize::from(i % 3 == 0)).collect();
        let folds = stratified_folds(&labels, 5, 1);
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![5, 5, 5, 4, 4]);
        for f in &folds {
            let ones = f.iter().filter(|r| labels[**r] == 1).count();
            assert!((1..=2).contains(&ones), "{f:?}");
        }
        assert_eq!(folds, stratified_folds(&labels, 5, 1));
    }

    #[test]
    fn constant_predictor_on_balanced_data_scores_one_half() {
        let reg = Registry::builtins();
        let x = DMatrix::from_element(40, 1, 1.0);
        let labels: Vec<usize> = (0..40).map(|i| i % 2).collect();
        let data = Dataset::new(x, labels, vec!["a".into(), "b".into()]).unwrap();
        let obj = Objective::new(data, Metric::ErrorRate, 4, 0).unwrap();
        let stump = op("Stump").configure_all(&reg).unwrap();
        let loss = cross_validate(&stump, &obj, &reg).unwrap();
        assert!((loss - 0.5).abs() < 1e-12, "{loss}");
    }

    #[test]
    fn leave_one_out_with_duplicates_is_perfect() {
        let reg = Registry::builtins();
        let base = crate::dataset::synthetic(15, 2);
        let rows: Vec<usize> = (0..15).flat_map(|i| [i, i]).collect();
        let data = base.subset(&rows);
        let obj = Objective::new(data, Metric::ErrorRate, 30, 0).unwrap();
        let k1: Config = [("k".to_string(), Value::Int(1))].into();
        let knn = op("KNN").configure(&reg, &[("KNN".into(), k1)].into()).unwrap();
        assert_eq!(cross_validate(&knn, &obj, &reg).unwrap(), 0.0);
    }

    #[test]
    fn same_seed_same_loss() {
        let reg = Registry::builtins();
        let obj = Objective::new(crate::dataset::synthetic(60, 0), Metric::Accuracy, 5, 3).unwrap();
        let p = (op("Scaler") >> op("LogReg")).configure_all(&reg).unwrap();
        let a = cross_validate(&p, &obj, &reg).unwrap();
        let b = cross_validate(&p, &obj, &reg).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a < -0.5);
    }

    #[test]
    fn fold_count_is_checked() {
        let data = crate::dataset::synthetic(5, 0);
        assert!(Objective::new(data.clone(), Metric::ErrorRate, 1, 0).is_err());
        assert!(Objective::new(data, Metric::ErrorRate, 6, 0).is_err());
    }
}
