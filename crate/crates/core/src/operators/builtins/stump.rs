use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::value::Config;

use super::{check_width, get_bool, get_f64, get_str, get_usize};

/// Confidence the reduced-error variant fixes, as in J48.
const REDUCED_ERROR_CONFIDENCE: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Split {
    feature: usize,
    threshold: f64,
    left: usize,
    right: usize,
}

/// One-level decision tree with C4.5-style pruning.
///
/// With `pruning` off, the split is kept only if its pessimistic error
/// estimate at `confidence` beats the leaf's. With `pruning` on, a fixed
/// third of the rows (picked by hashing the row index) is held out and
/// the split is kept only if it makes fewer holdout errors than the leaf
/// (reduced-error pruning).
#[derive(Debug, Clone, PartialEq)]
pub struct Stump {
    split: Option<Split>,
    majority: usize,
    n_features: usize,
}

#[derive(Debug, Clone, Copy)]
enum Criterion {
    Gini,
    Entropy,
}

impl Criterion {
    fn impurity(self, counts: &[usize], total: usize) -> f64 {
        if total == 0 {
            return 0.0;
        }
        let t = total as f64;
        match self {
            Criterion::Gini => 1.0 - counts.iter().map(|c| (*c as f64 / t).powi(2)).sum::<f64>(),
            Criterion::Entropy => -counts
                .iter()
                .filter(|c| **c > 0)
                .map(|c| {
                    let p = *c as f64 / t;
                    p * p.log2()
                })
                .sum::<f64>(),
        }
    }
}

impl Stump {
    pub fn fit(config: &Config, x: &DMatrix<f64>, y: &[usize], n_classes: usize) -> Result<Self> {
        let criterion = match get_str(config, "criterion")? {
            "gini" => Criterion::Gini,
            "entropy" => Criterion::Entropy,
            other => return Err(Error::Training(format!("unknown criterion `{other}`"))),
        };
        let pruning = get_bool(config, "pruning")?;
        let confidence = get_f64(config, "confidence")?;
        let min_leaf = get_usize(config, "min_leaf")?.max(1);
        if pruning && confidence != REDUCED_ERROR_CONFIDENCE {
            return Err(Error::Training(format!(
                "reduced-error pruning ignores the confidence, which must stay at \
                 {REDUCED_ERROR_CONFIDENCE}; got {confidence}"
            )));
        }
        if y.is_empty() {
            return Err(Error::Training("stump needs training rows".into()));
        }
        let n_classes = n_classes.max(y.iter().max().map_or(0, |m| m + 1));
        let all: Vec<usize> = (0..y.len()).collect();
        let fallback = majority(y, &all, n_classes);

        let split = if pruning {
            let (hold, grow): (Vec<usize>, Vec<usize>) = all.iter().partition(|i| held_out(**i));
            best_split(x, y, &grow, n_classes, criterion, min_leaf).filter(|s| {
                let leaf_label = majority(y, &grow, n_classes);
                let leaf_errors = hold.iter().filter(|i| y[**i] != leaf_label).count();
                let split_errors = hold
                    .iter()
                    .filter(|i| y[**i] != s.route(x[(**i, s.feature)]))
                    .count();
                split_errors < leaf_errors
            })
        } else {
            best_split(x, y, &all, n_classes, criterion, min_leaf).filter(|s| {
                let z = Normal::new(0.0, 1.0)
                    .expect("standard normal")
                    .inverse_cdf(1.0 - confidence);
                let (l, r): (Vec<usize>, Vec<usize>) =
                    all.iter().partition(|i| x[(**i, s.feature)] <= s.threshold);
                let leaf = pessimistic_errors(errors(y, &all, fallback), all.len(), z);
                let subtree = pessimistic_errors(errors(y, &l, s.left), l.len(), z)
                    + pessimistic_errors(errors(y, &r, s.right), r.len(), z);
                subtree < leaf
            })
        };
        // leaf labels come from all rows, not just the growing set
        let split = split.map(|s| {
            let (l, r): (Vec<usize>, Vec<usize>) =
                all.iter().partition(|i| x[(**i, s.feature)] <= s.threshold);
            Split {
                left: majority(y, &l, n_classes),
                right: majority(y, &r, n_classes),
                ..s
            }
        });
        Ok(Stump {
            split,
            majority: fallback,
            n_features: x.ncols(),
        })
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        check_width(x, self.n_features)?;
        Ok((0..x.nrows())
            .map(|i| match &self.split {
                Some(s) => s.route(x[(i, s.feature)]),
                None => self.majority,
            })
            .collect())
    }

    pub fn is_leaf(&self) -> bool {
        self.split.is_none()
    }
}

impl Split {
    fn route(&self, v: f64) -> usize {
        if v <= self.threshold {
            self.left
        } else {
            self.right
        }
    }
}

fn held_out(row: usize) -> bool {
    ((row as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 32).is_multiple_of(3)
}

fn counts(y: &[usize], rows: &[usize], n_classes: usize) -> Vec<usize> {
    let mut c = vec![0; n_classes];
    for r in rows {
        c[y[*r]] += 1;
    }
    c
}

/// Most frequent label; ties go to the lowest label.
fn majority(y: &[usize], rows: &[usize], n_classes: usize) -> usize {
    let c = counts(y, rows, n_classes);
    let mut best = 0;
    for (i, n) in c.iter().enumerate() {
        if *n > c[best] {
            best = i;
        }
    }
    best
}

fn errors(y: &[usize], rows: &[usize], label: usize) -> usize {
    rows.iter().filter(|r| y[**r] != label).count()
}

/// Upper confidence bound on the error count of a leaf, as in C4.5.
fn pessimistic_errors(e: usize, n: usize, z: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (e, n) = (e as f64, n as f64);
    let f = e / n;
    let z2 = z * z;
    let spread = (f / n - f * f / n + z2 / (4.0 * n * n)).max(0.0).sqrt();
    let u = (f + z2 / (2.0 * n) + z * spread) / (1.0 + z2 / n);
    n * u
}

fn best_split(
    x: &DMatrix<f64>,
    y: &[usize],
    rows: &[usize],
    n_classes: usize,
    criterion: Criterion,
    min_leaf: usize,
) -> Option<Split> {
    let total = counts(y, rows, n_classes);
    let mut best: Option<(f64, Split)> = None;
    for feature in 0..x.ncols() {
        let mut sorted: Vec<usize> = rows.to_vec();
        sorted.sort_by(|a, b| x[(*a, feature)].total_cmp(&x[(*b, feature)]));
        let mut left = vec![0; n_classes];
        for (i, r) in sorted.iter().enumerate().take(sorted.len().saturating_sub(1)) {
            left[y[*r]] += 1;
            let (lo, hi) = (x[(*r, feature)], x[(sorted[i + 1], feature)]);
            let n_left = i + 1;
            let n_right = sorted.len() - n_left;
            if lo == hi || n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right: Vec<usize> = total.iter().zip(&left).map(|(t, l)| t - l).collect();
            let score = (n_left as f64 * criterion.impurity(&left, n_left)
                + n_right as f64 * criterion.impurity(&right, n_right))
                / sorted.len() as f64;
            if best.as_ref().is_none_or(|(b, _)| score < *b) {
                let argmax = |c: &[usize]| {
                    let mut m = 0;
                    for (k, v) in c.iter().enumerate() {
                        if *v > c[m] {
                            m = k;
                        }
                    }
                    m
                };
                best = Some((
                    score,
                    Split {
                        feature,
                        threshold: (lo + hi) / 2.0,
                        left: argmax(&left),
                        right: argmax(&right),
                    },
                ));
            }
        }
    }
    best.map(|(_, s)| s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn config(pruning: bool, confidence: f64, min_leaf: i64) -> Config {
        [
            ("criterion", Value::from("gini")),
            ("pruning", pruning.into()),
            ("confidence", confidence.into()),
            ("min_leaf", Value::Int(min_leaf)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    #[test]
    fn finds_a_clean_threshold() {
        let x = DMatrix::from_row_slice(6, 2, &[0.0, 9.0, 1.0, 3.0, 2.0, 5.0, 10.0, 1.0, 11.0, 8.0, 12.0, 2.0]);
        let y = [0, 0, 0, 1, 1, 1];
        let s = Stump::fit(&config(false, 0.25, 1), &x, &y, 2).unwrap();
        assert_eq!(s.split.unwrap().feature, 0);
        assert_eq!(s.split.unwrap().threshold, 6.0);
        assert_eq!(s.predict(&x).unwrap(), y);
    }

    #[test]
    fn no_informative_split_gives_a_constant_predictor() {
        let x = DMatrix::from_row_slice(4, 1, &[1.0, 1.0, 1.0, 1.0]);
        let s = Stump::fit(&config(false, 0.25, 1), &x, &[0, 1, 0, 1], 2).unwrap();
        assert!(s.is_leaf());
        assert_eq!(s.predict(&x).unwrap(), vec![0; 4]);
    }

    #[test]
    fn min_leaf_blocks_small_splits() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let s = Stump::fit(&config(false, 0.25, 3), &x, &[0, 1, 1, 1], 2).unwrap();
        assert!(s.is_leaf());
    }

    #[test]
    fn pessimistic_estimate_matches_c45() {
        // closed form of the upper bound with zero observed errors
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.75);
        let u = pessimistic_errors(0, 6, z) / 6.0;
        let z2 = z * z;
        let expected = (z2 / 12.0 + z * (z2 / 144.0).sqrt()) / (1.0 + z2 / 6.0);
        assert!((u - expected).abs() < 1e-12);
    }

    #[test]
    fn reduced_error_pruning_keeps_a_useful_split() {
        let ds = crate::dataset::synthetic(90, 4);
        let s = Stump::fit(&config(true, 0.25, 2), &ds.features, &ds.labels, 3).unwrap();
        assert!(!s.is_leaf());
    }
}
