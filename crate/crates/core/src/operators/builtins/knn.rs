use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::value::Config;

use super::{argmax, check_width, get_str, get_usize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    Manhattan,
    Cosine,
}

/// k-nearest-neighbour classifier by exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    x: DMatrix<f64>,
    y: Vec<usize>,
    n_classes: usize,
    k: usize,
    distance_weighted: bool,
    metric: Metric,
}

impl Knn {
    pub fn fit(config: &Config, x: &DMatrix<f64>, y: &[usize], n_classes: usize) -> Result<Self> {
        let metric = match get_str(config, "metric")? {
            "euclidean" => Metric::Euclidean,
            "manhattan" => Metric::Manhattan,
            "cosine" => Metric::Cosine,
            other => return Err(Error::Training(format!("unknown metric `{other}`"))),
        };
        let algorithm = get_str(config, "algorithm")?;
        if algorithm == "kd_tree" && metric == Metric::Cosine {
            return Err(Error::Training(
                "kd_tree needs a coordinate-wise metric; cosine is not one".into(),
            ));
        }
        if x.nrows() == 0 {
            return Err(Error::Training("kNN needs at least one training row".into()));
        }
        Ok(Knn {
            x: x.clone(),
            y: y.to_vec(),
            n_classes: n_classes.max(y.iter().max().map_or(0, |m| m + 1)),
            k: get_usize(config, "k")?.max(1),
            distance_weighted: get_str(config, "weights")? == "distance",
            metric,
        })
    }

    fn distance(&self, a: &[f64], train_row: usize) -> f64 {
        let b = self.x.row(train_row);
        match self.metric {
            Metric::Euclidean => a
                .iter()
                .zip(b.iter())
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b.iter()).map(|(p, q)| (p - q).abs()).sum(),
            Metric::Cosine => {
                let dot: f64 = a.iter().zip(b.iter()).map(|(p, q)| p * q).sum();
                let na = a.iter().map(|p| p * p).sum::<f64>().sqrt();
                let nb = b.norm();
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - dot / (na * nb)
                }
            }
        }
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        check_width(x, self.x.ncols())?;
        let k = self.k.min(self.y.len());
        let mut out = Vec::with_capacity(x.nrows());
        let mut dists: Vec<(f64, usize)> = Vec::with_capacity(self.y.len());
        for i in 0..x.nrows() {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            dists.clear();
            dists.extend((0..self.y.len()).map(|j| (self.distance(&row, j), j)));
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let nearest = &dists[..k];
            let mut votes = vec![0.0; self.n_classes];
            if self.distance_weighted && nearest.iter().any(|(d, _)| *d == 0.0) {
                // exact matches dominate any weighted vote
                for (_, j) in nearest.iter().filter(|(d, _)| *d == 0.0) {
                    votes[self.y[*j]] += 1.0;
                }
            } else {
                for (d, j) in nearest {
                    votes[self.y[*j]] += if self.distance_weighted { 1.0 / d } else { 1.0 };
                }
            }
            out.push(argmax(&votes));
        }
        Ok(out)
    }
}
