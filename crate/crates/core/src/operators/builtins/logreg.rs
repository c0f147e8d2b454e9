use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::value::Config;

use super::{argmax, check_width, get_f64, get_str, get_usize};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Solver {
    Gd,
    Sgd,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Penalty {
    L1,
    L2,
}

/// Regularized logistic regression; one-vs-rest beyond two classes.
///
/// Minimizes `mean(logloss) + R(w) / (C n)` where `R` is `|w|_1` or
/// `|w|^2 / 2` over the non-intercept weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LogReg {
    /// Weight vectors with the intercept last. One for a binary problem,
    /// otherwise one per class.
    weights: Vec<DVector<f64>>,
    n_features: usize,
}

struct Problem<'a> {
    x: &'a DMatrix<f64>,
    t: Vec<f64>,
    alpha: f64,
    penalty: Penalty,
}

impl LogReg {
    pub fn fit(
        config: &Config,
        x: &DMatrix<f64>,
        y: &[usize],
        n_classes: usize,
        seed: u64,
    ) -> Result<Self> {
        let solver = match get_str(config, "solver")? {
            "gd" => Solver::Gd,
            "sgd" => Solver::Sgd,
            "newton" => Solver::Newton,
            other => return Err(Error::Training(format!("unknown solver `{other}`"))),
        };
        let penalty = match get_str(config, "penalty")? {
            "l1" => Penalty::L1,
            "l2" => Penalty::L2,
            other => return Err(Error::Training(format!("unknown penalty `{other}`"))),
        };
        if solver == Solver::Newton && penalty == Penalty::L1 {
            return Err(Error::Training(
                "the newton solver needs a twice-differentiable penalty; l1 is not".into(),
            ));
        }
        let c = get_f64(config, "C")?;
        let max_iter = get_usize(config, "max_iter")?;
        if x.nrows() == 0 {
            return Err(Error::Training("logistic regression needs training rows".into()));
        }
        let n = x.nrows();
        let d = x.ncols();
        let xt = DMatrix::from_fn(n, d + 1, |i, j| if j < d { x[(i, j)] } else { 1.0 });
        let alpha = 1.0 / (c * n as f64);
        let n_classes = n_classes.max(y.iter().max().map_or(0, |m| m + 1));
        let targets: Vec<usize> = if n_classes <= 2 { vec![1] } else { (0..n_classes).collect() };
        let mut weights = Vec::with_capacity(targets.len());
        for (m, positive) in targets.into_iter().enumerate() {
            let p = Problem {
                x: &xt,
                t: y.iter().map(|l| f64::from(u8::from(*l == positive))).collect(),
                alpha,
                penalty,
            };
            let w = match solver {
                Solver::Gd => p.gradient_descent(max_iter),
                Solver::Sgd => p.stochastic(max_iter, seed.wrapping_add(m as u64)),
                Solver::Newton => p.newton(max_iter)?,
            };
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Training("logistic regression diverged".into()));
            }
            weights.push(w);
        }
        Ok(LogReg {
            weights,
            n_features: d,
        })
    }

    fn score(&self, w: &DVector<f64>, row: &[f64]) -> f64 {
        row.iter().zip(w.iter()).map(|(a, b)| a * b).sum::<f64>() + w[self.n_features]
    }

    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<usize>> {
        check_width(x, self.n_features)?;
        Ok((0..x.nrows())
            .map(|i| {
                let row: Vec<f64> = x.row(i).iter().copied().collect();
                if let [w] = self.weights.as_slice() {
                    usize::from(self.score(w, &row) >= 0.0)
                } else {
                    let scores: Vec<f64> = self.weights.iter().map(|w| self.score(w, &row)).collect();
                    argmax(&scores)
                }
            })
            .collect())
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    v.signum() * (v.abs() - t).max(0.0)
}

impl Problem<'_> {
    fn dim(&self) -> usize {
        self.x.ncols()
    }

    fn penalized(&self, j: usize) -> bool {
        j + 1 < self.dim()
    }

    /// Gradient of the mean log loss plus the smooth part of the penalty.
    fn gradient(&self, w: &DVector<f64>) -> DVector<f64> {
        let z = self.x * w;
        let resid = DVector::from_fn(z.len(), |i, _| sigmoid(z[i]) - self.t[i]);
        let mut g = self.x.transpose() * resid / self.t.len() as f64;
        if self.penalty == Penalty::L2 {
            for j in 0..self.dim() {
                if self.penalized(j) {
                    g[j] += self.alpha * w[j];
                }
            }
        }
        g
    }

    fn prox(&self, w: &mut DVector<f64>, step: f64) {
        if self.penalty == Penalty::L1 {
            for j in 0..self.dim() {
                if self.penalized(j) {
                    w[j] = soft_threshold(w[j], step * self.alpha);
                }
            }
        }
    }

    fn lipschitz(&self) -> f64 {
        let max_sq = self
            .x
            .row_iter()
            .map(|r| r.norm_squared())
            .fold(0.0, f64::max);
        let smooth = if self.penalty == Penalty::L2 { self.alpha } else { 0.0 };
        0.25 * max_sq + smooth
    }

    fn gradient_descent(&self, iters: usize) -> DVector<f64> {
        let step = 1.0 / self.lipschitz();
        let mut w = DVector::zeros(self.dim());
        for _ in 0..iters {
            let g = self.gradient(&w);
            w -= step * g;
            self.prox(&mut w, step);
        }
        w
    }

    fn stochastic(&self, epochs: usize, seed: u64) -> DVector<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = 1.0 / self.lipschitz();
        let mut order: Vec<usize> = (0..self.t.len()).collect();
        let mut w = DVector::zeros(self.dim());
        for epoch in 0..epochs {
            order.shuffle(&mut rng);
            let step = base / (1.0 + 0.1 * epoch as f64);
            for &i in &order {
                let row = self.x.row(i);
                let err = sigmoid((row * &w)[(0, 0)]) - self.t[i];
                for j in 0..self.dim() {
                    let mut g = err * row[j];
                    if self.penalty == Penalty::L2 && self.penalized(j) {
                        g += self.alpha * w[j];
                    }
                    w[j] -= step * g;
                }
                self.prox(&mut w, step);
            }
        }
        w
    }

    /// Iteratively reweighted least squares.
    fn newton(&self, iters: usize) -> Result<DVector<f64>> {
        let n = self.t.len() as f64;
        let mut w = DVector::zeros(self.dim());
        for _ in 0..iters {
            let z = self.x * &w;
            let mut weighted = self.x.clone();
            for (i, mut row) in weighted.row_iter_mut().enumerate() {
                let p = sigmoid(z[i]);
                row *= p * (1.0 - p) / n;
            }
            let mut h = self.x.transpose() * weighted;
            for j in 0..self.dim() {
                h[(j, j)] += if self.penalized(j) { self.alpha } else { 1e-10 };
            }
            let g = self.gradient(&w);
            let step = h
                .cholesky()
                .ok_or_else(|| Error::Training("Hessian is not positive definite".into()))?
                .solve(&g);
            w -= &step;
            if step.amax() < 1e-10 {
                break;
            }
        }
        Ok(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn config(solver: &str, penalty: &str, c: f64, iters: i64) -> Config {
        [
            ("solver", Value::from(solver)),
            ("penalty", penalty.into()),
            ("C", c.into()),
            ("max_iter", Value::Int(iters)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    /// Two classes split by the line x0 + x1 = 1 with a margin.
    fn separable() -> (DMatrix<f64>, Vec<usize>) {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            for j in 0..10 {
                let (a, b) = (i as f64 / 9.0, j as f64 / 9.0);
                let s = a + b - 1.0;
                if s.abs() < 0.15 {
                    continue;
                }
                rows.extend([a, b]);
                y.push(usize::from(s > 0.0));
            }
        }
        (DMatrix::from_row_slice(y.len(), 2, &rows), y)
    }

    #[test]
    fn every_solver_separates_a_separable_set() {
        let (x, y) = separable();
        for (solver, penalty) in [("gd", "l2"), ("gd", "l1"), ("sgd", "l2"), ("sgd", "l1"), ("newton", "l2")] {
            let m = LogReg::fit(&config(solver, penalty, 1000.0, 300), &x, &y, 2, 0).unwrap();
            let pred = m.predict(&x).unwrap();
            let acc = pred.iter().zip(&y).filter(|(a, b)| a == b).count() as f64 / y.len() as f64;
            assert!(acc >= 0.95, "{solver}/{penalty}: {acc}");
        }
    }

    #[test]
    fn strong_l1_zeroes_the_weights() {
        let (x, y) = separable();
        let m = LogReg::fit(&config("gd", "l1", 0.001, 200), &x, &y, 2, 0).unwrap();
        let w = &m.weights[0];
        assert_eq!(w[0], 0.0);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn multiclass_uses_one_model_per_class() {
        let ds = crate::dataset::synthetic(60, 2);
        let m = LogReg::fit(&config("newton", "l2", 1.0, 50), &ds.features, &ds.labels, 3, 0).unwrap();
        assert_eq!(m.weights.len(), 3);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert_eq!(sigmoid(1000.0), 1.0);
        assert!((sigmoid(0.0) - 0.5).abs() < 1e-15);
    }
}
