use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::value::Config;

use super::{check_width, get_bool, get_usize};

const MIN_WHITEN_ITERS: usize = 20;

/// Principal-component projection found by power iteration with deflation.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub mean: DVector<f64>,
    /// One component per column.
    pub components: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    pub whiten: bool,
}

impl Projector {
    pub fn fit(config: &Config, x: &DMatrix<f64>, seed: u64) -> Result<Self> {
        let whiten = get_bool(config, "whiten")?;
        let iters = get_usize(config, "power_iters")?;
        if whiten && iters < MIN_WHITEN_ITERS {
            return Err(Error::Training(format!(
                "whitening divides by eigenvalue estimates and needs at least \
                 {MIN_WHITEN_ITERS} power iterations, got {iters}"
            )));
        }
        let d = x.ncols();
        if d == 0 || x.nrows() < 2 {
            return Err(Error::Training("projector needs at least 2 rows and 1 column".into()));
        }
        let k = get_usize(config, "n_components")?.min(d);
        let n = x.nrows() as f64;
        let mean = DVector::from_iterator(d, x.column_iter().map(|c| c.sum() / n));
        let mut centred = x.clone();
        for (j, mut col) in centred.column_iter_mut().enumerate() {
            col.add_scalar_mut(-mean[j]);
        }
        let mut cov = centred.transpose() * &centred / (n - 1.0);

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut components = DMatrix::zeros(d, k);
        let mut eigenvalues = Vec::with_capacity(k);
        for c in 0..k {
            let mut v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
            normalize(&mut v);
            for _ in 0..iters {
                let mut next = &cov * &v;
                if next.norm() < 1e-300 {
                    break;
                }
                normalize(&mut next);
                v = next;
            }
            // fix the sign so the largest entry is positive
            let pivot = v.iamax();
            if v[pivot] < 0.0 {
                v.neg_mut();
            }
            let lambda = (v.transpose() * &cov * &v)[(0, 0)].max(0.0);
            cov -= lambda * &v * v.transpose();
            components.set_column(c, &v);
            eigenvalues.push(lambda);
        }
        Ok(Projector {
            mean,
            components,
            eigenvalues,
            whiten,
        })
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_width(x, self.mean.len())?;
        let mut centred = x.clone();
        for (j, mut col) in centred.column_iter_mut().enumerate() {
            col.add_scalar_mut(-self.mean[j]);
        }
        let mut out = centred * &self.components;
        if self.whiten {
            for (j, mut col) in out.column_iter_mut().enumerate() {
                col /= (self.eigenvalues[j] + 1e-12).sqrt();
            }
        }
        Ok(out)
    }
}

fn normalize(v: &mut DVector<f64>) {
    let n = v.norm();
    if n > 0.0 {
        *v /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Value;

    fn config(k: i64, whiten: bool, iters: i64) -> Config {
        [
            ("n_components", Value::Int(k)),
            ("whiten", Value::Bool(whiten)),
            ("power_iters", Value::Int(iters)),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    #[test]
    fn finds_the_dominant_axis() {
        // points spread along (1, 1), mirrored across that axis
        let rows: Vec<f64> = (0..10)
            .flat_map(|i| {
                let t = i as f64 - 5.0;
                [t + 0.1, t - 0.1, t - 0.1, t + 0.1]
            })
            .collect();
        let x = DMatrix::from_row_slice(20, 2, &rows);
        let p = Projector::fit(&config(1, false, 100), &x, 3).unwrap();
        let v = p.components.column(0);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - s).abs() < 1e-6 && (v[1] - s).abs() < 1e-6, "{v}");
    }

    #[test]
    fn whitened_output_has_unit_variance() {
        let x = DMatrix::from_row_slice(
            6,
            2,
            &[1.0, 0.0, 2.0, 1.0, 3.0, 1.5, 4.0, 3.5, 5.0, 4.0, 6.0, 6.5],
        );
        let p = Projector::fit(&config(2, true, 100), &x, 1).unwrap();
        let z = p.transform(&x).unwrap();
        for col in z.column_iter() {
            let var = col.iter().map(|v| v * v).sum::<f64>() / 5.0;
            assert!((var - 1.0).abs() < 1e-6, "{var}");
        }
    }

    #[test]
    fn components_are_capped_by_width() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 1.0, 0.0, 5.0]);
        let p = Projector::fit(&config(4, false, 50), &x, 0).unwrap();
        assert_eq!(p.components.ncols(), 2);
    }
}
