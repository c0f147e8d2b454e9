use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::value::Config;

use super::{check_width, get_bool};

/// Per-column standardization.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Scaler {
    pub fn fit(config: &Config, x: &DMatrix<f64>) -> Result<Self> {
        let with_mean = get_bool(config, "with_mean")?;
        let with_std = get_bool(config, "with_std")?;
        if !with_mean && !with_std {
            return Err(Error::Training(
                "with_mean and with_std are both false, so the scaler would do nothing".into(),
            ));
        }
        let n = x.nrows().max(1) as f64;
        let mut mean = Vec::with_capacity(x.ncols());
        let mut scale = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let m = col.sum() / n;
            let var = col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            let sd = var.sqrt();
            mean.push(if with_mean { m } else { 0.0 });
            scale.push(if with_std && sd > 0.0 { sd } else { 1.0 });
        }
        Ok(Scaler { mean, scale })
    }

    pub fn transform(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        check_width(x, self.mean.len())?;
        Ok(DMatrix::from_fn(x.nrows(), x.ncols(), |i, j| {
            (x[(i, j)] - self.mean[j]) / self.scale[j]
        }))
    }
}
