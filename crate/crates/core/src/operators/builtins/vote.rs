use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::value::Config;

use super::{get_f64, get_str};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TieBreak {
    /// The lowest tied class index.
    Lowest,
    /// The tied class named by the earliest voter.
    First,
}

/// Majority vote over the prediction columns of its inputs.
///
/// If the winning share of votes is below `quorum`, the first voter's
/// prediction is used instead.
#[derive(Debug, Clone, PartialEq)]
pub struct Vote {
    tie_break: TieBreak,
    quorum: f64,
    n_classes: usize,
}

impl Vote {
    pub fn fit(config: &Config, inputs: &[DMatrix<f64>], n_classes: usize) -> Result<Self> {
        let tie_break = match get_str(config, "tie_break")? {
            "lowest" => TieBreak::Lowest,
            "first" => TieBreak::First,
            other => return Err(Error::Training(format!("unknown tie_break `{other}`"))),
        };
        let quorum = get_f64(config, "quorum")?;
        if tie_break == TieBreak::First && quorum > 0.5 {
            return Err(Error::Training(format!(
                "a quorum of {quorum} already falls back to the first voter, \
                 so tie_break `first` needs quorum <= 0.5"
            )));
        }
        voters(inputs)?;
        Ok(Vote {
            tie_break,
            quorum,
            n_classes,
        })
    }

    pub fn predict(&self, inputs: &[DMatrix<f64>]) -> Result<Vec<usize>> {
        let (rows, columns) = voters(inputs)?;
        let mut out = Vec::with_capacity(rows);
        for i in 0..rows {
            let ballot: Vec<usize> = columns
                .iter()
                .map(|c| label(c[i], self.n_classes))
                .collect::<Result<_>>()?;
            let mut tally = vec![0usize; self.n_classes];
            for b in &ballot {
                tally[*b] += 1;
            }
            let top = tally.iter().copied().max().unwrap_or(0);
            let winner = if (top as f64) < self.quorum * ballot.len() as f64 {
                ballot[0]
            } else {
                match self.tie_break {
                    TieBreak::Lowest => tally.iter().position(|t| *t == top).unwrap_or(0),
                    TieBreak::First => *ballot.iter().find(|b| tally[**b] == top).unwrap_or(&0),
                }
            };
            out.push(winner);
        }
        Ok(out)
    }
}

fn label(v: f64, n_classes: usize) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && (v as usize) < n_classes {
        Ok(v as usize)
    } else {
        Err(Error::Training(format!("vote input {v} is not a class index")))
    }
}

fn voters(inputs: &[DMatrix<f64>]) -> Result<(usize, Vec<Vec<f64>>)> {
    let Some(first) = inputs.first() else {
        return Err(Error::Training("Vote needs at least one input".into()));
    };
    let rows = first.nrows();
    let mut columns = Vec::new();
    for m in inputs {
        if m.nrows() != rows {
            return Err(Error::Training("Vote inputs have different row counts".into()));
        }
        columns.extend(m.column_iter().map(|c| c.iter().copied().collect::<Vec<_>>()));
    }
    if columns.is_empty() {
        return Err(Error::Training("Vote inputs have no columns".into()));
    }
    Ok((rows, columns))
}
