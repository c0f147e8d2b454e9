use crate::error::{Error, Result};
use crate::normalize::{grid_contains, Dimension, Grid};
use crate::value::{Config, Value};

/// A disjunction of flat grids over mangled names, as consumed by
/// optimizers that take a list of independent configuration spaces.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatSpace {
    pub disjuncts: Vec<Grid>,
}

impl FlatSpace {
    pub fn is_empty(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn contains(&self, point: &Config) -> bool {
        self.disjuncts.iter().any(|g| grid_contains(g, point))
    }

    pub fn is_categorical(&self) -> bool {
        self.disjuncts
            .iter()
            .all(|g| g.values().all(Dimension::is_categorical))
    }
}

pub(crate) fn check_cap(what: &str, count: usize, cap: usize) -> Result<()> {
    if count > cap {
        return Err(Error::Explosion {
            what: what.to_string(),
            count,
            cap,
        });
    }
    Ok(())
}

/// Every combination of one grid per part, merged.
pub(crate) fn product(parts: Vec<Vec<Grid>>, cap: usize) -> Result<Vec<Grid>> {
    let count = parts
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.len()))
        .unwrap_or(usize::MAX);
    check_cap("combining pipeline steps", count, cap)?;
    let mut acc = vec![Grid::new()];
    for part in parts {
        let mut next = Vec::with_capacity(acc.len() * part.len());
        for g in &acc {
            for h in &part {
                next.push(merge(g, h)?);
            }
        }
        acc = next;
    }
    Ok(acc)
}

pub(crate) fn merge(a: &Grid, b: &Grid) -> Result<Grid> {
    let mut out = a.clone();
    for (k, d) in b {
        if out.insert(k.clone(), d.clone()).is_some() {
            return Err(Error::NameCollision(k.clone()));
        }
    }
    Ok(out)
}

/// Adds a single-valued discriminant dimension to every grid.
pub(crate) fn tag(grids: &mut [Grid], key: &str, label: &Value, overwrite: bool) -> Result<()> {
    for g in grids {
        let dim = Dimension::Categorical(vec![label.clone()]);
        if g.contains_key(key) && !overwrite {
            return Err(Error::NameCollision(key.to_string()));
        }
        g.insert(key.to_string(), dim);
    }
    Ok(())
}
