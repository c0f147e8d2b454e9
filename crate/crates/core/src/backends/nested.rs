use crate::error::Result;
use crate::normalize::{grid_contains, Grid};
use crate::value::{Config, Value};

use super::flat::{product, tag};

/// A search space that mirrors the pipeline: one entry per operand of a
/// sequence/parallel run, a tagged disjunction per choice, and a
/// disjunction of grids per step.
#[derive(Debug, Clone, PartialEq)]
pub enum NestedSpace {
    Steps(Vec<NestedSpace>),
    Choice {
        key: String,
        alternatives: Vec<NestedAlternative>,
    },
    Grids(Vec<Grid>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NestedAlternative {
    pub label: Value,
    pub space: NestedSpace,
}

impl NestedSpace {
    /// The equivalent list of flat grids.
    pub fn flatten(&self) -> Result<Vec<Grid>> {
        match self {
            NestedSpace::Grids(gs) => Ok(gs.clone()),
            NestedSpace::Steps(parts) => {
                let parts = parts.iter().map(NestedSpace::flatten).collect::<Result<Vec<_>>>()?;
                product(parts, usize::MAX)
            }
            NestedSpace::Choice { key, alternatives } => {
                let mut out = Vec::new();
                for alt in alternatives {
                    let mut grids = alt.space.flatten()?;
                    tag(&mut grids, key, &alt.label, true)?;
                    out.extend(grids);
                }
                Ok(out)
            }
        }
    }

    pub fn contains(&self, point: &Config) -> bool {
        self.flatten()
            .map(|gs| gs.iter().any(|g| grid_contains(g, point)))
            .unwrap_or(false)
    }

    /// Number of flat grids this space stands for.
    pub fn count(&self) -> usize {
        match self {
            NestedSpace::Grids(gs) => gs.len(),
            NestedSpace::Steps(parts) => parts.iter().map(NestedSpace::count).product(),
            NestedSpace::Choice { alternatives, .. } => {
                alternatives.iter().map(|a| a.space.count()).sum()
            }
        }
    }
}
