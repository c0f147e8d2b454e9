use std::collections::{BTreeMap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::normalize::{grid_contains, Dimension, Grid};
use crate::schema::{Distribution, NumKind, Range};
use crate::value::{Config, Value};

use super::flat::FlatSpace;
use super::sample::discretize_range;

pub const DEFAULT_CUTS: usize = 3;

/// A flat space whose ranges were replaced by a few sampled values, for
/// exhaustive grid search. `sources` remembers, per disjunct, the range
/// each sampled dimension came from.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    pub disjuncts: Vec<Grid>,
    pub sources: Vec<BTreeMap<String, Range>>,
    pub cuts: usize,
    pub seed: u64,
}

type RangeKey = (String, u64, u64, bool, bool, NumKind, Distribution);

impl GridSpace {
    /// Samples `cuts` values for every range. A range that appears under
    /// the same name in several disjuncts gets the same values in each.
    pub fn discretize(flat: &FlatSpace, cuts: usize, seed: u64) -> Result<GridSpace> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cache: HashMap<RangeKey, Vec<Value>> = HashMap::new();
        let mut disjuncts = Vec::with_capacity(flat.disjuncts.len());
        let mut sources = Vec::with_capacity(flat.disjuncts.len());
        for g in &flat.disjuncts {
            let mut grid = Grid::new();
            let mut from = BTreeMap::new();
            for (k, d) in g {
                let dim = match d {
                    Dimension::Categorical(_) => d.clone(),
                    Dimension::Continuous(r) => {
                        let key = (
                            k.clone(),
                            r.lo.to_bits(),
                            r.hi.to_bits(),
                            r.lo_exclusive,
                            r.hi_exclusive,
                            r.kind,
                            r.distribution,
                        );
                        let values = match cache.get(&key) {
                            Some(vs) => vs.clone(),
                            None => {
                                let vs = discretize_range(r, cuts, &mut rng)?;
                                cache.insert(key, vs.clone());
                                vs
                            }
                        };
                        from.insert(k.clone(), *r);
                        Dimension::Categorical(values)
                    }
                };
                grid.insert(k.clone(), dim);
            }
            disjuncts.push(grid);
            sources.push(from);
        }
        Ok(GridSpace {
            disjuncts,
            sources,
            cuts,
            seed,
        })
    }

    /// Puts the source ranges back, recovering the flat space.
    pub fn erase(&self) -> FlatSpace {
        FlatSpace {
            disjuncts: self
                .disjuncts
                .iter()
                .zip(&self.sources)
                .map(|(g, from)| {
                    g.iter()
                        .map(|(k, d)| {
                            let d = match from.get(k) {
                                Some(r) => Dimension::Continuous(*r),
                                None => d.clone(),
                            };
                            (k.clone(), d)
                        })
                        .collect()
                })
                .collect(),
        }
    }

    pub fn contains(&self, point: &Config) -> bool {
        self.disjuncts.iter().any(|g| grid_contains(g, point))
    }

    /// Number of points an exhaustive search visits.
    pub fn point_count(&self) -> usize {
        self.disjuncts
            .iter()
            .map(|g| {
                g.values()
                    .map(|d| match d {
                        Dimension::Categorical(vs) => vs.len(),
                        Dimension::Continuous(_) => 0,
                    })
                    .product::<usize>()
            })
            .sum()
    }
}
