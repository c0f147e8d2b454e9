use rand::Rng;

use crate::backends::{sample_grid, CompiledSpace, NestedSpace, SearchPoint};
use crate::error::{Error, Result};
use crate::normalize::Grid;

/// Draws one point. Flat and grid spaces pick a disjunct uniformly; nested
/// spaces pick each choice alternative uniformly, then a grid uniformly.
/// Within a grid, categoricals are uniform and ranges follow their
/// distribution.
pub fn sample_point<R: Rng + ?Sized>(space: &CompiledSpace, rng: &mut R) -> Result<SearchPoint> {
    match space {
        CompiledSpace::Flat(f) => pick(&f.disjuncts, rng),
        CompiledSpace::Grid(g) => pick(&g.disjuncts, rng),
        CompiledSpace::Nested(n) => {
            let mut point = SearchPoint::new();
            sample_nested(n, rng, &mut point)?;
            Ok(point)
        }
    }
}

fn pick<R: Rng + ?Sized>(grids: &[Grid], rng: &mut R) -> Result<SearchPoint> {
    if grids.is_empty() {
        return Err(Error::EmptySpace);
    }
    sample_grid(&grids[rng.gen_range(0..grids.len())], rng)
}

fn sample_nested<R: Rng + ?Sized>(n: &NestedSpace, rng: &mut R, point: &mut SearchPoint) -> Result<()> {
    match n {
        NestedSpace::Grids(gs) => {
            point.extend(pick(gs, rng)?);
            Ok(())
        }
        NestedSpace::Steps(parts) => parts.iter().try_for_each(|p| sample_nested(p, rng, point)),
        NestedSpace::Choice { key, alternatives } => {
            if alternatives.is_empty() {
                return Err(Error::EmptySpace);
            }
            let alt = &alternatives[rng.gen_range(0..alternatives.len())];
            point.insert(key.clone(), alt.label.clone());
            sample_nested(&alt.space, rng, point)
        }
    }
}
