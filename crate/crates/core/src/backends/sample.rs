//! Drawing values from dimensions.

use rand::Rng;

use crate::error::{Error, Result};
use crate::normalize::{Dimension, Grid};
use crate::schema::{Distribution, NumKind, Range};
use crate::value::{Config, Value};

const MAX_REJECTIONS: usize = 1000;

/// One value from a range, following its distribution. Values on an
/// exclusive bound are redrawn.
pub fn sample_range<R: Rng + ?Sized>(r: &Range, rng: &mut R) -> Result<Value> {
    if !r.is_bounded() {
        return Err(Error::Config(format!("cannot sample from the unbounded range {r}")));
    }
    match r.kind {
        NumKind::Integer => {
            let (a, b) = r
                .integer_bounds()
                .ok_or_else(|| Error::Config(format!("range {r} has no integers")))?;
            let x = match r.distribution {
                Distribution::Uniform => rng.gen_range(a..=b),
                Distribution::LogUniform => {
                    let (la, lb) = ((a as f64).ln(), (b as f64).ln());
                    (rng.gen_range(la..=lb).exp().round() as i64).clamp(a, b)
                }
            };
            Ok(Value::Int(x))
        }
        NumKind::Real => {
            if r.lo == r.hi {
                return Ok(Value::Real(r.lo));
            }
            for _ in 0..MAX_REJECTIONS {
                let x = match r.distribution {
                    Distribution::Uniform => rng.gen_range(r.lo..=r.hi),
                    Distribution::LogUniform => rng.gen_range(r.lo.ln()..=r.hi.ln()).exp(),
                };
                if r.contains_f64(x) {
                    return Ok(Value::Real(x));
                }
            }
            Ok(Value::Real(r.lo + (r.hi - r.lo) / 2.0))
        }
    }
}

pub fn sample_dimension<R: Rng + ?Sized>(d: &Dimension, rng: &mut R) -> Result<Value> {
    match d {
        Dimension::Categorical(vs) => {
            if vs.is_empty() {
                return Err(Error::EmptySpace);
            }
            Ok(vs[rng.gen_range(0..vs.len())].clone())
        }
        Dimension::Continuous(r) => sample_range(r, rng),
    }
}

/// One value per dimension, drawn in key order.
pub fn sample_grid<R: Rng + ?Sized>(g: &Grid, rng: &mut R) -> Result<Config> {
    g.iter()
        .map(|(k, d)| Ok((k.clone(), sample_dimension(d, rng)?)))
        .collect()
}

/// `cuts` distinct values from a range, sorted. Integer ranges with no
/// more than `cuts` members give all of them.
pub(crate) fn discretize_range<R: Rng + ?Sized>(r: &Range, cuts: usize, rng: &mut R) -> Result<Vec<Value>> {
    if !r.is_bounded() {
        return Err(Error::Config(format!("cannot discretize the unbounded range {r}")));
    }
    if r.kind == NumKind::Integer {
        let (a, b) = r
            .integer_bounds()
            .ok_or_else(|| Error::Config(format!("range {r} has no integers")))?;
        let width = (b - a + 1) as usize;
        if width <= cuts {
            if width < cuts {
                log::warn!("degenerate range {r}: {width} integers for {cuts} cuts, using all of them");
            }
            return Ok((a..=b).map(Value::Int).collect());
        }
    } else if r.lo == r.hi {
        log::warn!("degenerate range {r}: a single point for {cuts} cuts");
        return Ok(vec![Value::Real(r.lo)]);
    }
    let mut out: Vec<Value> = Vec::with_capacity(cuts);
    let mut attempts = 0;
    while out.len() < cuts && attempts < MAX_REJECTIONS * cuts {
        attempts += 1;
        let v = sample_range(r, rng)?;
        if !out.contains(&v) {
            out.push(v);
        }
    }
    if out.len() < cuts {
        if let Some((a, b)) = r.integer_bounds() {
            // fill deterministically from the low end
            for i in a..=b {
                if out.len() == cuts {
                    break;
                }
                if !out.contains(&Value::Int(i)) {
                    out.push(Value::Int(i));
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn open_bounds_are_never_hit() {
        let r = Range::open(0.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            let x = sample_range(&r, &mut rng).unwrap().as_f64().unwrap();
            assert!(x > 0.0 && x < 1.0);
        }
    }

    #[test]
    fn integer_ranges_give_integers() {
        let r = Range::integer(1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [false; 3];
        for _ in 0..200 {
            let Value::Int(x) = sample_range(&r, &mut rng).unwrap() else { panic!() };
            seen[(x - 1) as usize] = true;
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn unbounded_ranges_are_refused() {
        let r = Range::closed(0.0, f64::INFINITY).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_range(&r, &mut rng).is_err());
    }

    #[test]
    fn discretized_values_are_distinct_and_sorted() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = Range::integer(1, 100).unwrap();
        let vs = discretize_range(&r, 5, &mut rng).unwrap();
        assert_eq!(vs.len(), 5);
        assert!(vs.windows(2).all(|w| w[0] < w[1]));
        let small = Range::integer(1, 2).unwrap();
        assert_eq!(discretize_range(&small, 3, &mut rng).unwrap(), vec![Value::Int(1), Value::Int(2)]);
    }
}
