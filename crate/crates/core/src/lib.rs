//! Compiles typed hyperparameter schemas and pipeline expressions into
//! search spaces for several optimizer styles, and maps points of those
//! spaces back to runnable pipelines.
//!
//! ```
//! use sscomp::operators::Registry;
//! use sscomp::pipeline::op;
//! use sscomp::backends::compile_flat;
//!
//! let reg = Registry::paper();
//! let p = op("PCA") >> (op("J48") | op("LR"));
//! let space = compile_flat(&p, &reg).unwrap();
//! assert_eq!(space.disjuncts.len(), 8);
//! ```

pub mod backends;
pub mod dataset;
pub mod decode;
pub mod error;
pub mod normalize;
pub mod operators;
pub mod pipeline;
pub mod schema;
pub mod search;
pub mod value;

pub use error::{Error, Result};
