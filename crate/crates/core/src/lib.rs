//! Streaming interval selection and independent-set size estimation.
//!
//! Intervals arrive one at a time. The crate provides
//!
//! - [`selector`]: a one-pass 2-approximation for the maximum set of pairwise
//!   disjoint intervals, using space proportional to the optimum;
//! - [`samelen`]: a one-pass 3/2-approximation when all intervals share a
//!   length;
//! - [`estimator`] and [`samelen_estimator`]: randomized estimators of the
//!   optimum's *size* in polylogarithmic space;
//! - [`oracle`]: exact offline answers used to check all of the above;
//! - [`hashing`]: k-wise independent hashing, min-wise permutations and
//!   distinct counters;
//! - [`harness`]: instance generators (including lower-bound constructions),
//!   trial running and the command-line surface.
//!
//! The `examples/` directory has one runnable program per capability.

pub mod cli;
pub mod error;
pub mod estimator;
pub mod harness;
pub mod hashing;
pub mod model;
pub mod oracle;
pub mod samelen;
pub mod samelen_estimator;
pub mod selector;

pub use error::{Error, Result};
pub use model::{format_stream, parse_stream, Instance, Interval, Window};
