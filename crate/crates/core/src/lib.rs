// `!(x <= bound)` is used on purpose so NaN counts as a violation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cones;
pub mod covering;
pub mod error;
pub mod harness;
pub mod liegroups;
pub mod matrix;
pub mod polar;
pub mod rng;
pub mod sqrtm;

pub use error::{Error, Result};
