#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod field;
pub mod fixtures;
pub mod grid;
pub mod hollow;
pub mod io;
pub mod masks;
pub mod mesh;
pub mod metrics;
pub mod objective;
pub mod optimizer;
pub mod pipeline;
pub mod stability;
pub mod voxelize;

pub use error::{Error, Result};
