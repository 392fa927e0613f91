//! Polyrigid and polyaffine transformations on dense grids, with two
//! exponential-map backends: Padé scaling-and-squaring and a closed-form
//! eigendecomposition of homogeneous 4×4 matrices.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod backend;
pub mod bench;
pub mod eigen4;
pub mod error;
pub mod field;
pub mod linalg;
pub mod polyrigid;
pub mod se3;
pub mod synth;
pub mod transform_json;

pub use backend::Backend;
pub use error::{Error, Result};
pub use linalg::{CMat4, Mat4};
