//! Embedded-boundary exponential time differencing for reaction–diffusion
//! problems on irregular and moving two-dimensional domains.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Grid loops index several parallel arrays by node number.
#![allow(clippy::needless_range_loop)]

pub mod driver;
pub mod ebpoisson;
pub mod error;
pub mod geometry;
pub mod levelset;
pub mod phifun;
pub mod sparse;
pub mod steppers;

pub use error::{Error, Result};
