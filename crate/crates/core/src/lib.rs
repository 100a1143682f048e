// `!(x > 0.0)` is used on purpose throughout so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ecme;
pub mod error;
pub mod ghdist;
pub mod gig;
pub mod harness;
pub mod optimize;
pub mod penalty;
pub mod select;
pub mod special;

pub use error::{Error, Result};
