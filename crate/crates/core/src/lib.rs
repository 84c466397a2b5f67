#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branching;
pub mod cli;
pub mod error;
pub mod info;
pub mod numfmt;
pub mod observers;
pub mod quantum;
pub mod random;
pub mod report;
pub mod scenarios;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
