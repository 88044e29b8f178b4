#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod admm;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod oracle;
pub mod partition;
pub mod prior;
pub mod synth;
pub mod ystep;

pub use error::{Error, Result};
