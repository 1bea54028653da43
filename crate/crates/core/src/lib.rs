#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod driver;
pub mod error;
pub mod io;
pub mod model;
pub mod multigrid;
pub mod oracle;
pub mod residual;
pub mod rk;
pub mod sparse;
pub mod state;

pub use error::{Error, Result};
