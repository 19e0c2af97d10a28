// `!(x > 0.0)` is used throughout to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod barenblatt;
pub mod entropy;
pub mod error;
pub mod gas;
pub mod lemmas;
pub mod quadrature;
pub mod rates;
pub mod solver;

pub use error::{Error, Result};
pub use gas::GasModel;
