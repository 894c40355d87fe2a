#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod direct;
pub mod error;
pub mod expr;
pub mod frac_calc;
pub mod harness;
pub mod inverse;
pub mod mittag_leffler;
pub mod problem;
pub mod quadrature;
pub mod special;
pub mod sturm_liouville;

pub use error::{Error, ErrorCategory, Result};
