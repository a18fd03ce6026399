#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod distributions;
pub mod error;
pub mod fermi;
pub mod forecast;
pub mod population;
pub mod posterior;
pub mod quadrature;
pub mod roots;
pub mod urn;

pub use error::{Error, Result};
