//! Root dynamics of repeatedly differentiated polynomials and the Hopf
//! equation on Cauchy transforms that governs their limit.

// Negated comparisons below are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catalog;
pub mod cauchy;
pub mod density_flow;
pub mod error;
pub mod freeconv;
pub mod hopf;
pub mod io;
pub mod polycore;
pub mod measure;
pub mod moments_flow;
pub mod rootfind;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
