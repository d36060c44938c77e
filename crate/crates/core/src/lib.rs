//! p-adic digamma values, Gauss-type formulas and the multiplicative
//! independence of cyclotomic units that underlies their transcendence.

pub mod arith;
pub mod cli;
pub mod cyclo;
pub mod digamma;
pub mod error;
pub mod independence;
pub mod linear_form;
pub mod local;
pub mod log;
pub mod padic;
pub mod real;
pub mod report;
pub mod suite;
pub mod volkenborn;
pub mod zpoly;

pub use error::{Error, Result};
pub use padic::{PadicApprox, Valuation};
