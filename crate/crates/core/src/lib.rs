//! Numerical criteria for compactness of composition operators on BMOA
//! and VMOA, with the dyadic and selection machinery behind them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod disc;
pub mod dyadic;
pub mod error;
pub mod hardy;
pub mod lab;
pub mod leibov;
pub mod nevanlinna;
pub mod quadrature;
pub mod symbol;

pub use disc::{Arc, Automorphism, DiscPoint, C};
pub use error::{Error, Result};
pub use symbol::{BoundaryGrid, Certificate, SelfMap, Symbol};
