//! Dephased dimer coupled to damped bosonic modes: master-equation dynamics, steady-state
//! entanglement and a CP-divisibility measure of non-Markovianity.

// NaN must fail parameter checks, so `!(x > 0.0)` is used on purpose. Index loops are kept
// where several arrays share the index.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod harness;
pub mod model;
pub mod nonmarkov;
pub mod opalg;

pub use error::{Error, Result};
