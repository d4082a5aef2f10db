//! Finite-element simulation of variably saturated flow and solute
//! transport on triangular meshes.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod constitutive;
pub mod driver;
pub mod fem;
pub mod flow;
pub mod mesh;
pub mod output;
pub mod scheme;
pub mod transport;
pub mod verification;
