//! Source-operator dilations of bipartite quantum states and numerical
//! checks of the CHSH and original Bell inequalities they imply.
//!
//! Module map:
//!
//! - [`tensor`]: dense complex matrices over tensor-factored spaces.
//! - [`states`]: flip operator, (anti)symmetric projectors, Werner states,
//!   separable mixtures, observables.
//! - [`source_ops`]: source-operators, density source-operators (DSOs) and
//!   the symmetric Werner dilations.
//! - [`feasibility`]: Dykstra projections deciding DSO existence, with CHSH
//!   witnesses for infeasibility.
//! - [`bell`]: CHSH and perfect-correlation Bell functionals and their
//!   see-saw maximization.
//! - [`measurement`]: POVMs, joint outcome statistics and sampling.
//! - [`catalog`]: the compact state-spec strings used by the CLI.
//! - [`theorems`]: the end-to-end numerical check suite.

// `!(x <= y)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bell;
pub mod catalog;
pub mod error;
pub mod feasibility;
pub mod measurement;
pub mod random;
pub mod source_ops;
pub mod states;
pub mod tensor;
pub mod theorems;

pub use error::{Error, Result};
pub use tensor::{ComplexMatrix, C64};
