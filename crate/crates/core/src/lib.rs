//! Symbolic-numeric engine for nonlinear generalized functions on open
//! boxes in R^d (d = 1, 2): mollifier regularization nets, asymptotic scale
//! pairs in the distribution and Gevrey ultradifferentiable regimes,
//! expression-level higher differentials, moderateness/negligibility
//! classification, and a restriction/gluing calculus for operators and
//! expressions.

pub mod calculus;
pub mod error;
pub mod scales;
pub mod sweep;
pub mod weights;

pub mod basic_space;
pub mod quotient;
pub mod regularization;
pub mod sheaf;

pub use error::{Error, Result};
