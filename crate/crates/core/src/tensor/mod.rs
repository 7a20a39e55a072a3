//! n-dimensional constrained expressions
//! `f = M(c)_{i..} v_i.. + g - M(g)_{i..} v_i..`.
//!
//! * [`bc_operator`] differentiates along one axis and fixes that axis.
//! * [`build_v`] solves the per-axis blend vectors from the constraint functionals.
//! * [`build_m`] fills the tensor of slices and signed intersection terms.
//! * [`assemble`] combines both with a free function and evaluates the result
//!   together with its partial derivatives.

mod assemble;
mod mtensor;
mod vvector;

use thiserror::Error;

use crate::constraints::ConstraintError;
use crate::expr::{EvalError, Expr};
use crate::scalar::Scalar;

pub use assemble::{assemble, assemble_with, AssembleOptions, CompatibilityPolicy, ConstrainedExpression};
pub use mtensor::{build_m, function_entry, slice_entry, MSource, MTensor, MultiIndex};
pub use vvector::{build_v, default_basis, shifted_basis, VVector, SINGULAR_RCOND};

/// Highest total derivative order accepted by partial evaluation.
pub const MAX_PARTIAL_ORDER: u32 = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("axis {axis}: constraint functional matrix is singular (rcond {rcond:e}) {matrix}; {hint}")]
    Singular { axis: usize, matrix: String, rcond: f64, hint: String },
    #[error("axis {axis}: basis function `{function}` depends on other variables")]
    BasisNotUnivariate { axis: usize, function: String },
    #[error("axis {axis}: expected {expected} basis functions, got {got}")]
    BasisLength { axis: usize, expected: usize, got: usize },
    #[error("axis {axis}: v vector must have {expected} components, got {got}")]
    VectorLength { axis: usize, expected: usize, got: usize },
    #[error("incompatible constraints: mismatch {mismatch:e} at {location}")]
    Incompatible { mismatch: f64, location: String },
    #[error("derivative order {0} exceeds the supported maximum")]
    OrderTooHigh(u32),
    #[error("expected a point with {expected} coordinates, got {got}")]
    PointDimension { expected: usize, got: usize },
    #[error("expected a derivative multi-index with {expected} entries, got {got}")]
    IndexDimension { expected: usize, got: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
}

/// `^k b_p^d[e]`: `d`-th derivative along `axis`, evaluated at `x_axis = p`.
pub fn bc_operator<T: Scalar>(e: &Expr<T>, axis: usize, p: T, d: u32) -> Expr<T> {
    e.diff(axis, d).substitute(axis, p)
}
