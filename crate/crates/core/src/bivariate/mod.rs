//! Closed-form bivariate constrained expressions on rectangles.
//!
//! Every constructor here has a tensor-engine counterpart; the closed forms
//! exist as independent oracles and for readability of the 2-D special cases.

mod coons;
mod grid;
mod hermite;
mod mixed;
mod table;

use thiserror::Error;

use crate::constraints::{ConstraintError, DEFAULT_COMPATIBILITY_TOL};
use crate::expr::{EvalError, Expr};
use crate::scalar::Scalar;
use crate::tensor::TensorError;

pub use coons::{coons, toc_dirichlet_rect, EdgeSlices, Rect};
pub use grid::{lagrange_vector, multi_grid_ce, GridData};
pub use hermite::{hermite_boolean_sum, hermite_coons, hermite_m, hermite_m_of, hermite_v, HermiteSlices};
pub use mixed::{mixed_ce, MixedCe, MixedKind, MixedLine, MixedSpec};
pub use table::{
    combination_rows, combo_ce, combo_constraint_set, combo_vectors, sweep_rows, ComboFlags, RowReport, TableRow,
    COMBO_COLUMNS, SWEEP_FREE_TOL, SWEEP_RESIDUAL_TOL,
};

pub const X: usize = 0;
pub const Y: usize = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BivariateError {
    #[error("constraint data disagree at corner {corner}: mismatch {mismatch:e}")]
    CornerMismatch { corner: String, mismatch: f64 },
    #[error("duplicate node {0}")]
    DuplicateNode(f64),
    #[error("expected {expected} slices, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("combination {0} is not in the combination table")]
    NotTabulated(String),
    #[error("table entry `{entry}`: {message}")]
    TableEntry { entry: String, message: String },
    #[error("slice `{slice}` must depend on `{allowed}` only")]
    SliceVariables { slice: String, allowed: &'static str },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Value of an expression that must be free of variables.
fn constant<T: Scalar>(e: &Expr<T>) -> Result<T, BivariateError> {
    Ok(e.eval(&[])?)
}

/// Compares two readings of the same corner datum.
fn corner<T: Scalar>(name: impl FnOnce() -> String, a: &Expr<T>, b: &Expr<T>) -> Result<T, BivariateError> {
    let (va, vb) = (constant(a)?, constant(b)?);
    let tol = T::of(DEFAULT_COMPATIBILITY_TOL) * T::one().max(va.abs()).max(vb.abs());
    if (va - vb).abs() > tol {
        return Err(BivariateError::CornerMismatch { corner: name(), mismatch: (va - vb).abs().as_f64() });
    }
    Ok(va)
}

fn check_univariate<T: Scalar>(e: &Expr<T>, axis: usize) -> Result<(), BivariateError> {
    if e.variables().iter().any(|&v| v != axis) {
        let allowed = if axis == X { "x" } else { "y" };
        return Err(BivariateError::SliceVariables { slice: e.to_string(), allowed });
    }
    Ok(())
}
