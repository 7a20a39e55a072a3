//! Constrained expressions on rectangular domains.
//!
//! A constrained expression `f = A(c) + g - A(g)` satisfies a fixed set of
//! boundary values and boundary derivatives for every choice of the free
//! function `g`. The core types are generic over the scalar; the aliases at
//! the crate root fix it to `f64`.

pub mod bivariate;
pub mod constraints;
pub mod expr;
pub mod linalg;
pub mod pde;
pub mod sampling;
pub mod scalar;
pub mod tensor;
pub mod univariate;

pub use scalar::Scalar;

pub type Expr = expr::Expr<f64>;
pub type Point = expr::Point<f64>;
pub type Domain = constraints::Domain<f64>;
pub type AxisConstraint = constraints::AxisConstraint<f64>;
pub type ConstraintSet = constraints::ConstraintSet<f64>;
pub type VVector = tensor::VVector<f64>;
pub type MTensor = tensor::MTensor<f64>;
pub type ConstrainedExpression = tensor::ConstrainedExpression<f64>;
