//! Constraints along a single axis: `f = g + Σ η_k p_k` and the Lagrange
//! (Waring) form for multiple value constraints.

use thiserror::Error;

use crate::expr::Expr;
use crate::linalg::{inverse_with_rcond, Mat};
use crate::scalar::Scalar;
use crate::tensor::{bc_operator, SINGULAR_RCOND};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum UnivariateError {
    #[error("{constraints} constraints but {supports} support functions")]
    CountMismatch { constraints: usize, supports: usize },
    #[error("support function `{0}` depends on variables other than the constrained axis")]
    SupportNotUnivariate(String),
    #[error("constraint target `{0}` depends on the constrained axis")]
    TargetDependsOnAxis(String),
    #[error("constraint (p = {point}, d = {order}) appears twice")]
    Duplicate { point: f64, order: u32 },
    #[error("duplicate node {0}")]
    DuplicateNode(f64),
    #[error("support matrix is singular (rcond {rcond:e}) {matrix}{}", suggestion(*.zero_column))]
    Singular { matrix: String, rcond: f64, zero_column: Option<usize> },
}

fn suggestion(col: Option<usize>) -> String {
    match col {
        Some(k) => format!("; support function {} is annihilated by every constraint, try p_k = x^k", k + 1),
        None => String::new(),
    }
}

/// One constraint `d^d f / dx^d |_{x = point} = target`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointConstraint<T> {
    pub point: T,
    pub order: u32,
    /// Constant or expression in the remaining variables.
    pub target: Expr<T>,
}

impl<T: Scalar> PointConstraint<T> {
    pub fn value(point: T, target: Expr<T>) -> Self {
        PointConstraint { point, order: 0, target }
    }

    pub fn derivative(point: T, order: u32, target: Expr<T>) -> Self {
        PointConstraint { point, order, target }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSpec<T> {
    /// The constrained axis (0-based).
    pub axis: usize,
    pub constraints: Vec<PointConstraint<T>>,
    /// `p_k`; `None` selects the monomials `x^{k-1}`.
    pub supports: Option<Vec<Expr<T>>>,
    pub g: Expr<T>,
}

impl<T: Scalar> UnivariateSpec<T> {
    pub fn new(axis: usize, constraints: Vec<PointConstraint<T>>, g: Expr<T>) -> Self {
        UnivariateSpec { axis, constraints, supports: None, g }
    }

    pub fn with_supports(mut self, supports: Vec<Expr<T>>) -> Self {
        self.supports = Some(supports);
        self
    }

    pub fn support_functions(&self) -> Vec<Expr<T>> {
        self.supports.clone().unwrap_or_else(|| {
            (0..self.constraints.len()).map(|k| Expr::powi(Expr::var(self.axis), k as i32)).collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateCe<T> {
    pub expr: Expr<T>,
    /// `η_k` as expressions in `g` and the targets.
    pub etas: Vec<Expr<T>>,
    /// `[d^{d_m} p_k / dx^{d_m} (p_m)]`, rows by constraint.
    pub matrix: Mat<T>,
    /// 1-norm condition number of `matrix`.
    pub condition: T,
}

/// Solves the η system of `spec` and returns `f = g + Σ η_k p_k`.
pub fn build_univariate_ce<T: Scalar>(spec: &UnivariateSpec<T>) -> Result<UnivariateCe<T>, UnivariateError> {
    let axis = spec.axis;
    let supports = spec.support_functions();
    let n = spec.constraints.len();
    if supports.len() != n {
        return Err(UnivariateError::CountMismatch { constraints: n, supports: supports.len() });
    }
    for (i, c) in spec.constraints.iter().enumerate() {
        if c.target.contains_var(axis) {
            return Err(UnivariateError::TargetDependsOnAxis(c.target.to_string()));
        }
        if spec.constraints[..i].iter().any(|o| o.point == c.point && o.order == c.order) {
            return Err(UnivariateError::Duplicate { point: c.point.as_f64(), order: c.order });
        }
    }
    let mut b = Mat::zeros(n, n);
    for (k, p) in supports.iter().enumerate() {
        if p.variables().iter().any(|&v| v != axis) {
            return Err(UnivariateError::SupportNotUnivariate(p.to_string()));
        }
        for (m, c) in spec.constraints.iter().enumerate() {
            let v = bc_operator(p, axis, c.point, c.order);
            // univariate support: the operator leaves a constant
            b[(m, k)] = v.eval(&[]).unwrap_or(T::nan());
        }
    }
    let (inv, rcond) = inverse_with_rcond(&b);
    let inv = match inv {
        Some(inv) if rcond >= T::of(SINGULAR_RCOND) => inv,
        _ => {
            let zero_column = (0..n).find(|&k| (0..n).all(|m| b[(m, k)] == T::zero()));
            return Err(UnivariateError::Singular { matrix: format!("{b}"), rcond: rcond.as_f64(), zero_column });
        }
    };
    let residuals: Vec<Expr<T>> = spec
        .constraints
        .iter()
        .map(|c| Expr::sub(c.target.clone(), bc_operator(&spec.g, axis, c.point, c.order)))
        .collect();
    let etas: Vec<Expr<T>> = (0..n)
        .map(|k| residuals.iter().enumerate().map(|(m, r)| Expr::mul(Expr::constant(inv[(k, m)]), r.clone())).sum())
        .collect();
    let expr = etas
        .iter()
        .zip(&supports)
        .fold(spec.g.clone(), |acc, (eta, p)| Expr::add(acc, Expr::mul(eta.clone(), p.clone())));
    Ok(UnivariateCe { expr, etas, matrix: b, condition: T::one() / rcond })
}

/// `g + Σ_k (c_k - g|_{x = w_k}) Π_{j≠k} (x - w_j)/(w_k - w_j)` along `axis`.
pub fn waring_ce<T: Scalar>(
    axis: usize,
    nodes: &[T],
    targets: &[Expr<T>],
    g: &Expr<T>,
) -> Result<Expr<T>, UnivariateError> {
    if nodes.len() != targets.len() {
        return Err(UnivariateError::CountMismatch { constraints: targets.len(), supports: nodes.len() });
    }
    for (i, w) in nodes.iter().enumerate() {
        if nodes[..i].contains(w) {
            return Err(UnivariateError::DuplicateNode(w.as_f64()));
        }
    }
    let x = Expr::var(axis);
    let terms: Expr<T> = nodes
        .iter()
        .zip(targets)
        .enumerate()
        .map(|(k, (&wk, ck))| {
            let weight: Expr<T> =
                nodes.iter().enumerate().filter(|&(j, _)| j != k).fold(Expr::one(), |acc, (_, &wj)| {
                    let factor = Expr::div(Expr::sub(x.clone(), Expr::constant(wj)), Expr::constant(wk - wj));
                    Expr::mul(acc, factor)
                });
            Expr::mul(Expr::sub(ck.clone(), g.substitute(axis, wk)), weight)
        })
        .sum();
    Ok(Expr::add(g.clone(), terms))
}
